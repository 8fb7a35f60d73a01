from enum import IntEnum
from typing import Sequence, Tuple
import unittest

import numpy as np


class Purpose(IntEnum):
    """Independent families of random streams derived from one seed."""
    SYSTEM_INITIAL = 0
    SYSTEM_DYNAMICS = 1
    LIMIT_DYNAMICS = 2
    CHAIN_INITIAL = 3
    CHAIN_PROPOSAL = 4
    CHAIN_ACCEPTANCE = 5
    PROBE = 6
    IMPORTANCE = 7


class StreamFactory:
    """Derive counter-based random streams keyed by seed, purpose and replica.

    Each stream is a :class:`numpy.random.Philox` generator whose 128-bit key packs the 64-bit seed in the high
    word, the purpose in the top byte of the low word and the replica index in the remaining 56 bits. The k-th
    draw of a stream therefore depends only on its key and k, never on scheduling.
    """
    _REPLICA_BITS = 56

    def __init__(self, seed: int):
        if not 0 <= seed < 1 << 64:
            raise ValueError(f'Seed must be a 64-bit unsigned integer, but it is {seed}.')
        self.seed: int = seed

    def key(self, purpose: Purpose, replica: int = 0) -> int:
        if not 0 <= replica < 1 << self._REPLICA_BITS:
            raise ValueError(f'Replica index {replica} is out of range.')
        return (self.seed << 64) | (int(purpose) << self._REPLICA_BITS) | replica

    def generator(self, purpose: Purpose, replica: int = 0) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.key(purpose, replica)))

    def generators(self, purpose: Purpose, replicas: Sequence[int]) -> Tuple[np.random.Generator, ...]:
        return tuple(self.generator(purpose, r) for r in replicas)


class NoiseBlocks:
    """Serve per-step draws of shape ``(replicas, *shape)``, refilled in blocks from per-replica streams.

    :param generators: one generator per replica, in replica order.
    :param shape: shape of a single replica's draw per step.
    :param block_steps: number of steps drawn from each stream per refill.
    :param kind: ``'normal'`` for standard normal or ``'uniform'`` for uniform on [0, 1).
    """
    def __init__(self, generators: Sequence[np.random.Generator], shape: Tuple[int, ...], block_steps: int,
                 kind: str = 'normal'):
        if kind not in ('normal', 'uniform'):
            raise ValueError(f'Unsupported draw kind "{kind}".')
        self._generators = tuple(generators)
        self._shape = tuple(shape)
        self._block_steps = block_steps
        self._kind = kind
        self._block = np.empty((len(self._generators), 0) + self._shape)
        self._position = 0

    def _draw(self, generator: np.random.Generator) -> np.ndarray:
        size = (self._block_steps,) + self._shape
        if self._kind == 'normal':
            return generator.standard_normal(size)
        return generator.random(size)

    def next(self) -> np.ndarray:
        if self._position >= self._block.shape[1]:
            self._block = np.stack([self._draw(g) for g in self._generators])
            self._position = 0
        draw = self._block[:, self._position]
        self._position += 1
        return draw


class TestStreamFactory(unittest.TestCase):

    def test_same_key_same_stream(self):
        factory = StreamFactory(123)
        a = factory.generator(Purpose.SYSTEM_DYNAMICS, 7).standard_normal(16)
        b = factory.generator(Purpose.SYSTEM_DYNAMICS, 7).standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys(self):
        factory = StreamFactory(123)
        keys = {factory.key(p, r) for p in Purpose for r in range(50)}
        self.assertEqual(len(keys), len(Purpose) * 50)
        self.assertNotEqual(StreamFactory(1).key(Purpose.SYSTEM_INITIAL), StreamFactory(2).key(Purpose.SYSTEM_INITIAL))

    def test_block_size_does_not_change_draws(self):
        factory = StreamFactory(5)
        draws = {}
        for block_steps in (1, 3, 8):
            blocks = NoiseBlocks(factory.generators(Purpose.LIMIT_DYNAMICS, [0, 1]), (4,), block_steps)
            draws[block_steps] = np.stack([blocks.next() for _ in range(10)])
        np.testing.assert_array_equal(draws[1], draws[3])
        np.testing.assert_array_equal(draws[1], draws[8])

    def test_replica_draws_independent_of_batch(self):
        factory = StreamFactory(9)
        pair = NoiseBlocks(factory.generators(Purpose.CHAIN_PROPOSAL, [3, 4]), (2,), 4)
        single = NoiseBlocks(factory.generators(Purpose.CHAIN_PROPOSAL, [4]), (2,), 4)
        for _ in range(6):
            np.testing.assert_array_equal(pair.next()[1], single.next()[0])


if __name__ == '__main__':
    unittest.main()
