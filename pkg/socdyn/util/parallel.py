import concurrent.futures
import logging
from typing import Callable, List, Sequence, TypeVar
import unittest

log = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def chunk_ranges(total: int, chunk_size: int) -> List[range]:
    """Split ``range(total)`` into consecutive ranges of at most `chunk_size` items."""
    return [range(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def map_chunks(func: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> List[R]:
    """Apply `func` to every task and return the results in task order.

    With more than one worker the tasks run in a process pool; `func` and the tasks must then be picklable. The
    result depends only on the tasks, so callers get identical output for any worker count.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    log.debug('Running %s tasks on %s worker processes.', len(tasks), workers)
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks))


class TestChunkRanges(unittest.TestCase):

    def test_cover_in_order(self):
        for total in range(0, 30):
            for chunk_size in range(1, 9):
                ranges = chunk_ranges(total, chunk_size)
                self.assertEqual([i for r in ranges for i in r], list(range(total)))
                self.assertTrue(all(0 < len(r) <= chunk_size for r in ranges))


if __name__ == '__main__':
    unittest.main()
