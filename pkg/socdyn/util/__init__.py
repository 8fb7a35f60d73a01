from socdyn.util.parallel import chunk_ranges, map_chunks
from socdyn.util.quadrature import adaptive_simpson, lanczos_gamma
from socdyn.util.rng import NoiseBlocks, Purpose, StreamFactory
