import logging.config
from pathlib import Path

RESYNC_INTERVAL: int = 1000  # Steps between from-scratch recomputations of the cached sums.
SUM_TOLERANCE: float = 1e-9  # Relative tolerance per particle for cached sums.
REPLICA_CHUNK_SIZE: int = 64  # Unit of parallel work. Must not depend on the worker count.
NOISE_BLOCK_STEPS: int = 256  # Steps of noise drawn per replica stream at a time.
LIMIT_REPLICA_CHUNK_SIZE: int = 1024  # Scalar replicas of the limit equation per unit of work.

GAMMA_QUARTER: float = 3.62560990822190831193  # Γ(1/4)
GAMMA_SELF_CHECK_TOLERANCE: float = 1e-12
QUARTIC_TRUNCATION_SIGMAS: float = 8.0
QUADRATURE_TOLERANCE: float = 1e-12
QUADRATURE_TOLERANCE_FLOOR: float = 1e-14  # Per-interval tolerance floor when a CDF is evaluated at many points.

KS_SERIES_TERMS: int = 100
CSV_SIGNIFICANT_DIGITS: int = 17

MALA_TARGET_ACCEPTANCE: float = 0.55
MALA_ACCEPTANCE_BAND: float = 0.1
MALA_TUNING_WINDOW: int = 100
MALA_MIN_ACCEPTANCE: float = 0.05

A4_COMPARISON_TIME: float = 5.0
CROSS_CHECK_PARTICLES: int = 4
IMPORTANCE_DRAWS: int = 1_000_000
IMPORTANCE_BLOCK: int = 100_000  # Draws per block of the importance sampler.


def configure_logging() -> None:
    path = Path(__file__).with_name('logging.conf')
    logging.config.fileConfig(path, disable_existing_loggers=False)
    log = logging.getLogger(__name__)
    log.info('Logging is configured.')
