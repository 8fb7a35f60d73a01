import time

from socdyn.config import configure_logging
from socdyn.gof import ks_two_sample
from socdyn.limit import LimitRunConfig, simulate_limit
from socdyn.model import PhiModel
from socdyn.particles import SdeRunConfig, simulate_replicas

configure_logging()

if __name__ == '__main__':
    try:
        sigma_sq = 1.
        run = SdeRunConfig(n=256, phi=PhiModel.gaussian(sigma_sq), horizon_rescaled=5., seed=1)
        system = [p.s_tilde[-1] for p in simulate_replicas(run, replicas=200, workers=4)]
        limit = simulate_limit(LimitRunConfig(sigma_sq, dt=0.01, horizon=5., replicas=20_000, seed=1), workers=4)
        print(ks_two_sample(system, limit.terminal).to_json())
    except Exception:
        time.sleep(.01)  # Wait for logs to flush.
        raise
