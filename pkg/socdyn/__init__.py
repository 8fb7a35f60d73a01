from socdyn.experiments import ExperimentConfig, ExperimentKind, load_config, run_experiment
from socdyn.generator import apply_g_sigma, apply_g_tilde_n, Function2D, TestFunction
from socdyn.limit import LimitRunConfig, QuarticLaw, simulate_limit
from socdyn.model import PhiModel, StarDensity, validate_phi
from socdyn.particles import RescaledPath, SdeRunConfig, simulate_system
from socdyn.sampler import importance_moments, MalaConfig, sample_equilibrium
