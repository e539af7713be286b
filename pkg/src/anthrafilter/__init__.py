"""Nonlinear filtering for a lumped stochastic anthracnose model.

Simulation of the hidden (theta, v, rho) dynamics with logit-transformed
noisy observations, grid solvers for the unnormalized and normalized
filtering equations, forward prediction, a discrete-time theta-scheme
filter, and a bootstrap particle-filter cross-check.
"""

from .model import (
    ModelParams,
    HiddenState,
    ObsCoords,
    BoundaryError,
    eval_control,
    eval_rates,
    eval_drift,
    eval_diffusion,
    eval_obs_drift,
    to_obs_coords,
    from_obs_coords,
)
from .simulate import (
    SimConfig,
    TruthPath,
    ObsPath,
    brownian_streams,
    simulate_truth,
    integrate_mean_obs,
    simulate_observations,
)
from .grid import (
    Grid,
    GridDensity,
    FilterCollapseError,
    build_grid,
    trapezoid,
    normalize,
    posterior_stats,
)
from .zakai import (
    ObsContext,
    FilterRunState,
    FilterTrace,
    apply_generator_adjoint,
    observation_multipliers,
    zakai_step,
    ks_step,
    run_grid_filter,
)
from .predictor import PredictionRequest, predict
from .discrete import ThetaScheme, DiscreteTrace, run_discrete_filter, subsample_obs
from .particle import ParticleTrace, resample_systematic, run_particle_filter
from .config import ScenarioConfig, ConfigError, load_config, parse_config_text
from .io import (
    CSV_HEADER,
    RunResult,
    write_run_csv,
    read_run_csv,
    scenario_seed,
    run_scenario_method,
    run_compare,
)

__version__ = "0.1.0"
