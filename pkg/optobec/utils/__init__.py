from .params import SystemParams, DerivedParams, derive_constants, thermal_occupation, hz_to_rad, rad_to_hz
from .meanfield import MeanField, steady_state_given_delta, steady_state_given_delta_o
from .dynamics import Mode, StabilityReport, build_drift, build_diffusion, stability
from .steadystate import solve_lyapunov, integrate_moments
from .gaussian import BipartitePartition, log_negativity, simon_criterion, check_physicality, reduce
from .config import Settings, build_params, read_params_file, parse_quantity
from .errors import OptobecError, ConfigError
from .log import configure_logging, get_logger
from .notify import desktop_notification


__all__ = [
    "SystemParams",
    "DerivedParams",
    "derive_constants",
    "thermal_occupation",
    "hz_to_rad",
    "rad_to_hz",
    "MeanField",
    "steady_state_given_delta",
    "steady_state_given_delta_o",
    "Mode",
    "StabilityReport",
    "build_drift",
    "build_diffusion",
    "stability",
    "solve_lyapunov",
    "integrate_moments",
    "BipartitePartition",
    "log_negativity",
    "simon_criterion",
    "check_physicality",
    "reduce",
    "Settings",
    "build_params",
    "read_params_file",
    "parse_quantity",
    "OptobecError",
    "ConfigError",
    "configure_logging",
    "get_logger",
    "desktop_notification",
]
