# Experiments module
from .radius_paths import RadiusPath, PathKind
from .calibration import calibrate_radius, heuristic_radius, fit_loglog_slope, posterior_risk_profile
from .runner import ExperimentResult, run_experiment_a, run_experiment_b, run_experiment_d, run_from_config
