"""Trajectory PHD and CPHD filters that learn unknown detection probabilities."""
from .core import DegenerateScanError, MixtureState, NumericalError, TrajectoryEstimate
from .estimation import estimate_count_tcphd, estimate_count_tphd, extract
from .filter_tcphd import gm_tcphd_predict, gm_tcphd_update, tcphd_predict, tcphd_update
from .filter_tphd import gm_tphd_predict, gm_tphd_update, tphd_predict, tphd_update
from .harness import BenchmarkConfig, load_config, run_benchmark
from .metric import rms_tm, trajectory_metric
from .models import BetaTransition, BirthModel, ClutterModel, LinearGaussianModel
from .reduction import reduce_mixture
from .sim import generate_measurements, generate_truth, make_scenario

__all__ = [
    "BenchmarkConfig", "BetaTransition", "BirthModel", "ClutterModel", "DegenerateScanError",
    "LinearGaussianModel", "MixtureState", "NumericalError", "TrajectoryEstimate",
    "estimate_count_tcphd", "estimate_count_tphd", "extract", "generate_measurements",
    "generate_truth", "gm_tcphd_predict", "gm_tcphd_update", "gm_tphd_predict", "gm_tphd_update",
    "load_config", "make_scenario", "reduce_mixture", "rms_tm", "run_benchmark",
    "tcphd_predict", "tcphd_update", "tphd_predict", "tphd_update", "trajectory_metric",
]
