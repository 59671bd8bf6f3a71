"""k-core stripping processes on random hypergraphs.

Configurations come from the allocation-partition model; two engines strip
them to the k-core (round-synchronous and sequential), with full traces,
depth/reachability analysis, a two-density coupling, a bins-only drift
process, and a seeded sweep harness with scaling fits and SVG plots.
"""

from .apmodel import (Configuration, DegreeStats, degree_stats, is_simple,
                      load_configuration, rho_check, sample_ap, sample_simple,
                      sample_truncated_multinomial, save_configuration,
                      small_component_certificate)
from .binprocess import BinTrace, run_bin_process
from .coupling import CouplingReport, couple_pair, slowed_strip, strip_round
from .depth import (LayeredReach, StripDigraph, build_strip_digraph, exact_depth,
                    layered_reach, max_reach, neighborhood, reach_set,
                    replay_is_valid_sequence)
from .errors import CoreStripError, DomainError, SaturationError, SchemaError
from .experiments import (ExperimentSpec, FitReport, derived_seed, fit_scaling,
                          run_sweep)
from .peeling import (PeelResult, SlowTrace, drift_prediction, k_core,
                      parallel_strip, slow_strip)
from .plots import emit_plots
from .thresholds import (SupercriticalProfile, ThresholdConstants, core_constants,
                         core_threshold, density_of_mu, lambda_of_mean, mu_of_c,
                         poisson_tail, psi, supercritical_profile, theta_of_zeta)

__version__ = "0.1.0"

__all__ = [
    "Configuration", "DegreeStats", "degree_stats", "is_simple",
    "load_configuration", "rho_check", "sample_ap", "sample_simple",
    "sample_truncated_multinomial", "save_configuration",
    "small_component_certificate",
    "BinTrace", "run_bin_process",
    "CouplingReport", "couple_pair", "slowed_strip", "strip_round",
    "LayeredReach", "StripDigraph", "build_strip_digraph", "exact_depth",
    "layered_reach", "max_reach", "neighborhood", "reach_set",
    "replay_is_valid_sequence",
    "CoreStripError", "DomainError", "SaturationError", "SchemaError",
    "ExperimentSpec", "FitReport", "derived_seed", "fit_scaling", "run_sweep",
    "PeelResult", "SlowTrace", "drift_prediction", "k_core", "parallel_strip",
    "slow_strip",
    "emit_plots",
    "SupercriticalProfile", "ThresholdConstants", "core_constants",
    "core_threshold", "density_of_mu", "lambda_of_mean", "mu_of_c",
    "poisson_tail", "psi", "supercritical_profile", "theta_of_zeta",
]
