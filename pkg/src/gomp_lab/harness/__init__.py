"""Instance generators, experiment drivers and file formats."""

from gomp_lab.harness.experiment import (
    ExperimentConfig,
    ExperimentKind,
    ExperimentResult,
    TrialRecord,
    run_experiment,
)
from gomp_lab.harness.generators import (
    Ensemble,
    SignalDistribution,
    certified_instance,
    gen_gaussian,
    gen_matrix,
    gen_near_orthonormal,
    gen_noise,
    gen_perturbed_identity,
    gen_sparse_signal,
    gen_spread_identity,
)
from gomp_lab.harness.matrix_io import matrix_io, read_matrix, write_matrix
from gomp_lab.harness.rng import make_rng

__all__ = [
    "Ensemble",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentResult",
    "SignalDistribution",
    "TrialRecord",
    "certified_instance",
    "gen_gaussian",
    "gen_matrix",
    "gen_near_orthonormal",
    "gen_noise",
    "gen_perturbed_identity",
    "gen_sparse_signal",
    "gen_spread_identity",
    "make_rng",
    "matrix_io",
    "read_matrix",
    "run_experiment",
    "write_matrix",
]
