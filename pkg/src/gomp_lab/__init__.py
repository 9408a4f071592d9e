"""Greedy sparse recovery (OMP and gOMP) with RIP estimation, recovery
bounds and numerical audits of the recovery analysis."""

from gomp_lab.bounds import (
    BoundReport,
    c_k1,
    c_k1_appendix,
    c_k2,
    c_k3,
    noise_certificate,
    recovery_certificate,
    theorem1_bound,
    theorem2_bound,
)
from gomp_lab.pursuit import HaltReason, PursuitConfig, PursuitResult, gomp_solve, omp_solve
from gomp_lab.rip import RipEstimate, exact_rip, monte_carlo_rip
from gomp_lab.signal import SparseSignal

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "HaltReason",
    "PursuitConfig",
    "PursuitResult",
    "RipEstimate",
    "SparseSignal",
    "c_k1",
    "c_k1_appendix",
    "c_k2",
    "c_k3",
    "exact_rip",
    "gomp_solve",
    "monte_carlo_rip",
    "noise_certificate",
    "omp_solve",
    "recovery_certificate",
    "theorem1_bound",
    "theorem2_bound",
]
