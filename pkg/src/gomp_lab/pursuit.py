"""OMP and generalized OMP (gOMP) with per-iteration tracing.

Each iteration identifies new atoms by their correlation with the
current residual, augments the support, refits the coefficients by least
squares on the whole support, and updates the residual.  gOMP selects
``n_atoms`` atoms per iteration; OMP is the single-atom case.

The loop guard "residual must shrink" is evaluated after the update: an
iteration whose residual norm exceeds the previous one is discarded and
the solver halts with :attr:`HaltReason.RESIDUAL_INCREASE`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from gomp_lab.errors import InsufficientCandidates
from gomp_lab.linalg import as_index_set, as_matrix, as_vector, correlations, least_squares
from gomp_lab.signal import SparseSignal

DEFAULT_RESIDUAL_TOLERANCE = 1e-10


class HaltReason(str, enum.Enum):
    ITERATION_CAP = "IterationCap"
    RESIDUAL_TOLERANCE = "ResidualTolerance"
    RESIDUAL_INCREASE = "ResidualIncrease"


@dataclass(frozen=True)
class PursuitConfig:
    """Solver knobs.

    ``n_atoms`` is the number of atoms selected per iteration and
    ``residual_tolerance`` is relative to ``||y||_2``.  Ties in the
    identification step always go to the lowest column index.
    """

    n_atoms: int = 1
    residual_tolerance: float = DEFAULT_RESIDUAL_TOLERANCE
    tie_break: str = "lowest-index"

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if not self.residual_tolerance >= 0:
            raise ValueError("residual_tolerance must be nonnegative")
        if self.tie_break != "lowest-index":
            raise ValueError(f"unsupported tie_break rule {self.tie_break!r}")


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """State after iteration ``k`` (1-based)."""

    k: int
    selected: np.ndarray
    support: np.ndarray
    residual: np.ndarray
    residual_norm: float
    coefficients: np.ndarray
    # both populated only when the true signal is supplied
    correct_count: int | None = None  # |selected ∩ T|
    overlap_l: int | None = None  # |support ∩ T|


@dataclass(frozen=True, eq=False)
class IterationState:
    """Solver state entering iteration ``k + 1``: support, residual and the
    atoms that iteration went on to select (``None`` after the last one)."""

    k: int
    support: np.ndarray
    residual: np.ndarray
    next_selected: np.ndarray | None


@dataclass(eq=False)
class PursuitTrace:
    initial_residual: np.ndarray
    records: list[IterationRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def residual_norms(self) -> np.ndarray:
        """``||r^k||_2`` for ``k = 0 .. len(self)``."""
        return np.array(
            [float(np.linalg.norm(self.initial_residual))]
            + [rec.residual_norm for rec in self.records]
        )

    @property
    def supports(self) -> list[np.ndarray]:
        return [rec.support for rec in self.records]

    def state(self, k) -> IterationState:
        if not 0 <= k <= len(self):
            raise IndexError(f"trace has states 0..{len(self)}, asked for {k}")
        if k == 0:
            support, residual = np.zeros(0, dtype=np.intp), self.initial_residual
        else:
            rec = self.records[k - 1]
            support, residual = rec.support, rec.residual
        nxt = self.records[k].selected if k < len(self) else None
        return IterationState(k, support, residual, nxt)

    def states(self):
        return [self.state(k) for k in range(len(self) + 1)]


@dataclass(eq=False)
class PursuitResult:
    final_support: np.ndarray
    estimate: SparseSignal
    trace: PursuitTrace
    halt_reason: HaltReason

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def residual_norm(self) -> float:
        return float(self.trace.residual_norms[-1])

    def dense(self) -> np.ndarray:
        return self.estimate.dense()


def select_top_n(corrs, N, excluded=(), tie_break="lowest-index") -> np.ndarray:
    """Indices of the ``N`` largest entries of ``corrs`` outside ``excluded``.

    Ties go to the lowest index.  The result is returned sorted.
    """
    if tie_break != "lowest-index":
        raise ValueError(f"unsupported tie_break rule {tie_break!r}")
    c = as_vector(corrs).copy()
    excluded = as_index_set(excluded, c.size)
    available = c.size - excluded.size
    if N < 1 or N > available:
        raise InsufficientCandidates(f"asked for {N} indices, only {available} available")
    c[excluded] = -np.inf
    # stable sort on -c keeps lower indices first among equal values
    return np.sort(np.argsort(-c, kind="stable")[:N])


def _check_problem(Phi, y, K):
    Phi = as_matrix(Phi)
    y = as_vector(y, Phi.shape[0])
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    return Phi, y, int(K)


def _pursue(Phi, y, K, identify, tolerance, truth):
    m, n = Phi.shape
    T = None if truth is None else set(truth.support.tolist())
    y_norm = float(np.linalg.norm(y))
    trace = PursuitTrace(initial_residual=y.copy())
    support = np.zeros(0, dtype=np.intp)
    coef = np.zeros(0)
    r, r_norm = y.copy(), y_norm
    halt = HaltReason.ITERATION_CAP
    if r_norm <= tolerance * y_norm:
        halt = HaltReason.RESIDUAL_TOLERANCE
    else:
        for k in range(1, K + 1):
            new = identify(correlations(Phi, r), support)
            cand = np.union1d(support, new).astype(np.intp)
            sub = Phi[:, cand]
            z = least_squares(sub, y)
            r_new = y - sub @ z
            r_new_norm = float(np.linalg.norm(r_new))
            if r_new_norm > r_norm:
                halt = HaltReason.RESIDUAL_INCREASE
                break
            support, coef, r, r_norm = cand, z, r_new, r_new_norm
            trace.records.append(
                IterationRecord(
                    k=k,
                    selected=new,
                    support=support,
                    residual=r,
                    residual_norm=r_norm,
                    coefficients=coef,
                    correct_count=None if T is None else sum(int(i) in T for i in new),
                    overlap_l=None if T is None else sum(int(i) in T for i in support),
                )
            )
            if r_norm <= tolerance * y_norm:
                halt = HaltReason.RESIDUAL_TOLERANCE
                break
    return PursuitResult(
        final_support=support,
        estimate=SparseSignal(n, support, coef),
        trace=trace,
        halt_reason=halt,
    )


def omp_solve(Phi, y, K, config=None, truth=None) -> PursuitResult:
    """Orthogonal matching pursuit: at most ``K`` single-atom iterations.

    Identification takes the arg-max correlation over columns not yet in
    the support (those are orthogonal to the residual anyway).  When
    ``truth`` is given the trace also records overlap with its support.
    """
    Phi, y, K = _check_problem(Phi, y, K)
    config = config or PursuitConfig()
    if config.n_atoms != 1:
        raise ValueError("omp_solve selects one atom per iteration; use gomp_solve")
    if K > Phi.shape[0]:
        raise ValueError(f"K = {K} exceeds the number of rows m = {Phi.shape[0]}")
    if K > Phi.shape[1]:
        raise InsufficientCandidates(f"K = {K} exceeds the number of columns")

    def identify(corrs, support):
        c = corrs.copy()
        c[support] = -np.inf
        return np.array([int(np.argmax(c))], dtype=np.intp)

    return _pursue(Phi, y, K, identify, config.residual_tolerance, truth)


def gomp_solve(Phi, y, K, config=None, truth=None) -> PursuitResult:
    """Generalized OMP: ``config.n_atoms`` atoms per iteration, at most ``K``
    iterations, requiring ``n_atoms * K < m``."""
    Phi, y, K = _check_problem(Phi, y, K)
    config = config or PursuitConfig()
    N = config.n_atoms
    if N * K >= Phi.shape[0]:
        raise ValueError(f"gOMP needs N*K < m, got N*K = {N * K}, m = {Phi.shape[0]}")
    if N * K > Phi.shape[1]:
        raise InsufficientCandidates(f"N*K = {N * K} exceeds the number of columns")

    def identify(corrs, support):
        return select_top_n(corrs, N, support, config.tie_break)

    return _pursue(Phi, y, K, identify, config.residual_tolerance, truth)
