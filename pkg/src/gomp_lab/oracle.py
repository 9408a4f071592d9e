"""Ground truth for small instances: exhaustive l0 search and audits that
evaluate every inequality of the recovery analysis on concrete runs.

Audit conventions
-----------------
At iteration state ``k`` the solver holds support ``Lam`` and residual
``r``.  With ``T`` the true support, ``R = T - Lam``, ``l = |T & Lam|``
and ``U = T | Lam`` (so ``|U| = |Lam| + K - l``)::

    beta_1   = max_{i in T}   |<phi_i, r>|
    alpha_N  = N-th largest   |<phi_j, r>| over j not in T
    z        = pinv(Phi_Lam) Phi_R x_R
    x''      = x_R on R, -z on Lam           (so P_perp Phi_R x_R = Phi_U x''_U)

Each check is evaluated only where the step it instantiates is valid
for the instance.  A check whose order arithmetic does not hold at this
``(k, l)`` is recorded as skipped with the reason, and checks whose
right-hand side vanishes because ``T`` is already inside ``Lam`` are
vacuous.  RIP constants used on intermediate orders fall back to the
next larger supplied order, which is a valid upper bound because the
exact constants are nondecreasing in the order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from gomp_lab.checks import AuditCheck, AuditReport, Relation, compare, skipped
from gomp_lab.errors import (
    EnumerationTooLarge,
    InsufficientCandidates,
    MissingDelta,
    RankDeficient,
    ZeroNoise,
)
from gomp_lab.linalg import as_index_set, as_matrix, as_vector, correlations, least_squares
from gomp_lab.rip import ENUMERATION_CAP, RipEstimate, exact_rip, modified_rip_margins

IDENTITY_RTOL = 1e-9


# ---------------------------------------------------------------------------
# l0 search


@dataclass(frozen=True, eq=False)
class L0Search:
    support: np.ndarray
    coefficients: np.ndarray
    residual_norm: float
    skipped: int
    evaluated: int


def l0_search(Phi, y, K, cap=ENUMERATION_CAP, tie_tol=1e-12) -> L0Search:
    """Minimize ``||y - Phi_S z||`` over every support ``S`` with ``|S| = K``.

    Supports are visited lexicographically and a later support replaces
    the incumbent only if its residual is smaller by more than
    ``tie_tol * ||y||``, so near-ties go to the lexicographically first.
    Rank-deficient supports are skipped and counted.
    """
    Phi = as_matrix(Phi)
    m, n = Phi.shape
    y = as_vector(y, m)
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    K = int(K)
    if K > m or K > n:
        raise ValueError(f"K = {K} exceeds min(m, n) = {min(m, n)}")
    total = math.comb(n, K)
    if total > cap:
        raise EnumerationTooLarge(f"binomial({n}, {K}) = {total} supports exceeds cap {cap}")
    tol = tie_tol * float(np.linalg.norm(y))
    best = None
    n_skipped = 0
    for S in itertools.combinations(range(n), K):
        sub = Phi[:, S]
        try:
            z = least_squares(sub, y)
        except RankDeficient:
            n_skipped += 1
            continue
        res = float(np.linalg.norm(y - sub @ z))
        if best is None or res < best[2] - tol:
            best = (S, z, res)
    if best is None:
        raise RankDeficient(f"every size-{K} support is rank deficient")
    return L0Search(np.array(best[0], dtype=np.intp), best[1], best[2], n_skipped, total)


def l0_oracle(Phi, y, K, cap=ENUMERATION_CAP):
    """``(support, coefficients, residual_norm)`` of the best size-``K`` fit."""
    res = l0_search(Phi, y, K, cap)
    return res.support, res.coefficients, res.residual_norm


def columns_independent(Phi, size, cap=ENUMERATION_CAP, rtol=1e-10) -> bool:
    """Whether every set of ``size`` columns is linearly independent."""
    Phi = as_matrix(Phi)
    m, n = Phi.shape
    if size > m:
        return False
    size = min(size, n)
    if math.comb(n, size) > cap:
        raise EnumerationTooLarge(f"binomial({n}, {size}) exceeds cap {cap}")
    for S in itertools.combinations(range(n), size):
        sv = np.linalg.svd(Phi[:, S], compute_uv=False)
        if sv[-1] <= rtol * sv[0]:
            return False
    return True


# ---------------------------------------------------------------------------
# correlation statistics


class AlphaBeta(NamedTuple):
    beta1: float
    alpha_n: float
    W: np.ndarray


def alpha_beta(Phi, truth, support, r, N, exclude_support=False) -> AlphaBeta:
    """Largest true-index correlation and N-th largest incorrect one.

    Incorrect indices are all ``j`` outside ``T``; with
    ``exclude_support=True`` they are restricted to outside ``T | support``.
    ``W`` holds the indices of the ``N`` largest incorrect correlations,
    ties going to the lowest index.
    """
    Phi = as_matrix(Phi)
    n = Phi.shape[1]
    c = correlations(Phi, r)
    T = truth.support
    out = set(T.tolist())
    if exclude_support:
        out |= set(as_index_set(support, n).tolist())
    cand = np.array([j for j in range(n) if j not in out], dtype=np.intp)
    if N < 1 or N > cand.size:
        raise InsufficientCandidates(f"need {N} incorrect indices, only {cand.size} available")
    order = cand[np.argsort(-c[cand], kind="stable")][:N]
    return AlphaBeta(float(c[T].max()), float(c[order[-1]]), np.sort(order))


# ---------------------------------------------------------------------------
# RIP constant lookup


def _delta_value(est):
    if isinstance(est, RipEstimate):
        if not est.exact:
            raise MissingDelta(
                f"order-{est.order} constant is a sampled lower bound; audits need exact values"
            )
        return est.delta
    return float(est)


class DeltaTable:
    """Exact RIP constants keyed by order.

    Values may be :class:`RipEstimate` (sampled ones are refused) or plain
    floats, which are trusted to be exact.
    """

    def __init__(self, deltas):
        self._d = {int(k): _delta_value(v) for k, v in dict(deltas).items()}

    def __contains__(self, order):
        return order in self._d

    def require(self, *orders):
        missing = sorted(o for o in set(orders) if o not in self._d)
        if missing:
            raise MissingDelta(f"exact RIP constants missing for orders {missing}")

    def __getitem__(self, order) -> float:
        try:
            return self._d[order]
        except KeyError:
            raise MissingDelta(f"exact RIP constant missing for order {order}") from None

    def upper(self, order):
        """The constant at ``order`` or the nearest larger supplied order."""
        above = [o for o in self._d if o >= order]
        return self._d[min(above)] if above else None


def audit_deltas(Phi, max_order, cap=ENUMERATION_CAP, backend=None) -> dict[int, RipEstimate]:
    """Exact constants of orders ``1 .. max_order`` (capped at ``min(m, n)``),
    stopping at the first order whose enumeration exceeds ``cap``."""
    Phi = as_matrix(Phi)
    top = min(int(max_order), *Phi.shape)
    out = {}
    for k in range(1, top + 1):
        if math.comb(Phi.shape[1], k) > cap:
            break
        out[k] = exact_rip(Phi, k, cap, backend)
    return out


# ---------------------------------------------------------------------------
# per-iteration geometry


@dataclass(frozen=True, eq=False)
class _Geometry:
    T: np.ndarray
    Lam: np.ndarray
    R: np.ndarray
    U: np.ndarray
    l: int
    x_R: np.ndarray
    clean_part: np.ndarray  # P_perp(Lam) Phi_R x_R
    x_pp: np.ndarray  # length n, supported on U
    corr: np.ndarray
    beta1: float
    alpha: AlphaBeta
    alpha_w: AlphaBeta | None

    @property
    def s(self):
        return self.U.size

    @property
    def xR_norm(self):
        return float(np.linalg.norm(self.x_R))

    @property
    def xpp_norm(self):
        return float(np.linalg.norm(self.x_pp))


def _geometry(Phi, truth, support, r, N) -> _Geometry:
    n = Phi.shape[1]
    T = truth.support
    Lam = as_index_set(support, n)
    R = np.setdiff1d(T, Lam).astype(np.intp)
    U = np.union1d(T, Lam).astype(np.intp)
    x_R = truth.restricted(R)
    signal_R = Phi[:, R] @ x_R
    x_pp = np.zeros(n)
    x_pp[R] = x_R
    if Lam.size:
        z = least_squares(Phi[:, Lam], signal_R)
        x_pp[Lam] -= z
        clean = signal_R - Phi[:, Lam] @ z
    else:
        clean = signal_R.copy()
    ab = alpha_beta(Phi, truth, Lam, r, N)
    n_outside = n - U.size
    ab_w = alpha_beta(Phi, truth, Lam, r, N, exclude_support=True) if n_outside >= N else None
    return _Geometry(T, Lam, R, U, int(T.size - R.size), x_R, clean, x_pp,
                     correlations(Phi, r), ab.beta1, ab, ab_w)


def _c(d):
    return d / (1.0 - d)


def _probe_checks(Phi, g, table, probes, rng):
    """Matrix-level facts on the supports the iteration touches:
    ``L1b`` and ``L1c`` on ``U``, ``L1d`` between ``W`` and ``U``."""
    m = Phi.shape[0]
    out = []
    U = g.U
    dU = table.upper(U.size) if U.size <= m else None
    if dU is None:
        why = f"no exact constant of order >= {U.size}"
        out += [skipped("L1b-lower", "LE", why), skipped("L1b-upper", "LE", why),
                skipped("L1c", "LE", why)]
    else:
        G = Phi[:, U].T @ Phi[:, U]
        q = rng.standard_normal((probes, U.size))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        ratios = np.linalg.norm(q @ G, axis=1)
        out.append(compare("L1b-lower", 1.0 - dU, ratios.min(), "LE", scale=1.0))
        out.append(compare("L1b-upper", ratios.max(), 1.0 + dU, "LE", scale=1.0))
        v = rng.standard_normal((probes, m))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        out.append(compare("L1c", np.linalg.norm(v @ Phi[:, U], axis=1).max(),
                           math.sqrt(1.0 + dU), "LE", scale=1.0))
    if g.alpha_w is None:
        why = "fewer than N indices outside T | Lam"
        out += [skipped("L1d-inner", "LE", why), skipped("L1d", "LE", why)]
        return out
    I = g.alpha_w.W
    dIJ = table.upper(I.size + U.size) if I.size + U.size <= m else None
    if dIJ is None:
        why = f"no exact constant of order >= {I.size + U.size}"
        out += [skipped("L1d-inner", "LE", why), skipped("L1d", "LE", why)]
        return out
    cross = Phi[:, I].T @ Phi[:, U]
    inner, worst_ratio = None, 0.0
    for _ in range(probes):
        p = rng.standard_normal(U.size)
        p /= np.linalg.norm(p)
        q = rng.standard_normal(I.size)
        q /= np.linalg.norm(q)
        cp = cross @ p
        pair = (abs(float(q @ cp)), float(np.linalg.norm(cp)))
        if inner is None or pair[1] - pair[0] < inner[1] - inner[0]:
            inner = pair
        worst_ratio = max(worst_ratio, pair[1])
    out.append(compare("L1d-inner", *inner, "LE", scale=1.0))
    out.append(compare("L1d", worst_ratio, dIJ, "LE", scale=1.0))
    return out


def _order_reasons(g, N, K):
    """Establish which order reductions to delta_NK / delta_NK+1 hold."""
    NK = N * K
    lam = g.Lam.size
    nk_reason = []
    if N + K - g.l > NK:
        nk_reason.append(f"N+K-l = {N + K - g.l} > NK")
    if N + lam > NK:
        nk_reason.append(f"N+|Lam| = {N + lam} > NK")
    if g.s > NK:
        nk_reason.append(f"|T|Lam| = {g.s} > NK")
    s_ok = None if g.s <= NK else f"|T|Lam| = {g.s} > NK"
    w_ok = None
    if g.alpha_w is None:
        w_ok = "fewer than N indices outside T | Lam"
    elif N + g.s > NK + 1:
        w_ok = f"N+|T|Lam| = {N + g.s} > NK+1"
    return ("; ".join(nk_reason) or None), s_ok, w_ok


def _emit(name, relation, reason, *args, **kwargs):
    if reason:
        return skipped(name, relation, reason)
    return compare(name, *args, relation=relation, **kwargs)


def _l3_checks(Phi, g, table):
    if g.s > Phi.shape[0]:
        reason = f"|T|Lam| = {g.s} exceeds m"
        d = None
    else:
        d = table.upper(g.s)
        reason = None if d is not None else f"no exact constant of order >= {g.s}"
        if d is not None and not d < 0.5:
            reason = f"delta_{g.s} bound {d:.6g} is not below 1/2"
    names = ("L3-lower", "L3-upper", "L3-lower-phi", "L3-upper-phi", "A2")
    if reason:
        return [skipped(nm, "LT", reason) for nm in names]
    u = np.zeros(Phi.shape[1])
    u[g.R] = g.x_R
    return modified_rip_margins(Phi, g.Lam, g.R, u, delta=d)


def _selection_check(g, next_selected, scale):
    if next_selected is None:
        return skipped("SEL", "GE", "no further iteration")
    hits = int(np.intersect1d(next_selected, g.T).size)
    antecedent = g.R.size > 0 and g.beta1 > g.alpha.alpha_n + IDENTITY_RTOL * scale
    return compare("SEL", hits, 1, "GE", vacuous=not antecedent,
                   note=f"beta1={g.beta1:.6g} alpha_N={g.alpha.alpha_n:.6g}")


def _base_audit(Phi, truth, state, N):
    Phi = as_matrix(Phi)
    truth.validate()
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    r = as_vector(state.residual, Phi.shape[0])
    return Phi, r, _geometry(Phi, truth, state.support, r, int(N))


def audit_noiseless_iteration(Phi, truth, state, deltas, N, probes=8, seed=0,
                              instance_id="") -> AuditReport:
    """Audit one state of a noiseless run of ``y = Phi x``.

    ``state`` is an :class:`~gomp_lab.pursuit.IterationState` (support and
    residual entering the next iteration, and that iteration's picks).
    ``deltas`` maps orders to exact constants; orders ``NK`` and ``NK+1``
    are required, other orders improve coverage of the matrix-level
    checks.

    Checks: ``Eq3``, ``Eq5``, ``Eq11`` (decomposition identities), ``Eq4``,
    ``L1b-lower``, ``L1b-upper``, ``L1c``, ``L1d-inner``, ``L1d``, ``L2``,
    ``L2-W``, ``Eq8``, ``Eq9``, ``Eq13``, ``Eq13-W``, ``Eq15``, the five
    modified-RIP checks and ``SEL``.
    """
    from gomp_lab.harness.rng import make_rng

    Phi, r, g = _base_audit(Phi, truth, state, N)
    K = truth.K
    table = DeltaTable(deltas)
    table.require(N * K, N * K + 1)
    dNK, dNK1 = table[N * K], table[N * K + 1]
    y = Phi[:, g.T] @ truth.values
    y_norm = float(np.linalg.norm(y))
    rng = make_rng(seed, "audit", state.k)
    rep = AuditReport(state.k, instance_id=instance_id)

    tol = IDENTITY_RTOL * y_norm
    rep.add(compare("Eq3", g.corr[g.Lam].max() if g.Lam.size else 0.0, tol, "LE",
                    vacuous=g.Lam.size == 0))
    rep.add(compare("Eq5", np.linalg.norm(r - g.clean_part), tol, "LE"))
    rep.add(compare("Eq11", np.linalg.norm(r - Phi[:, g.U] @ g.x_pp[g.U]), tol, "LE"))
    done = g.R.size == 0
    phi_R_r = float(np.linalg.norm(Phi[:, g.R].T @ r)) if g.R.size else 0.0
    rep.add(compare("Eq4", phi_R_r / math.sqrt(K), g.beta1, "LE", scale=y_norm, vacuous=done))
    rep.extend(_probe_checks(Phi, g, table, probes, rng))

    nk_reason, s_ok, w_ok = _order_reasons(g, N, K)
    if not dNK < 1.0:
        nk_reason = s_ok = f"delta_NK = {dNK:.6g} is not below 1"
    c = _c(dNK) if dNK < 1.0 else math.inf
    sN, sK = math.sqrt(N), math.sqrt(K)
    rep.add(_emit("L2", "LT", nk_reason, g.alpha.alpha_n, c * g.xR_norm / sN,
                  scale=y_norm, vacuous=done))
    if g.alpha_w is None:
        rep.add(skipped("L2-W", "LT", "fewer than N indices outside T | Lam"))
    else:
        rep.add(_emit("L2-W", "LT", nk_reason, g.alpha_w.alpha_n, c * g.xR_norm / sN,
                      scale=y_norm, vacuous=done))
    rep.add(_emit("Eq8", "LT", s_ok, (1.0 - c) * g.xR_norm, phi_R_r, scale=y_norm, vacuous=done))
    rep.add(_emit("Eq9", "LT", s_ok, (1.0 - c) * g.xR_norm / sK, g.beta1,
                  scale=y_norm, vacuous=done))
    rep.add(_emit("Eq13", "LT", w_ok, g.alpha.alpha_n, dNK1 * g.xpp_norm / sN,
                  scale=y_norm, vacuous=done))
    rep.add(_emit("Eq13-W", "LT", w_ok, g.alpha_w.alpha_n if g.alpha_w else 0.0,
                  dNK1 * g.xpp_norm / sN, scale=y_norm, vacuous=done))
    rep.add(_emit("Eq15", "LT", s_ok, (1.0 - dNK) * g.xpp_norm / sK, g.beta1,
                  scale=y_norm, vacuous=done))
    rep.extend(_l3_checks(Phi, g, table))
    rep.add(_selection_check(g, state.next_selected, y_norm))
    return rep


def audit_noiseless_run(Phi, truth, result, deltas, N, probes=8, seed=0,
                        instance_id="") -> list[AuditReport]:
    """Audit every state ``0 .. iterations`` of a noiseless run."""
    return [
        audit_noiseless_iteration(Phi, truth, st, deltas, N, probes, seed, instance_id)
        for st in result.trace.states()
    ]


def audit_noisy_iteration(Phi, truth, noise, state, deltas, N, gamma,
                          instance_id="") -> AuditReport:
    """Audit one state of a run on ``y' = Phi x + noise``.

    Requires exact constants of orders ``N``, ``K``, ``NK``, ``NK+1`` and
    ``NK+K``.  Checks: ``Eq3``, ``Eq16``, ``Eq17``, ``Eq17-corrected``
    (the same bound with the noise term ``sqrt(1 + d_K) ||n|| / sqrt(K - l)``
    that the correlation over ``T - Lam`` actually admits), ``D1``,
    ``L4``, ``B1``, ``B2``, ``C1``, ``C2`` and ``SEL``.

    Raises
    ------
    GammaViolation
        If ``truth`` does not satisfy the ``gamma`` model.
    """
    truth.validate(gamma)
    Phi, r, g = _base_audit(Phi, truth, state, N)
    K = truth.K
    noise = as_vector(noise, Phi.shape[0])
    table = DeltaTable(deltas)
    table.require(N, K, N * K, N * K + 1, N * K + K)
    dN, dK, dNK, dNK1 = table[N], table[K], table[N * K], table[N * K + 1]
    clean = Phi[:, g.T] @ truth.values
    y_norm = float(np.linalg.norm(clean))
    n_norm = float(np.linalg.norm(noise))
    scale = y_norm + n_norm
    sN, sK = math.sqrt(N), math.sqrt(K)
    done = g.R.size == 0
    rep = AuditReport(state.k, instance_id=instance_id)
    tol = IDENTITY_RTOL * scale
    rep.add(compare("Eq3", g.corr[g.Lam].max() if g.Lam.size else 0.0, tol, "LE",
                    vacuous=g.Lam.size == 0))

    rep.add(compare("Eq16", g.alpha.alpha_n, math.sqrt(1.0 + dN) * (y_norm + n_norm) / sN,
                    "LT", scale=scale))

    eq17_reason = None
    if not dNK < 0.5:
        eq17_reason = f"delta_NK = {dNK:.6g} is not below 1/2"
    elif g.s > N * K:
        eq17_reason = f"|T|Lam| = {g.s} > NK"
    lead = ((1.0 - 2.0 * dNK) * (1.0 - dK) * y_norm
            / ((1.0 - dNK) ** 2 * gamma * math.sqrt(K * (1.0 + dK)))) if dNK < 1 else 0.0
    rep.add(_emit("Eq17", "LT", eq17_reason, lead - math.sqrt(1.0 + dK) / sK * n_norm,
                  g.beta1, scale=scale, vacuous=done))
    corrected = math.sqrt(1.0 + dK) / math.sqrt(K - g.l) * n_norm if not done else 0.0
    rep.add(_emit("Eq17-corrected", "LT", eq17_reason, lead - corrected, g.beta1,
                  scale=scale, vacuous=done))

    phi_R_xR = float(np.linalg.norm(Phi[:, g.R] @ g.x_R)) if g.R.size else 0.0
    x_min = float(np.abs(truth.values).min())
    k_reason = None if dK < 1.0 else f"delta_K = {dK:.6g} is not below 1"
    dKc = min(dK, 1.0)
    rep.add(_emit("D1", "LT", k_reason, math.sqrt((1.0 - dKc) * (K - g.l)) * x_min, phi_R_xR,
                  scale=y_norm, vacuous=done))
    rep.add(_emit("L4", "LT", k_reason,
                  math.sqrt((K - g.l) * (1.0 - dKc) / (K * (1.0 + dKc))) * y_norm / gamma,
                  phi_R_xR, scale=y_norm, vacuous=done))

    nk_reason, s_ok, w_ok = _order_reasons(g, N, K)
    if not dNK < 1.0:
        nk_reason = s_ok = f"delta_NK = {dNK:.6g} is not below 1"
    c = _c(dNK) if dNK < 1.0 else math.inf
    noise_a = math.sqrt(1.0 + dN) / sN * n_norm
    noise_b = math.sqrt(1.0 + dK) / sK * n_norm
    rep.add(_emit("B1", "LT", nk_reason, g.alpha.alpha_n, c * g.xR_norm / sN + noise_a, scale=scale))
    rep.add(_emit("B2", "LT", s_ok, (1.0 - c) * g.xR_norm / sK - noise_b, g.beta1,
                  scale=scale, vacuous=done))
    rep.add(_emit("C1", "LT", w_ok, g.alpha.alpha_n, dNK1 * g.xpp_norm / sN + noise_a,
                  scale=scale))
    rep.add(_emit("C2", "LT", s_ok, (1.0 - dNK) * g.xpp_norm / sK - noise_b, g.beta1,
                  scale=scale, vacuous=done))
    rep.add(_selection_check(g, state.next_selected, scale))
    return rep


def first_failure(trace, truth):
    """First iteration state ``p`` whose next step adds no index of ``T``
    while ``T`` is not yet covered, or ``None``."""
    T = truth.support
    for st in trace.states():
        if st.next_selected is None:
            return None
        if np.setdiff1d(T, st.support).size and not np.intersect1d(st.next_selected, T).size:
            return st.k
    return None


def audit_noisy_run(Phi, truth, noise, result, deltas, N, gamma,
                    instance_id="") -> list[AuditReport]:
    """Per-state noisy audits plus a run-level report (``iteration = -1``).

    The run-level report holds ``B4``, the error bound evaluated at ``p``,
    the first failed iteration (the final state if none failed), and at a
    genuine failure also ``B3`` and ``C3``, the bounds on the missed signal
    that a failed selection implies.
    """
    Phi = as_matrix(Phi)
    truth.validate(gamma)
    K = truth.K
    noise = as_vector(noise, Phi.shape[0])
    reports = [audit_noisy_iteration(Phi, truth, noise, st, deltas, N, gamma, instance_id)
               for st in result.trace.states()]
    table = DeltaTable(deltas)
    dN, dK, dNK, dNK1, dNKK = (table[o] for o in (N, K, N * K, N * K + 1, N * K + K))
    n_norm = float(np.linalg.norm(noise))
    x = truth.dense()
    err = float(np.linalg.norm(x - result.dense()))
    p = first_failure(result.trace, truth)
    at = result.trace.state(result.iterations if p is None else p)
    g = _geometry(Phi, truth, at.support, at.residual, N)
    run = AuditReport(-1, instance_id=instance_id)
    scale = float(np.linalg.norm(x)) + n_norm
    if not dNKK < 1.0:
        run.add(skipped("B4", "LT", f"delta_NK+K = {dNKK:.6g} is not below 1"))
    else:
        rhs = (math.sqrt(1.0 + dK) * g.xR_norm + 2.0 * n_norm) / math.sqrt(1.0 - dNKK)
        run.add(compare("B4", err, rhs, "LT", scale=scale, note=f"p={at.k}"))
    if p is None:
        run.add(skipped("B3", "LT", "no failed iteration"))
        run.add(skipped("C3", "LT", "no failed iteration"))
        return reports + [run]
    nk_reason, s_ok, w_ok = _order_reasons(g, N, K)
    sN, sK = math.sqrt(N), math.sqrt(K)
    den3 = sN - (sK + 2.0 * sN) * dNK
    reason = nk_reason or s_ok or (None if den3 > 0 else "delta_NK not below the order-NK threshold")
    factor = math.sqrt(N * (1.0 + dK)) + math.sqrt(K * (1.0 + dN))
    rhs3 = (1.0 - dNK) * factor / den3 * n_norm if den3 > 0 else math.inf
    run.add(_emit("B3", "LT", reason, g.xR_norm, rhs3, scale=scale, note=f"p={p}"))
    den4 = sN - (sK + sN) * dNK1
    reason = w_ok or s_ok or (None if den4 > 0 else "delta_NK+1 not below the order-NK+1 threshold")
    rhs4 = factor / den4 * n_norm if den4 > 0 else math.inf
    run.add(_emit("C3", "LT", reason, g.xpp_norm, rhs4, scale=scale, note=f"p={p}"))
    return reports + [run]


# ---------------------------------------------------------------------------
# theorem-level checks


def reconstruction_error_check(truth, result, noise_norm, constant, name="ErrorBound") -> AuditCheck:
    """``||x - x_hat|| < constant * noise_norm``."""
    err = float(np.linalg.norm(truth.dense() - result.dense()))
    return compare(name, err, constant * float(noise_norm), "LT",
                   scale=float(np.linalg.norm(truth.values)))


def snr_support_check(Phi, truth, noise, result, c_k3_value, name="T5") -> AuditCheck:
    """Above the SNR threshold the true support must be recovered.

    ``lhs`` is ``||Phi x|| / ||noise||`` and ``rhs`` the threshold; below
    the threshold the check is vacuous.
    """
    Phi = as_matrix(Phi)
    noise = as_vector(noise, Phi.shape[0])
    n_norm = float(np.linalg.norm(noise))
    if n_norm == 0.0:
        raise ZeroNoise("SNR is undefined for zero noise")
    snr = float(np.linalg.norm(Phi[:, truth.support] @ truth.values)) / n_norm
    missed = np.setdiff1d(truth.support, result.final_support).size
    above = snr > c_k3_value
    return AuditCheck(name, snr, float(c_k3_value), Relation.GT, snr - c_k3_value,
                      passed=bool(not above or missed == 0), vacuous=not above,
                      note=f"missed={missed}")


__all__ = [
    "AlphaBeta",
    "DeltaTable",
    "L0Search",
    "alpha_beta",
    "audit_deltas",
    "audit_noiseless_iteration",
    "audit_noiseless_run",
    "audit_noisy_iteration",
    "audit_noisy_run",
    "columns_independent",
    "first_failure",
    "l0_oracle",
    "l0_search",
    "reconstruction_error_check",
    "snr_support_check",
]
