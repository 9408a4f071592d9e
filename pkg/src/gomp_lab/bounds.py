"""Closed-form recovery thresholds, noise constants and certificates.

Threshold helpers return the largest admissible RIP constant for a
``(N, K)`` pair; the ``c_k*`` functions return error and SNR
amplification constants.  Certificates combine either with measured
:class:`~gomp_lab.rip.RipEstimate` values.  Every comparison is strict:
a measured constant equal to a threshold does not certify.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from gomp_lab.errors import DomainError, MissingOrder, VacuousBound

# threshold of the earlier order-NK guarantee, kept for comparisons
def prior_nk_bound(N, K) -> float:
    _check_nk(N, K)
    return math.sqrt(N) / (math.sqrt(K) + 3.0 * math.sqrt(N))


class Theorem(str, enum.Enum):
    T1 = "T1"  # exact recovery, order NK
    T2 = "T2"  # exact recovery, order NK + 1
    T3 = "T3"  # noisy error bound, order-NK hypothesis
    T4 = "T4"  # noisy error bound, order-(NK+1) hypothesis
    T5 = "T5"  # support recovery above an SNR threshold


def _check_nk(N, K):
    for name, v in (("N", N), ("K", K)):
        if int(v) != v or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v}")


def _check_deltas(**deltas):
    for name, d in deltas.items():
        if not (0.0 <= d < 1.0):
            raise DomainError(f"{name} must lie in [0, 1), got {d}")


def theorem1_bound(N, K) -> float:
    """``sqrt(N) / (sqrt(K) + 2 sqrt(N))``: the order-``NK`` threshold."""
    _check_nk(N, K)
    return math.sqrt(N) / (math.sqrt(K) + 2.0 * math.sqrt(N))


def theorem2_bound(N, K) -> float:
    """``sqrt(N) / (sqrt(K) + sqrt(N))``: the order-``NK+1`` threshold."""
    _check_nk(N, K)
    return math.sqrt(N) / (math.sqrt(K) + math.sqrt(N))


def _tail(delta_NKK):
    return 2.0 / math.sqrt(1.0 - delta_NKK)


def c_k1(delta_NK, delta_K, delta_N, delta_NKK, N, K) -> float:
    """Error amplification constant under the order-``NK`` hypothesis::

        (1 - d_NK) (sqrt(N) (1 + d_K) + sqrt(K (1 + d_N)(1 + d_K)))
        ----------------------------------------------------------  +  2 / sqrt(1 - d_NKK)
          (sqrt(N) - (sqrt(K) + 2 sqrt(N)) d_NK) sqrt(1 - d_NKK)
    """
    _check_nk(N, K)
    _check_deltas(delta_NK=delta_NK, delta_K=delta_K, delta_N=delta_N, delta_NKK=delta_NKK)
    den = math.sqrt(N) - (math.sqrt(K) + 2.0 * math.sqrt(N)) * delta_NK
    if den <= 0.0:
        raise DomainError(
            f"delta_NK = {delta_NK:.6g} is not below {theorem1_bound(N, K):.6g}; constant undefined"
        )
    num = (1.0 - delta_NK) * (
        math.sqrt(N) * (1.0 + delta_K) + math.sqrt(K * (1.0 + delta_N) * (1.0 + delta_K))
    )
    return num / (den * math.sqrt(1.0 - delta_NKK)) + _tail(delta_NKK)


def c_k1_appendix(delta_NK, delta_K, delta_N, delta_NKK, N, K) -> float:
    """Variant of :func:`c_k1` whose numerator factor is
    ``sqrt(N (1 + d_K)) + sqrt(K (1 + d_N))``, the bound on the missed
    signal energy at the first failed iteration, without the extra
    ``sqrt(1 + d_K)`` that converts it into an error bound."""
    _check_nk(N, K)
    _check_deltas(delta_NK=delta_NK, delta_K=delta_K, delta_N=delta_N, delta_NKK=delta_NKK)
    den = math.sqrt(N) - (math.sqrt(K) + 2.0 * math.sqrt(N)) * delta_NK
    if den <= 0.0:
        raise DomainError(
            f"delta_NK = {delta_NK:.6g} is not below {theorem1_bound(N, K):.6g}; constant undefined"
        )
    num = (1.0 - delta_NK) * (math.sqrt(N * (1.0 + delta_K)) + math.sqrt(K * (1.0 + delta_N)))
    return num / (den * math.sqrt(1.0 - delta_NKK)) + _tail(delta_NKK)


def c_k2(delta_NK1, delta_K, delta_N, delta_NKK, N, K) -> float:
    """Error amplification constant under the order-``(NK+1)`` hypothesis::

        sqrt(N) (1 + d_K) + sqrt(K (1 + d_N)(1 + d_K))
        -----------------------------------------------  +  2 / sqrt(1 - d_NKK)
        (sqrt(N) - (sqrt(K) + sqrt(N)) d_NK1) sqrt(1 - d_NKK)
    """
    _check_nk(N, K)
    _check_deltas(delta_NK1=delta_NK1, delta_K=delta_K, delta_N=delta_N, delta_NKK=delta_NKK)
    den = math.sqrt(N) - (math.sqrt(K) + math.sqrt(N)) * delta_NK1
    if den <= 0.0:
        raise DomainError(
            f"delta_NK1 = {delta_NK1:.6g} is not below {theorem2_bound(N, K):.6g}; constant undefined"
        )
    num = math.sqrt(N) * (1.0 + delta_K) + math.sqrt(K * (1.0 + delta_N) * (1.0 + delta_K))
    return num / (den * math.sqrt(1.0 - delta_NKK)) + _tail(delta_NKK)


def c_k3_denominator(delta_NK, delta_K, delta_N, gamma, N, K) -> float:
    """Denominator of :func:`c_k3`; non-positive means the SNR bound is vacuous."""
    _check_nk(N, K)
    _check_deltas(delta_NK=delta_NK, delta_K=delta_K, delta_N=delta_N)
    if not gamma >= 1.0:
        raise DomainError(f"gamma must be at least 1, got {gamma}")
    if not delta_NK < 0.5:
        raise DomainError(f"delta_NK must be below 1/2, got {delta_NK}")
    lead = (
        math.sqrt(N) * (1.0 - delta_K) * (1.0 - 2.0 * delta_NK)
        / (gamma * math.sqrt(1.0 + delta_K) * (1.0 - delta_NK) ** 2)
    )
    return lead - math.sqrt(K * (1.0 + delta_N))


def c_k3(delta_NK, delta_K, delta_N, gamma, N, K) -> float:
    """SNR threshold ``||y|| / ||n||`` above which the support is recovered::

                 sqrt(K (1 + d_N)) + sqrt(N (1 + d_K))
        --------------------------------------------------------------------
        sqrt(N)(1 - d_K)(1 - 2 d_NK) / (gamma sqrt(1 + d_K) (1 - d_NK)^2) - sqrt(K (1 + d_N))

    Raises
    ------
    DomainError
        For deltas outside ``[0, 1)``, ``delta_NK >= 1/2`` or ``gamma < 1``.
    VacuousBound
        When the inputs are valid but the denominator is not positive.
    """
    den = c_k3_denominator(delta_NK, delta_K, delta_N, gamma, N, K)
    if den <= 0.0:
        raise VacuousBound(
            f"SNR bound is vacuous for N={N}, K={K}, gamma={gamma}: denominator {den:.6g} <= 0"
        )
    return (math.sqrt(K * (1.0 + delta_N)) + math.sqrt(N * (1.0 + delta_K))) / den


@dataclass(frozen=True)
class GammaModel:
    """Dynamic-range assumption: every nonzero magnitude exceeds the
    largest magnitude divided by ``gamma``."""

    gamma: float

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise DomainError(f"gamma must be at least 1, got {self.gamma}")

    def admits(self, signal) -> bool:
        return signal.satisfies_gamma(self.gamma)

    def check(self, signal):
        signal.validate(self.gamma)
        return signal


@dataclass(frozen=True)
class BoundReport:
    theorem: Theorem
    required_delta_order: int
    bound_value: float
    measured_delta: float | None = None
    satisfied: bool | None = None
    constant: float | None = None
    method: str | None = None
    note: str = ""


def _by_order(rips):
    """Best estimate per order: an exact one if present, else the largest
    sampled value (the tightest available lower bound)."""
    if isinstance(rips, dict):
        rips = list(rips.values())
    best = {}
    for est in rips:
        cur = best.get(est.order)
        if cur is None:
            best[est.order] = est
        elif est.exact and not cur.exact:
            best[est.order] = est
        elif est.exact == cur.exact and est.delta > cur.delta:
            best[est.order] = est
    return best


def _verdict(est, bound):
    if est.exact:
        return est.delta < bound
    # a sampled constant only bounds the true one from below
    return False if est.delta >= bound else None


def recovery_certificate(rips, N, K) -> list[BoundReport]:
    """Check the exact-recovery thresholds against measured constants.

    ``rips`` is an iterable (or order-keyed dict) of RIP estimates.  One
    report is returned per threshold whose order (``NK`` or ``NK+1``) is
    available.  Exact estimates give a definite ``satisfied`` flag;
    sampled ones can only refute, and leave ``satisfied`` as ``None``
    when they fall below the threshold.

    Raises
    ------
    MissingOrder
        If neither order is present.
    """
    _check_nk(N, K)
    table = _by_order(rips)
    out = []
    for theorem, order, bound in (
        (Theorem.T1, N * K, theorem1_bound(N, K)),
        (Theorem.T2, N * K + 1, theorem2_bound(N, K)),
    ):
        est = table.get(order)
        if est is None:
            continue
        out.append(BoundReport(theorem, order, bound, est.delta, _verdict(est, bound),
                               method=est.method.value))
    if not out:
        raise MissingOrder(f"need a RIP estimate of order {N * K} or {N * K + 1}")
    return out


def _need(table, order, theorem):
    est = table.get(order)
    if est is None:
        raise MissingOrder(f"{theorem.value} needs a RIP estimate of order {order}")
    return est


def noise_certificate(rips, N, K, gamma=None) -> list[BoundReport]:
    """Reports for the noisy error bounds and, when ``gamma`` is given, the
    SNR threshold.

    Requires estimates of orders ``N``, ``K``, ``NK``, ``NK+1`` and
    ``NK+K`` (``NK+1`` only for T4; T4 is omitted if it is absent).  The
    ``constant`` field holds ``C_K1``, ``C_K2`` or ``C_K3`` whenever the
    measured constants put it in its domain.  For T5 ``bound_value`` is
    ``1/2`` (the order-``NK`` ceiling) and the report is unsatisfied with
    a note when the threshold is vacuous.
    """
    _check_nk(N, K)
    table = _by_order(rips)
    dN = _need(table, N, Theorem.T3)
    dK = _need(table, K, Theorem.T3)
    dNK = _need(table, N * K, Theorem.T3)
    dNKK = _need(table, N * K + K, Theorem.T3)
    aux_exact = dN.exact and dK.exact and dNKK.exact
    out = []

    def report(theorem, est, bound, fn):
        verdict = _verdict(est, bound)
        if verdict is not False:
            verdict_nkk = _verdict(dNKK, 1.0)
            if verdict_nkk is False:
                verdict = False
            elif verdict is True and not aux_exact:
                verdict = None
        constant = None
        note = ""
        try:
            if est.delta < bound and dNKK.delta < 1.0:
                constant = fn(est.delta, dK.delta, dN.delta, dNKK.delta, N, K)
        except DomainError as exc:
            note = str(exc)
        method = "Exact" if est.exact and aux_exact else "MonteCarlo"
        out.append(BoundReport(theorem, est.order, bound, est.delta, verdict, constant, method, note))

    report(Theorem.T3, dNK, theorem1_bound(N, K), c_k1)
    if N * K + 1 in table:
        report(Theorem.T4, table[N * K + 1], theorem2_bound(N, K), c_k2)
    if gamma is not None:
        constant, note = None, ""
        try:
            constant = c_k3(dNK.delta, dK.delta, dN.delta, gamma, N, K)
            satisfied = True if (dNK.exact and dN.exact and dK.exact) else None
        except VacuousBound as exc:
            satisfied, note = False, str(exc)
        except DomainError as exc:
            satisfied, note = False, str(exc)
        if satisfied and not dNK.delta < 0.5:
            satisfied = False
        out.append(BoundReport(Theorem.T5, N * K, 0.5, dNK.delta, satisfied, constant,
                               "Exact" if dNK.exact else "MonteCarlo", note))
    return out
