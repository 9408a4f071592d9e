"""Restricted isometry constants: exhaustive, sampled, and the modified
constants of a matrix orthogonalized against a column subset.

For a support ``I`` the tight isometry constant is
``max(lam_max(G_I) - 1, 1 - lam_min(G_I))`` with ``G_I`` the Gram matrix
of ``Phi[:, I]``; the order-``k`` constant is its maximum over all
supports of size exactly ``k``.  Eigenvalue interlacing of principal
submatrices makes that equal to the maximum over supports of size at
most ``k``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from gomp_lab import kernels
from gomp_lab.checks import Relation, compare
from gomp_lab.errors import DomainError, EnumerationTooLarge
from gomp_lab.linalg import as_index_set, as_matrix, as_vector, orthogonalize_against

ENUMERATION_CAP = 2_000_000


class RipMethod(str, enum.Enum):
    EXACT = "Exact"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class RipEstimate:
    order: int
    delta: float
    method: RipMethod
    supports_evaluated: int
    seed: int | None = None
    lambda_min: float = math.nan
    lambda_max: float = math.nan
    worst_support: tuple[int, ...] = ()

    @property
    def exact(self) -> bool:
        return self.method is RipMethod.EXACT


def _estimate(order, lo, hi, lo_sup, hi_sup, count, method, seed=None):
    dev_lo, dev_hi = 1.0 - lo, hi - 1.0
    delta = max(dev_lo, dev_hi, 0.0)
    return RipEstimate(
        order=order,
        delta=float(delta),
        method=method,
        supports_evaluated=int(count),
        seed=seed,
        lambda_min=float(lo),
        lambda_max=float(hi),
        worst_support=lo_sup if dev_lo >= dev_hi else hi_sup,
    )


def _check_order(Phi, order):
    m, n = Phi.shape
    if int(order) != order or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    if order > m or order > n:
        raise ValueError(f"order {order} exceeds min(m, n) = {min(m, n)}")
    return int(order)


def exact_rip(Phi, order, cap=ENUMERATION_CAP, backend=None) -> RipEstimate:
    """Exact order-``order`` RIP constant by enumerating every support.

    Raises
    ------
    EnumerationTooLarge
        If ``binomial(n, order)`` exceeds ``cap``.
    """
    Phi = as_matrix(Phi)
    order = _check_order(Phi, order)
    total = math.comb(Phi.shape[1], order)
    if total > cap:
        raise EnumerationTooLarge(
            f"binomial({Phi.shape[1]}, {order}) = {total} supports exceeds cap {cap}; "
            "use monte_carlo_rip"
        )
    gram = np.ascontiguousarray(Phi.T @ Phi)
    lo, hi, lo_sup, hi_sup, count = kernels.get(backend).enumerate_extremes(gram, order)
    return _estimate(order, lo, hi, lo_sup, hi_sup, count, RipMethod.EXACT)


def sample_supports(n, order, trials, seed) -> np.ndarray:
    """``trials`` uniformly random size-``order`` subsets of ``range(n)``,
    one sorted row each, from a Philox stream keyed by ``seed``."""
    from gomp_lab.harness.rng import make_rng

    rng = make_rng(seed, "rip")
    keys = rng.random((trials, n))
    return np.ascontiguousarray(np.sort(np.argsort(keys, axis=1)[:, :order], axis=1))


def monte_carlo_rip(Phi, order, trials, seed, backend=None) -> RipEstimate:
    """Lower estimate of the RIP constant from randomly sampled supports."""
    Phi = as_matrix(Phi)
    order = _check_order(Phi, order)
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")
    supports = sample_supports(Phi.shape[1], order, int(trials), seed)
    gram = np.ascontiguousarray(Phi.T @ Phi)
    lo, hi, lo_sup, hi_sup, count = kernels.get(backend).sampled_extremes(gram, supports)
    return _estimate(order, lo, hi, lo_sup, hi_sup, count, RipMethod.MONTE_CARLO, seed)


def rip_profile(Phi, orders, cap=ENUMERATION_CAP, backend=None) -> dict[int, RipEstimate]:
    """Exact constants for each distinct order in ``orders``."""
    return {k: exact_rip(Phi, k, cap, backend) for k in sorted(set(int(o) for o in orders))}


def modified_rip_margins(Phi, I1, I2, u, delta=None):
    """Evaluate the near-isometry sandwich for ``A = P_perp(I1) Phi``.

    With ``d`` the exact RIP constant of order ``|I1| + |I2|`` and
    ``c = d / (1 - d)``, a vector ``u`` supported on ``I2`` must satisfy::

        (1 - c)   ||u||^2    <= ||A u||^2 <= (1 + d) ||u||^2
        (1 - c^2) ||Phi u||^2 <= ||A u||^2 <= ||Phi u||^2

    and the cosine between ``Phi u`` and ``span(Phi[:, I1])`` is at most
    ``c``.  Returns the five checks ``L3-lower``, ``L3-upper``,
    ``L3-lower-phi``, ``L3-upper-phi`` and ``A2``.

    ``delta`` may be passed to reuse a previously computed exact
    constant; it is computed by enumeration otherwise.
    """
    Phi = as_matrix(Phi)
    n = Phi.shape[1]
    I1 = as_index_set(I1, n)
    I2 = as_index_set(I2, n)
    u = as_vector(u, n)
    if np.intersect1d(I1, I2).size:
        raise ValueError("I1 and I2 must be disjoint")
    off = np.setdiff1d(np.arange(n), I2)
    if np.any(u[off] != 0.0):
        raise ValueError("u must be supported on I2")
    order = I1.size + I2.size
    if delta is None:
        delta = exact_rip(Phi, order).delta
    elif isinstance(delta, RipEstimate):
        if delta.order != order or not delta.exact:
            raise ValueError(f"need an exact order-{order} estimate, got {delta}")
        delta = delta.delta
    if not 0.0 <= delta < 0.5:
        raise DomainError(f"modified RIP needs delta_{order} < 1/2, got {delta:.6g}")
    c = delta / (1.0 - delta)

    A = orthogonalize_against(Phi, I1)
    phi_u = Phi @ u
    u2 = float(u @ u)
    au2 = float(np.sum((A @ u) ** 2))
    phiu2 = float(phi_u @ phi_u)
    proj = float(np.linalg.norm(phi_u - A @ u))
    cosine = proj / math.sqrt(phiu2) if phiu2 > 0 else 0.0
    return [
        compare("L3-lower", (1.0 - c) * u2, au2, Relation.LT),
        compare("L3-upper", au2, (1.0 + delta) * u2, Relation.LT),
        compare("L3-lower-phi", (1.0 - c * c) * phiu2, au2, Relation.LT),
        compare("L3-upper-phi", au2, phiu2, Relation.LE),
        compare("A2", cosine, c, Relation.LE, vacuous=I1.size == 0 or phiu2 == 0.0),
    ]
