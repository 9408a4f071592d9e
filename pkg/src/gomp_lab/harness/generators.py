"""Instance generators: sensing matrices, sparse signals and noise."""

from __future__ import annotations

import enum

import numpy as np

from gomp_lab.errors import DomainError, GompLabError
from gomp_lab.harness.rng import make_rng
from gomp_lab.signal import SparseSignal


class Ensemble(str, enum.Enum):
    GAUSSIAN_UNIT_COLUMNS = "GaussianUnitColumns"
    PERTURBED_IDENTITY = "PerturbedIdentity"
    SPREAD_IDENTITY = "SpreadIdentity"
    NEAR_ORTHONORMAL = "NearOrthonormal"
    FROM_FILE = "FromFile"


class SignalDistribution(str, enum.Enum):
    RADEMACHER = "RademacherPM1"
    GAUSSIAN = "GaussianNonzero"
    GAMMA = "GammaConstrained"


def _unit_columns(A):
    return A / np.linalg.norm(A, axis=0)


def gen_gaussian(m, n, seed, unit_columns=True) -> np.ndarray:
    """i.i.d. standard normal ``m x n`` matrix, optionally column-normalized."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    A = make_rng(seed, "gaussian").standard_normal((m, n))
    return _unit_columns(A) if unit_columns else A


def gen_perturbed_identity(m, extra, epsilon, seed) -> np.ndarray:
    """``[I_m | v_0 ... v_{extra-1}]`` with ``v_j ∝ e_j + epsilon * g_j``.

    Each extra column is a normalized copy of a distinct basis vector plus
    seeded Gaussian noise, so its coherence with ``e_j`` stays close to one
    for ``epsilon < 0.5``.
    """
    if not 0.0 <= epsilon < 0.5:
        raise ValueError(f"epsilon must lie in [0, 0.5), got {epsilon}")
    if not 0 <= extra <= m:
        raise ValueError(f"extra must lie in [0, m], got {extra}")
    rng = make_rng(seed, "perturbed-identity")
    cols = np.zeros((m, extra))
    for j in range(extra):
        cols[j, j] = 1.0
        cols[:, j] += epsilon * rng.standard_normal(m)
    return np.hstack([np.eye(m), _unit_columns(cols)]) if extra else np.eye(m)


def gen_spread_identity(m, extra, epsilon, seed) -> np.ndarray:
    """``[I_m | w_0 ... w_{extra-1}]`` with flat, mutually incoherent extras.

    ``w_j ∝ (s * h_j + epsilon * g_j) / sqrt(m)`` where ``s`` is a random
    sign vector, ``h_0`` is all ones and ``h_j`` (``j >= 1``) are random
    balanced sign patterns, so w_0 is exactly orthogonal to the others
    when ``epsilon = 0`` and every entry has magnitude ``1/sqrt(m)``.
    This keeps the order-``k`` constant near ``sqrt(k-1)/sqrt(m)`` instead
    of near one.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if not 0 <= extra <= m:
        raise ValueError(f"extra must lie in [0, m], got {extra}")
    if extra == 0:
        return np.eye(m)
    rng = make_rng(seed, "spread-identity")
    s = rng.choice([-1.0, 1.0], size=m)
    cols = np.empty((m, extra))
    for j in range(extra):
        h = np.ones(m)
        if j:
            h[rng.permutation(m)[: m // 2]] = -1.0
        cols[:, j] = (s * h + epsilon * rng.standard_normal(m)) / np.sqrt(m)
    return np.hstack([np.eye(m), _unit_columns(cols)])


def gen_near_orthonormal(m, n, epsilon, seed) -> np.ndarray:
    """Unit-column ``m x n`` matrix (``n <= m``) within ``O(epsilon)`` of
    having orthonormal columns: a random orthonormal frame plus
    ``epsilon / sqrt(m)``-scaled Gaussian noise."""
    if n > m:
        raise ValueError("NearOrthonormal needs n <= m")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    rng = make_rng(seed, "near-orthonormal")
    Q, R = np.linalg.qr(rng.standard_normal((m, n)))
    Q = Q * np.sign(np.diag(R))
    return _unit_columns(Q + epsilon * rng.standard_normal((m, n)) / np.sqrt(m))


def gen_matrix(ensemble, m, n, seed, epsilon=0.0, path=None) -> np.ndarray:
    ensemble = Ensemble(ensemble)
    if ensemble is Ensemble.GAUSSIAN_UNIT_COLUMNS:
        return gen_gaussian(m, n, seed)
    if ensemble is Ensemble.PERTURBED_IDENTITY:
        return gen_perturbed_identity(m, n - m, epsilon, seed)
    if ensemble is Ensemble.SPREAD_IDENTITY:
        return gen_spread_identity(m, n - m, epsilon, seed)
    if ensemble is Ensemble.NEAR_ORTHONORMAL:
        return gen_near_orthonormal(m, n, epsilon, seed)
    from gomp_lab.harness.matrix_io import read_matrix

    if path is None:
        raise ValueError("FromFile ensemble needs a matrix path")
    return read_matrix(path)


class CertificationFailed(GompLabError, RuntimeError):
    """No seed within the retry budget produced a matrix below the bound."""


def certified_instance(factory, order, bound, seed, max_attempts=20, backend=None):
    """Draw ``factory(seed + t)`` for ``t = 0, 1, ...`` until the exact
    order-``order`` constant is strictly below ``bound``.

    Returns ``(matrix, estimate, seed_used)``.
    """
    from gomp_lab.rip import exact_rip

    best = None
    for t in range(max_attempts):
        Phi = factory(seed + t)
        est = exact_rip(Phi, order, backend=backend)
        if est.delta < bound:
            return Phi, est, seed + t
        best = est.delta if best is None else min(best, est.delta)
    raise CertificationFailed(
        f"no seed in [{seed}, {seed + max_attempts}) gave delta_{order} < {bound:.6g}; "
        f"smallest found {best:.6g}"
    )


def gen_sparse_signal(n, K, distribution="RademacherPM1", gamma=2.0, seed=0) -> SparseSignal:
    """Uniformly random size-``K`` support with values from ``distribution``.

    ``GammaConstrained`` puts one entry at magnitude 1 and draws the rest
    uniformly from ``[1/gamma + eta, 1]`` with ``eta = 1e-6``, so every
    magnitude strictly exceeds the largest divided by ``gamma``.
    """
    distribution = SignalDistribution(distribution)
    if not 1 <= K <= n:
        raise ValueError(f"K must lie in [1, n], got K={K}, n={n}")
    rng = make_rng(seed, "signal")
    support = np.sort(rng.permutation(n)[:K])
    signs = rng.choice([-1.0, 1.0], size=K)
    if distribution is SignalDistribution.RADEMACHER:
        values = signs
    elif distribution is SignalDistribution.GAUSSIAN:
        values = rng.standard_normal(K)
        while np.any(values == 0.0):
            values[values == 0.0] = rng.standard_normal(int(np.sum(values == 0.0)))
    else:
        if not gamma > 1.0:
            raise DomainError(f"GammaConstrained needs gamma > 1, got {gamma}")
        lo = min(1.0 / gamma + 1e-6, 1.0)
        mags = rng.uniform(lo, 1.0, size=K)
        mags[rng.integers(K)] = 1.0
        values = signs * mags
    return SparseSignal(n, support, values)


def gen_noise(m, seed, *, norm=None, sigma=None, snr=None, clean_norm=None) -> np.ndarray:
    """Isotropic Gaussian noise scaled by exactly one of the keywords.

    ``norm`` fixes ``||n||_2``; ``sigma`` is the per-entry standard
    deviation; ``snr`` fixes ``clean_norm / ||n||_2``.
    """
    given = [v is not None for v in (norm, sigma, snr)]
    if sum(given) != 1:
        raise ValueError("pass exactly one of norm, sigma, snr")
    g = make_rng(seed, "noise").standard_normal(m)
    if sigma is not None:
        return sigma * g
    if snr is not None:
        if clean_norm is None or not snr > 0:
            raise ValueError("snr scaling needs a positive snr and clean_norm")
        norm = clean_norm / snr
    return g * (norm / np.linalg.norm(g))
