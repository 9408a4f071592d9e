from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from gomp_lab import kernels
from gomp_lab.errors import DomainError, EnumerationTooLarge
from gomp_lab.harness.generators import gen_gaussian, gen_near_orthonormal
from gomp_lab.harness.rng import make_rng
from gomp_lab.rip import (
    RipMethod,
    exact_rip,
    modified_rip_margins,
    monte_carlo_rip,
    rip_profile,
    sample_supports,
)

BACKENDS = sorted(kernels.BACKENDS)


def brute_delta(Phi, order):
    # singular values of every column subset, independent of the kernels
    worst = 0.0
    for S in itertools.combinations(range(Phi.shape[1]), order):
        sv = np.linalg.svd(Phi[:, S], compute_uv=False)
        worst = max(worst, sv[0] ** 2 - 1.0, 1.0 - sv[-1] ** 2)
    return worst


def coherence(Phi):
    G = np.abs(Phi.T @ Phi)
    np.fill_diagonal(G, 0.0)
    return G.max()


@pytest.mark.parametrize("backend", BACKENDS)
class TestExactRip:
    def test_orthonormal(self, backend):
        Q, _ = np.linalg.qr(make_rng(1, "q").standard_normal((8, 8)))
        for k in (1, 3, 5):
            assert exact_rip(Q, k, backend=backend).delta <= 1e-12

    def test_duplicate_columns(self, backend):
        Phi = gen_gaussian(6, 5, 3)
        Phi = np.column_stack([Phi, Phi[:, 2]])
        assert exact_rip(Phi, 2, backend=backend).delta == pytest.approx(1.0, abs=1e-12)

    def test_order2_is_coherence(self, backend):
        Phi = gen_gaussian(8, 12, 4)
        est = exact_rip(Phi, 2, backend=backend)
        assert est.supports_evaluated == 66
        assert est.method is RipMethod.EXACT
        assert est.delta == pytest.approx(coherence(Phi), abs=1e-12)
        assert est.delta == pytest.approx(brute_delta(Phi, 2), abs=1e-12)

    @pytest.mark.parametrize("order", [1, 3, 4])
    def test_matches_svd_oracle(self, backend, order):
        Phi = gen_gaussian(7, 10, 10 + order)
        assert exact_rip(Phi, order, backend=backend).delta == pytest.approx(
            brute_delta(Phi, order), abs=1e-12)

    def test_worst_support_realizes_delta(self, backend):
        Phi = gen_gaussian(8, 12, 5)
        est = exact_rip(Phi, 3, backend=backend)
        sv = np.linalg.svd(Phi[:, list(est.worst_support)], compute_uv=False)
        assert max(sv[0] ** 2 - 1.0, 1.0 - sv[-1] ** 2) == pytest.approx(est.delta, abs=1e-12)

    def test_cap(self, backend):
        with pytest.raises(EnumerationTooLarge):
            exact_rip(gen_gaussian(8, 30, 0), 5, cap=1000, backend=backend)


def test_order_validation():
    Phi = gen_gaussian(4, 6, 0)
    for bad in (0, 5, 2.5):
        with pytest.raises(ValueError):
            exact_rip(Phi, bad)


def test_monotone_and_interlacing():
    for seed in range(5):
        Phi = gen_gaussian(8, 11, 40 + seed)
        prof = rip_profile(Phi, range(1, 6))
        d = [prof[k].delta for k in range(1, 6)]
        assert all(a <= b + 1e-12 for a, b in zip(d, d[1:]))
        # maximum over supports of size <= 3 equals the size-3 constant
        at_most = max(brute_delta(Phi, k) for k in (1, 2, 3))
        assert at_most == pytest.approx(d[2], abs=1e-12)


def test_definition_consistency():
    Phi = gen_gaussian(6, 8, 7)
    delta = exact_rip(Phi, 3).delta
    rng = make_rng(7, "q")
    for S in itertools.combinations(range(8), 3):
        q = rng.standard_normal((100, 3))
        e = np.sum((q @ Phi[:, S].T) ** 2, axis=1)
        n2 = np.sum(q * q, axis=1)
        assert np.all((1 - delta) * n2 <= e * (1 + 1e-12))
        assert np.all(e <= (1 + delta) * n2 * (1 + 1e-12))


class TestMonteCarlo:
    def test_never_exceeds_exact(self):
        for seed in range(5):
            Phi = gen_gaussian(16, 20, seed)
            ex = exact_rip(Phi, 4).delta
            mc = monte_carlo_rip(Phi, 4, 5000, seed=seed)
            assert mc.method is RipMethod.MONTE_CARLO and mc.seed == seed
            assert mc.delta <= ex + 1e-12

    def test_exhaustive_sampling_recovers_exact(self):
        Phi = gen_gaussian(5, 6, 2)
        mc = monte_carlo_rip(Phi, 2, 2000, seed=3)
        assert mc.delta == pytest.approx(exact_rip(Phi, 2).delta, abs=1e-15)

    def test_orthonormal(self):
        for seed in range(3):
            assert monte_carlo_rip(np.eye(7), 3, 50, seed).delta <= 1e-12

    def test_reproducible(self):
        Phi = gen_gaussian(10, 20, 1)
        a, b = monte_carlo_rip(Phi, 3, 300, 9), monte_carlo_rip(Phi, 3, 300, 9)
        assert a == b

    def test_supports_are_valid(self):
        s = sample_supports(10, 4, 200, seed=1)
        assert s.shape == (200, 4)
        assert np.all(np.diff(s, axis=1) > 0) and s.min() >= 0 and s.max() < 10

    def test_bad_trials(self):
        with pytest.raises(ValueError):
            monte_carlo_rip(np.eye(3), 1, 0, 0)


class TestModifiedRip:
    def test_empty_i1(self):
        Phi = gen_near_orthonormal(12, 12, 0.2, 3)
        u = np.zeros(12)
        u[[3, 5]] = [1.0, -2.0]
        checks = modified_rip_margins(Phi, [], [3, 5], u)
        by = {c.name: c for c in checks}
        assert all(c.passed for c in checks)
        assert by["L3-upper-phi"].margin == pytest.approx(0.0, abs=1e-12)
        assert by["A2"].vacuous

    def test_orthonormal_collapse(self):
        u = np.zeros(6)
        u[[2, 4]] = [1.0, 3.0]
        checks = modified_rip_margins(np.eye(6), [0, 1], [2, 4], u)
        for c in checks:
            assert c.passed
            if c.name != "A2":
                assert abs(c.margin) <= 1e-9

    def test_seeded_margins_positive(self):
        # no 12 x 16 unit-column matrix tried reaches delta_4 < 1/2, so the
        # instance is square
        rng = make_rng(12, "u")
        Phi = gen_near_orthonormal(16, 16, 0.3, 12)
        delta = exact_rip(Phi, 4)
        assert delta.delta < 0.5
        for trial in range(20):
            I = rng.permutation(16)[:4]
            u = np.zeros(16)
            u[I[2:]] = rng.standard_normal(2)
            checks = modified_rip_margins(Phi, I[:2], I[2:], u, delta=delta)
            assert all(c.passed and c.margin > 0 for c in checks)

    def test_preconditions(self):
        u = np.zeros(4)
        u[1] = 1.0
        with pytest.raises(ValueError):
            modified_rip_margins(np.eye(4), [1], [1], u)
        with pytest.raises(ValueError):
            modified_rip_margins(np.eye(4), [0], [2], u)
        dup = np.column_stack([np.eye(3), np.eye(3)[:, 0]])
        v = np.zeros(4)
        v[3] = 1.0
        with pytest.raises(DomainError):
            modified_rip_margins(dup, [0], [3], v)


@pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="extension not built")
class TestBackendEquivalence:
    @pytest.mark.parametrize("seed", range(6))
    def test_enumerate(self, seed):
        Phi = gen_gaussian(9, 13, seed)
        gram = np.ascontiguousarray(Phi.T @ Phi)
        for order in (1, 2, 3, 5):
            a = kernels.get("compiled").enumerate_extremes(gram, order)
            b = kernels.get("python").enumerate_extremes(gram, order)
            assert a[0] == pytest.approx(b[0], abs=1e-12)
            assert a[1] == pytest.approx(b[1], abs=1e-12)
            assert a[4] == b[4] == math.comb(13, order)

    def test_sampled(self):
        Phi = gen_gaussian(12, 24, 1)
        gram = np.ascontiguousarray(Phi.T @ Phi)
        sup = sample_supports(24, 4, 3000, seed=2)
        a = kernels.get("compiled").sampled_extremes(gram, sup)
        b = kernels.get("python").sampled_extremes(gram, sup)
        assert a[0] == pytest.approx(b[0], abs=1e-12) and a[1] == pytest.approx(b[1], abs=1e-12)
        assert a[2] == b[2] and a[3] == b[3]

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.get("fortran")
