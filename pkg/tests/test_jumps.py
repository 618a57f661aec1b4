"""Jump-functional tests: frozen closed-form values, dual-path agreement,
derivative and Monte Carlo oracles, dominance and sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

import pikappa as pk
from pikappa.jumps import utility_jump_curve

BETA28 = pk.JumpLaw(lam=1.0, law=pk.BetaJumps(alpha=2.0, beta=8.0))


def quad_psi_oracle(alpha, beta, kappa, eta):
    """Plain-QUADPACK oracle for E[Y/(1-kY)^eta], independent of the library
    quadrature configuration."""
    c = np.exp(special.gammaln(alpha + beta) - special.gammaln(alpha)
               - special.gammaln(beta))
    f = lambda y: c * y ** alpha * (1 - y) ** (beta - 1) * (1 - kappa * y) ** (-eta)
    v, _ = integrate.quad(f, 0, 1, epsabs=1e-13, epsrel=1e-12, limit=300)
    return v


class TestPsi:
    def test_kappa_zero_is_mean(self):
        # 2F1(.; 0) = 1, so psi(0, eta) = E[Y] for any eta
        for eta in (0.5, 1.0, 2.0, 7.0):
            assert pk.psi(BETA28, 0.0, eta) == pytest.approx(0.2, abs=1e-14)

    def test_kappa_one_gamma_formula(self):
        # alpha Gamma(a+b) Gamma(b-eta) / (Gamma(b) Gamma(a+b+1-eta)) at
        # Beta(2,8), eta=2: 2*9!*5!/(7!*8!) = 3/7, checked by hand
        assert pk.psi(BETA28, 1.0, 2.0) == pytest.approx(3.0 / 7.0, abs=1e-12)

    def test_kappa_one_diverges_at_eta_ge_beta(self):
        with pytest.raises(pk.DomainError):
            pk.psi(BETA28, 1.0, 8.0)
        with pytest.raises(pk.DomainError):
            pk.psi(BETA28, 1.0, 9.5)

    def test_series_matches_quadrature_at_half(self):
        val = pk.psi(BETA28, 0.5, 2.0)
        orc = quad_psi_oracle(2.0, 8.0, 0.5, 2.0)
        assert val == pytest.approx(orc, abs=1e-10)

    def test_dual_path_randomized_grid(self):
        # spec tolerance: |series - quadrature| <= 1e-8 (1 + |psi|)
        rng = np.random.default_rng(20240801)
        for _ in range(1000):
            a = rng.uniform(0.5, 20.0)
            b = rng.uniform(0.5, 20.0)
            kappa = rng.uniform(0.0, 0.999)
            eta = rng.uniform(1e-3, b - 0.01)
            law = pk.JumpLaw(lam=1.0, law=pk.BetaJumps(alpha=a, beta=b))
            s = pk.psi(law, kappa, eta)
            q = pk.psi_quadrature(law, kappa, eta)
            assert abs(s - q) <= 1e-8 * (1.0 + abs(s))

    def test_discrete_exact_sum(self):
        law = pk.JumpLaw(lam=1.0, law=pk.DiscreteJumps(points=[0.3, 0.6],
                                                       weights=[0.25, 0.75]))
        expect = 0.25 * 0.3 / 0.85 ** 2 + 0.75 * 0.6 / 0.7 ** 2
        assert pk.psi(law, 0.5, 2.0) == pytest.approx(expect, abs=1e-15)

    def test_near_one_quadrature_branch(self):
        # kappa above the series switch point exercises the QAWS fallback
        val = pk.psi(BETA28, 1.0 - 5e-7, 3.0)
        orc = quad_psi_oracle(2.0, 8.0, 1.0 - 5e-7, 3.0)
        assert val == pytest.approx(orc, rel=1e-8)

    @given(k1=st.floats(0.0, 0.99), k2=st.floats(0.0, 0.99),
           e1=st.floats(0.1, 7.5), e2=st.floats(0.1, 7.5))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_kappa_and_eta(self, k1, k2, e1, e2):
        # y (1 - k y)^(-eta) increases in both k and eta
        lo_k, hi_k = sorted((k1, k2))
        lo_e, hi_e = sorted((e1, e2))
        assert pk.psi(BETA28, hi_k, lo_e) >= pk.psi(BETA28, lo_k, lo_e) - 1e-12
        assert pk.psi(BETA28, lo_k, hi_e) >= pk.psi(BETA28, lo_k, lo_e) - 1e-12

    def test_out_of_range_kappa(self):
        with pytest.raises(pk.DomainError):
            pk.psi(BETA28, -0.1, 2.0)
        with pytest.raises(pk.DomainError):
            pk.psi(BETA28, 1.1, 2.0)


class TestPsiDkappa:
    def test_kappa_zero_second_moment(self):
        # E[Y^2] = a(a+1)/((a+b)(a+b+1)) = 6/110
        assert pk.psi_dkappa(BETA28, 0.0, 3.0) == pytest.approx(6.0 / 110.0,
                                                                abs=1e-14)

    def test_single_atom(self):
        law = pk.JumpLaw(lam=1.0, law=pk.DiscreteJumps(points=[0.3],
                                                       weights=[1.0]))
        assert pk.psi_dkappa(law, 0.5, 1.0) == pytest.approx(0.09 / 0.85 ** 2,
                                                             abs=1e-15)

    def test_finite_difference_oracle(self):
        # eta * psi_dkappa = d(psi)/d(kappa), central differences
        h = 1e-6
        for kappa in (0.1, 0.4, 0.75):
            for eta in (0.7, 2.0, 4.5):
                fd = (pk.psi(BETA28, kappa + h, eta)
                      - pk.psi(BETA28, kappa - h, eta)) / (2 * h)
                assert eta * pk.psi_dkappa(BETA28, kappa, eta) == \
                    pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_derivative_consistency_grid(self):
        rng = np.random.default_rng(7)
        h = 1e-6
        for _ in range(50):
            a = rng.uniform(1.0, 12.0)
            b = rng.uniform(2.0, 12.0)
            law = pk.JumpLaw(lam=1.0, law=pk.BetaJumps(alpha=a, beta=b))
            kappa = rng.uniform(0.05, 0.9)
            eta = rng.uniform(0.2, b - 0.5)
            fd = (pk.psi(law, kappa + h, eta) - pk.psi(law, kappa - h, eta)) / (2 * h)
            assert eta * pk.psi_dkappa(law, kappa, eta) == \
                pytest.approx(fd, rel=2e-5, abs=1e-6)

    def test_kappa_one_divergence_guard(self):
        with pytest.raises(pk.DomainError):
            pk.psi_dkappa(BETA28, 1.0, 7.5)   # 1 + eta >= beta


class TestUtilityJumpTerm:
    def test_kappa_zero(self):
        # U_eta(1) = 1/(1-eta)
        assert pk.utility_jump_term(BETA28, 0.0, 2.0) == pytest.approx(-1.0, abs=1e-12)
        assert pk.utility_jump_term(BETA28, 0.0, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_single_atom_log(self):
        law = pk.JumpLaw(lam=1.0, law=pk.DiscreteJumps(points=[0.5],
                                                       weights=[1.0]))
        assert pk.utility_jump_term(law, 1.0, 1.0) == pytest.approx(
            np.log(0.5), abs=1e-15)

    def test_log_full_retention_digamma(self):
        # E[ln(1-Y)] for Beta(a,b) = digamma(b) - digamma(a+b)
        expect = special.digamma(8.0) - special.digamma(10.0)
        assert pk.utility_jump_term(BETA28, 1.0, 1.0) == pytest.approx(
            expect, abs=1e-10)

    def test_monte_carlo_oracle(self):
        # spec example: Beta(2,8), kappa=0.7, eta=3 within 4 SE of 1e6 draws
        y = pk.sample_jumps(BETA28, 1_000_000, seed=3)
        u = (1 - 0.7 * y) ** (-2.0) / (-2.0)
        mc, se = u.mean(), u.std(ddof=1) / 1000.0
        val = pk.utility_jump_term(BETA28, 0.7, 3.0)
        assert abs(val - mc) <= 4 * se

    def test_series_curve_matches_quadrature(self):
        kappas = np.linspace(0.0, 1.0, 23)
        for eta in (0.5, 1.0, 2.0, 4.0):
            curve = utility_jump_curve(BETA28, kappas, eta)
            direct = [pk.utility_jump_term(BETA28, float(k), eta)
                      for k in kappas]
            np.testing.assert_allclose(curve, direct, rtol=1e-9, atol=1e-10)

    def test_divergence_guard(self):
        with pytest.raises(pk.DomainError):
            pk.utility_jump_term(BETA28, 1.0, 9.0)


class TestFosd:
    def test_beta_12_8_dominates_2_8(self):
        hi = pk.JumpLaw(lam=1.0, law=pk.BetaJumps(alpha=12.0, beta=8.0))
        assert pk.fosd_compare(hi, BETA28) is pk.Ordering.DOMINATES
        assert pk.fosd_compare(BETA28, hi) is pk.Ordering.DOMINATED_BY

    def test_self_incomparable(self):
        assert pk.fosd_compare(BETA28, BETA28) is pk.Ordering.INCOMPARABLE

    def test_shifted_atom(self):
        lo = pk.JumpLaw(lam=1.0, law=pk.DiscreteJumps(points=[0.2], weights=[1.0]))
        hi = pk.JumpLaw(lam=1.0, law=pk.DiscreteJumps(points=[0.6], weights=[1.0]))
        assert pk.fosd_compare(lo, hi) is pk.Ordering.DOMINATED_BY

    def test_fosd_transfers_to_psi(self):
        hi = pk.JumpLaw(lam=1.0, law=pk.BetaJumps(alpha=12.0, beta=8.0))
        for kappa in (0.0, 0.3, 0.8):
            for eta in (0.5, 2.0, 5.0):
                assert pk.psi(hi, kappa, eta) >= pk.psi(BETA28, kappa, eta) - 1e-12


class TestSampling:
    def test_empty(self):
        assert pk.sample_jumps(BETA28, 0, seed=1).shape == (0,)

    def test_moment_check(self):
        y = pk.sample_jumps(BETA28, 1_000_000, seed=1)
        sd = np.sqrt(0.2 * 0.8 / 11.0)
        assert abs(y.mean() - 0.2) <= 4 * sd / 1000.0

    def test_deterministic(self):
        a = pk.sample_jumps(BETA28, 1000, seed=42)
        b = pk.sample_jumps(BETA28, 1000, seed=42)
        np.testing.assert_array_equal(a, b)

    def test_support(self):
        y = pk.sample_jumps(BETA28, 10_000, seed=5)
        assert np.all((y > 0) & (y < 1))
        law = pk.JumpLaw(lam=1.0, law=pk.DiscreteJumps(points=[0.2, 0.6],
                                                       weights=[0.5, 0.5]))
        y = pk.sample_jumps(law, 1000, seed=5)
        assert set(np.unique(y)) <= {0.2, 0.6}


class TestCache:
    def test_memo_agrees_with_fresh(self):
        cache = pk.JumpFunctionals(BETA28)
        for kappa in (0.0, 0.3, 0.999, 1.0):
            for eta in (0.5, 2.0):
                v1 = cache.psi(kappa, eta)
                v2 = cache.psi(kappa, eta)
                assert v1 == v2
                assert abs(v1 - pk.psi(BETA28, kappa, eta)) <= 1e-12

    def test_moments(self):
        cache = pk.JumpFunctionals(BETA28)
        assert cache.mean == pytest.approx(0.2)
        assert cache.second_moment == pytest.approx(6.0 / 110.0)


class TestUtilityCurveSlowTail:
    def test_kappa_near_one_eta_near_beta(self):
        # the vectorized series outlasts its term cap here; the quadrature
        # fallback must kick in per entry
        kappas = np.array([0.5, 0.999, 1.0 - 2.5e-6, 1.0 - 1e-7, 1.0])
        for eta in (7.9, 7.5, 1.0):
            curve = utility_jump_curve(BETA28, kappas, eta)
            direct = [pk.utility_jump_term(BETA28, float(k), eta)
                      for k in kappas]
            np.testing.assert_allclose(curve, direct, rtol=1e-9, atol=1e-9)
