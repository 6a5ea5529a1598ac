"""Unit Tests for K₀, the capture constant and the closed-form bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from smoosh.analysis.constants import (
    bessel_k0,
    bessel_k0_quadrature,
    bound_report,
    capture_chain_bound,
    chebyshev_c1,
    frak_p,
    lattice_mixing_bound,
    mixing_bound,
    resolvent_bound_check,
    resolvent_rate,
    simulate_zeta_abstract,
    zeta_moments,
    zeta_variance,
)
from smoosh.core.errors import ParameterError


# ===== K0 =====

class TestBesselK0:
    """Test the K₀ evaluator"""

    def test_reference_value(self):
        """Test K₀(1) to full precision"""
        assert bessel_k0(1.0) == pytest.approx(0.42102443824070834, rel=1e-12)

    @pytest.mark.parametrize("z", [0.01, 0.1, 1.0, 1.99, 2.01, 7.5, 30.0, 49.9, 50.1, 120.0])
    def test_matches_quadrature(self, z):
        """Test each evaluation branch against the quadrature oracle"""
        assert bessel_k0(z) == pytest.approx(bessel_k0_quadrature(z), rel=1e-10)

    def test_small_argument_log(self):
        """Test K₀(z) ~ -log(z/2) - γ as z -> 0"""
        z = 1e-6
        assert bessel_k0(z) == pytest.approx(-math.log(z / 2) - 0.5772156649015329, rel=1e-9)

    def test_array_input(self):
        """Test vectorised evaluation"""
        values = bessel_k0(np.array([0.5, 1.0, 5.0]))
        assert values.shape == (3,)
        assert values[1] == pytest.approx(0.42102443824070834, rel=1e-12)

    @given(st.floats(min_value=1e-3, max_value=60.0), st.floats(min_value=1e-3, max_value=60.0))
    def test_decreasing(self, a, b):
        """Test that K₀ is decreasing"""
        lo, hi = sorted((a, b))
        assert bessel_k0(lo) >= bessel_k0(hi) * (1 - 1e-12)

    def test_non_positive_rejected(self):
        """Test z <= 0"""
        with pytest.raises(ParameterError):
            bessel_k0(0.0)
        with pytest.raises(ParameterError):
            bessel_k0_quadrature(-1.0)


# ===== Capture constant and bounds =====

class TestFrakP:
    """Test the pair-capture constant 𝔭"""

    def test_reference_point(self):
        """Test 𝔭 at δ = 0.3, p = σ² = 1/2"""
        value = frak_p(0.3, 0.5, 0.5)
        assert 1.82e-7 <= value <= 1.94e-7
        assert value == pytest.approx(1.885e-7, rel=0.01)

    def test_larger_palm(self):
        """Test 𝔭 at δ = 0.6"""
        assert frak_p(0.6, 0.5, 0.5) == pytest.approx(2.1e-5, rel=0.05)

    def test_increasing_in_delta(self):
        """Test that a bigger palm captures more often"""
        values = [frak_p(d, 0.5, 0.5) for d in (0.1, 0.2, 0.3, 0.5, 1.0)]
        assert values == sorted(values)

    def test_chain_bound_is_pi_times(self):
        """Test the unsimplified chain end equals π·𝔭"""
        assert capture_chain_bound(0.3, 0.5, 0.5) == pytest.approx(math.pi * frak_p(0.3, 0.5, 0.5), rel=1e-12)

    def test_resolvent_rate(self):
        """Test c = 1/(2σ²p(1-p)πδ²)"""
        assert resolvent_rate(0.5, 0.5, 0.5) == pytest.approx(16 / math.pi)

    @pytest.mark.parametrize("args", [(0.0, 0.5, 0.5), (0.3, 1.0, 0.5), (0.3, 0.0, 0.5), (0.3, 0.5, 0.0)])
    def test_domain(self, args):
        """Test parameters outside the model domain"""
        with pytest.raises(ParameterError):
            frak_p(*args)


class TestMixingBounds:
    """Test the mixing-time bounds"""

    def test_standard_deck(self):
        """Test m/𝔭 for a 52-card deck"""
        assert mixing_bound(52, 0.3, 0.5, 0.5) == pytest.approx(2.77e8, rel=0.03)

    def test_c1_term(self):
        """Test the c₁√m correction"""
        base = mixing_bound(16, 0.3, 0.5, 0.5)
        assert mixing_bound(16, 0.3, 0.5, 0.5, c1=10.0) == pytest.approx(base + 40.0)

    def test_single_card_rejected(self):
        """Test m < 2"""
        with pytest.raises(ParameterError):
            mixing_bound(1, 0.3, 0.5, 0.5)

    def test_lattice(self):
        """Test N³m/p"""
        assert lattice_mixing_bound(8, 3, 0.5) == 3072.0
        assert lattice_mixing_bound(8, 3, 0.5, C=2.0) == 6144.0
        with pytest.raises(ParameterError):
            lattice_mixing_bound(1, 3, 0.5)


# ===== Stage duration =====

class TestZeta:
    """Test the moments and sampler of ζ*"""

    def test_moments(self):
        """Test mean 1/𝔭 and the MGF bound at 𝔭 = 0.3, α = 0.1"""
        moments = zeta_moments(0.3, 0.1)
        assert moments.mean == pytest.approx(1 / 0.3)
        assert moments.mgf_bound == pytest.approx(5.544, abs=1e-3)

    def test_bound_dominates_true_mgf(self):
        """Test the bound exceeds the simulated MGF 𝔭/(𝔭-α) = 1.5"""
        samples = simulate_zeta_abstract(0.3, np.random.default_rng(2), size=200_000)
        empirical = float(np.mean(np.exp(0.1 * samples)))
        assert empirical == pytest.approx(1.5, abs=0.02)
        assert empirical < zeta_moments(0.3, 0.1).mgf_bound

    @pytest.mark.parametrize("args", [(0.0, 0.0), (1.0, 0.0), (0.3, 0.3), (0.3, -0.1)])
    def test_moment_domain(self, args):
        """Test α outside [0, 𝔭) and 𝔭 outside (0, 1)"""
        with pytest.raises(ParameterError):
            zeta_moments(*args)

    def test_sampler_is_exponential(self):
        """Test the geometric sum of exponentials is Exp(𝔭)"""
        samples = simulate_zeta_abstract(0.2, np.random.default_rng(3), size=20_000)
        assert stats.kstest(samples, 'expon', args=(0, 5.0)).pvalue > 1e-3

    def test_variance(self):
        """Test b² = 1/𝔭² for the sampler"""
        samples = simulate_zeta_abstract(0.5, np.random.default_rng(4), size=100_000)
        assert zeta_variance(samples) == pytest.approx(4.0, rel=0.05)
        with pytest.raises(ParameterError):
            zeta_variance([1.0])

    def test_chebyshev(self):
        """Test c₁ = b/√ε"""
        assert chebyshev_c1(4.0, 0.25) == 4.0
        with pytest.raises(ParameterError):
            chebyshev_c1(4.0, 1.0)


# ===== Report =====

class TestBoundReport:
    """Test bound_report"""

    def test_fields(self):
        """Test the report carries consistent values"""
        report = bound_report(0.3, 0.5, 0.5).to_dict()
        assert report['frak_p'] == pytest.approx(frak_p(0.3, 0.5, 0.5))
        assert report['q'] == pytest.approx(1 - report['frak_p'])
        assert report['alpha'] == pytest.approx(report['frak_p'] / 2)
        assert report['m'] == 52

    def test_rescaled_table(self):
        """Test δ = 0.5 on a 5x5 table equals δ = 0.1 on the unit table"""
        report = bound_report(0.5, 0.5, 0.5, table_side=5.0)
        assert report.delta == pytest.approx(0.1)
        assert report.frak_p == pytest.approx(frak_p(0.1, 0.5, 0.5))

    def test_bad_side(self):
        """Test a non-positive table side"""
        with pytest.raises(ParameterError):
            bound_report(0.3, 0.5, 0.5, table_side=0.0)


@pytest.mark.slow
class TestResolventCheck:
    """Test the closed-form lower bound on the resolvent integral"""

    @pytest.mark.parametrize("delta", [0.2, 0.3, 0.5])
    def test_bound_holds(self, delta):
        """Test lhs >= rhs up to the quadrature error"""
        check = resolvent_bound_check(delta, 0.5, 0.5)
        assert check.lhs + check.lhs_error >= check.rhs
