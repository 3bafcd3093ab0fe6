"""Test the bethe module."""

import math
import warnings

import numpy as np
import pytest
from annalist.annalist import Annalist

import negperc.bethe as bethe
from negperc.utils import DomainError, RuleValidityWarning

ann = Annalist()
ann.configure()

CHI_TH_3 = math.sqrt(3.0) / 2.0


def test_critical_point():
    """Threshold and jumps for k = 3 and k = 4."""
    point = bethe.critical_point(3)
    assert point.chi_th == pytest.approx(CHI_TH_3, abs=1e-9)
    assert point.x_plus == pytest.approx(math.sqrt(0.8), abs=1e-9)
    assert point.x1_plus == pytest.approx(math.sqrt(0.5), abs=1e-9)
    assert bethe.critical_point(4).chi_th == pytest.approx(0.78429, abs=1e-5)
    # The threshold falls with the degree
    thresholds = [bethe.critical_point(k).chi_th for k in range(3, 8)]
    assert all(np.diff(thresholds) < 0)
    with pytest.raises(DomainError):
        bethe.critical_point(2)


def test_infinite_sponge_jump():
    """X_SC jumps from zero to x_plus at the threshold."""
    assert bethe.infinite_sponge(3, CHI_TH_3) >= math.sqrt(0.8) - 1e-6
    assert bethe.infinite_sponge(3, CHI_TH_3 - 1e-9) == 0.0
    assert bethe.infinite_sponge(3, 0.85) == 0.0
    assert bethe.infinite_sponge(3, 0.0) == 0.0
    assert bethe.infinite_sponge(3, 1.0) == pytest.approx(1.0)


def test_infinite_sponge_monotone():
    """X_SC increases from the jump to one above the threshold."""
    chis = np.linspace(CHI_TH_3, 1.0, 200)
    values = [bethe.infinite_sponge(3, c) for c in chis]
    assert np.all(np.diff(values) >= -1e-12)
    assert values[-1] == pytest.approx(1.0)


def test_nonphysical_branch():
    """The smaller root lies below the physical one and vanishes below threshold."""
    chi = CHI_TH_3 + 1e-3
    physical = bethe.infinite_sponge(3, chi)
    other = bethe.infinite_sponge(3, chi, nonphysical=True)
    assert other < physical
    assert bethe.infinite_sponge(3, 0.8, nonphysical=True) == 0.0
    assert bethe.infinite_sponge(3, 0.99, nonphysical=True) < bethe.infinite_sponge(3, 0.99)


def test_complement_and_single_branch():
    """Test infinite_sponge_complement and single_branch_sponge."""
    for chi in [0.87, 0.9, 0.99]:
        assert bethe.infinite_sponge_complement(3, chi) == pytest.approx(
            1.0 - bethe.infinite_sponge(3, chi), rel=1e-9
        )
    assert bethe.infinite_sponge_complement(3, 0.5) == 1.0
    # Near saturation the complement keeps relative precision
    tiny = bethe.infinite_sponge_complement(3, 1.0 - 1e-7)
    assert 0.0 < tiny < 1e-18
    assert bethe.single_branch_sponge(3, CHI_TH_3) == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert bethe.single_branch_sponge(3, 0.5) == 0.0


def test_finite_depth_sponge():
    """Finite trees approach the infinite lattice from above."""
    assert bethe.finite_depth_sponge(3, 1, 0.5) == pytest.approx(
        0.5 / math.sqrt(0.25 + 0.75**3)
    )
    chis = np.array([0.5, 0.9])
    values = bethe.finite_depth_sponge(3, 10, chis)
    assert isinstance(values, np.ndarray)
    assert values.shape == (2,)
    depths = [1, 5, 20, 100]
    profile = [bethe.finite_depth_sponge(3, l, 0.86) for l in depths]
    assert np.all(np.diff(profile) < 0)
    assert bethe.finite_depth_sponge(3, 2000, 0.95) == pytest.approx(
        bethe.infinite_sponge(3, 0.95), rel=1e-9
    )
    with pytest.raises(DomainError):
        bethe.finite_depth_sponge(3, 0, 0.5)
    with pytest.raises(DomainError):
        bethe.finite_depth_sponge(3, 2.5, 0.5)
    with pytest.raises(DomainError):
        bethe.finite_depth_sponge(3, 4, [0.5, 1.2])


def test_correlation_length():
    """Depth of the crossing below threshold."""
    near = bethe.correlation_length(3, CHI_TH_3 - 1e-4)
    far = bethe.correlation_length(3, CHI_TH_3 - 1e-2)
    assert near > far > 1.0
    # The plateau sits near the jump before the drop
    assert bethe.finite_depth_sponge(3, int(near / 2), CHI_TH_3 - 1e-4) > 0.8
    with pytest.raises(DomainError, match="not below"):
        bethe.correlation_length(3, 0.9)
    with pytest.raises(DomainError, match="Crossing"):
        bethe.correlation_length(3, 0.8, crossing=0.95)


def test_finite_size_threshold():
    """chi_th(l) lies below chi_th and rises with l."""
    thresholds = [bethe.finite_size_threshold(3, l) for l in [8, 16, 32]]
    assert all(t < CHI_TH_3 for t in thresholds)
    assert np.all(np.diff(thresholds) > 0)
    with pytest.raises(DomainError):
        bethe.finite_size_threshold(3, 1)


def test_fit_power_law():
    """Test fit_power_law on exact data."""
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    fit = bethe.fit_power_law(xs, 3.0 * xs**-1.5)
    assert fit.exponent == pytest.approx(-1.5)
    assert fit.amplitude == pytest.approx(3.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.to_dict()["window"] == [1.0, 8.0]
    with pytest.raises(DomainError):
        bethe.fit_power_law([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(DomainError):
        bethe.fit_power_law([1.0, 2.0, 3.0, 4.0], [1.0, -2.0, 3.0, 4.0])


def test_beta_exponent():
    """X_SC - x_plus grows with exponent one half."""
    fit = bethe.beta_exponent(3)
    assert 0.48 <= fit.exponent <= 0.52
    assert fit.r_squared > 0.999


def test_saturation_exponent():
    """1 - X_SC vanishes as (1 - chi)^k."""
    assert bethe.saturation_exponent(3).exponent == pytest.approx(3.0, abs=0.05)


@pytest.mark.slow()
def test_correlation_exponent():
    """The crossing depth diverges with exponent near -0.508."""
    fit = bethe.correlation_exponent(3)
    assert 0.45 <= -fit.exponent <= 0.56


@pytest.mark.slow()
def test_shift_exponent():
    """The finite-size shift decays as l^-2."""
    fit = bethe.shift_exponent(3)
    assert 1.9 <= -fit.exponent <= 2.1


def test_scans():
    """Test sponge_scan, correlation_scan and finite_size_scan."""
    scan = bethe.sponge_scan(3, [0.5, 0.9, 1.0])
    assert list(scan.columns) == ["k", "chi", "depth", "x_sc"]
    assert scan["x_sc"].iloc[0] == 0.0
    assert scan["depth"].iloc[0] == math.inf
    finite = bethe.sponge_scan(3, [0.5, 0.9], depth=10)
    assert finite["x_sc"].to_numpy() == pytest.approx(
        bethe.finite_depth_sponge(3, 10, np.array([0.5, 0.9]))
    )
    correlation = bethe.correlation_scan(3, [0.8, 0.85])
    assert list(correlation.columns) == ["k", "chi", "depth"]
    assert correlation["depth"].iloc[1] > correlation["depth"].iloc[0]
    shift = bethe.finite_size_scan(3, [8, 9])
    assert list(shift.columns) == ["k", "depth", "chi_th"]


def test_generalized_phase_classify():
    """Phase regimes of the generalized rules for k = 3."""
    mixed = bethe.generalized_phase_classify(3, 1.0, 0.9)
    assert mixed.kind == bethe.MIXED_ORDER
    assert mixed.x_plus > 0.0
    second = bethe.generalized_phase_classify(3, 1.0, 1.5)
    assert second.kind == bethe.SECOND_ORDER
    assert second.chi_th == pytest.approx(2.0 / 3.0)
    assert second.x_plus == 0.0
    assert bethe.generalized_phase_classify(3, 1.0, math.sqrt(2.0)).exponent == 0.25
    none = bethe.generalized_phase_classify(3, 0.5, 1.5)
    assert none.kind == bethe.NO_TRANSITION
    assert none.chi_th >= 1.0
    standard = bethe.generalized_phase_classify(3, 1.0, 1.0)
    assert standard.chi_th == pytest.approx(CHI_TH_3)
    assert standard.x_plus == pytest.approx(math.sqrt(0.8))


def test_generalized_infinite_sponge():
    """Second-order curves vanish continuously, mixed-order curves jump."""
    assert bethe.generalized_infinite_sponge(3, 2.0 / 3.0 - 1e-6, 1.0, 1.5) == 0.0
    assert bethe.generalized_infinite_sponge(3, 2.0 / 3.0 + 1e-6, 1.0, 1.5) < 0.01
    mixed = bethe.generalized_phase_classify(3, 1.0, 0.9)
    jump = bethe.generalized_infinite_sponge(3, mixed.chi_th, 1.0, 0.9)
    assert jump == pytest.approx(mixed.x_plus, rel=1e-6)
    assert bethe.generalized_infinite_sponge(3, mixed.chi_th - 1e-9, 1.0, 0.9) == 0.0
    assert bethe.generalized_infinite_sponge(3, 0.7, 1.0, 1.0) == bethe.infinite_sponge(3, 0.7)


def test_generalized_second_order_threshold_off_unit_series():
    """The continuous branch opens at 1 / (eta_s eta_p) when eta_s is not one."""
    second = bethe.generalized_phase_classify(3, 0.9, 1.8)
    assert second.kind == bethe.SECOND_ORDER
    assert second.chi_th == pytest.approx(1.0 / 1.62, abs=1e-12)
    assert second.chi_th == pytest.approx(0.61728, abs=1e-5)
    assert bethe.generalized_phase_classify(3, 0.7, 1.8).kind == bethe.SECOND_ORDER
    assert bethe.generalized_phase_classify(3, 0.5, 1.8).kind == bethe.NO_TRANSITION

    below = second.chi_th - 1e-6
    above = second.chi_th + 1e-6
    assert bethe.generalized_infinite_sponge(3, below, 0.9, 1.8) == 0.0
    assert 0.0 < bethe.generalized_infinite_sponge(3, above, 0.9, 1.8) < 0.01


def test_generalized_threshold_matches_recursion():
    """Deep finite-depth recursion agrees with the classified threshold."""
    # 0.6 lies below 1 / 1.62 and 0.65 lies above it
    assert bethe.generalized_finite_depth_sponge(3, 3000, 0.6, 0.9, 1.8) < 1e-10
    deep = bethe.generalized_finite_depth_sponge(3, 3000, 0.65, 0.9, 1.8)
    infinite = bethe.generalized_infinite_sponge(3, 0.65, 0.9, 1.8)
    assert infinite > 0.1
    assert deep == pytest.approx(infinite, rel=1e-6)


def test_generalized_saturation_warns():
    """A series prefactor above one saturates the lattice."""
    with pytest.warns(RuleValidityWarning):
        assert bethe.generalized_infinite_sponge(3, 0.95, 1.1, 1.0) == pytest.approx(1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bethe.generalized_infinite_sponge(3, 0.9, 1.0, 1.2)


def test_expansion():
    """The jump expansion converges to the exact value."""
    assert bethe.expansion_coefficient(3) == pytest.approx(-0.5)
    residuals = [abs(bethe.expansion_residual(3, order)) for order in range(6)]
    assert np.all(np.diff(residuals) < 0)
    assert bethe.expansion_residual(3, 60) == pytest.approx(0.0, abs=1e-12)


def test_generalized_finite_depth_sponge():
    """The generalized recursion with unit prefactors is the standard one."""
    chis = np.linspace(0.5, 1.0, 11)
    standard = bethe.finite_depth_sponge(3, 20, chis)
    np.testing.assert_allclose(bethe.generalized_finite_depth_sponge(3, 20, chis), standard)
    assert bethe.turning_deficit(3) == pytest.approx(0.5)
    scaled = bethe.generalized_finite_depth_sponge(3, 20, 0.9, eta_s=0.9)
    assert scaled < bethe.finite_depth_sponge(3, 20, 0.9)
    with pytest.raises(DomainError):
        bethe.generalized_finite_depth_sponge(3, 0, 0.9)
