"""Test the det_rules module."""

import itertools
import math

import numpy as np
import pytest
from annalist.annalist import Annalist

import negperc.det_rules as det_rules
from negperc.utils import DomainError, RuleRangeError, RuleValidityWarning

ann = Annalist()
ann.configure()


def test_series_combine():
    """Test series_combine."""
    assert det_rules.series_combine([0.9, 0.9, 0.9]) == pytest.approx(0.729)
    assert det_rules.series_combine([0.5]) == 0.5
    assert det_rules.series_combine([1.0, 0.7]) == pytest.approx(0.7)
    assert det_rules.series_combine([0.0, 0.9]) == 0.0
    assert det_rules.series_combine([0.8, 0.5], eta_s=1.2) == pytest.approx(0.48)
    with pytest.raises(RuleRangeError):
        det_rules.series_combine([0.9, 0.9], eta_s=2.0)
    with pytest.raises(DomainError):
        det_rules.series_combine([])
    with pytest.raises(DomainError):
        det_rules.series_combine([1.2])


def test_parallel_combine():
    """Test parallel_combine."""
    # chi^2 / (1 - chi^2) = 0.25 / 0.5625
    expected = 0.5 / math.sqrt(0.25 + 0.5625)
    assert det_rules.parallel_combine([0.5, 0.5]) == pytest.approx(expected)
    assert det_rules.parallel_combine([0.7]) == pytest.approx(0.7)
    assert det_rules.parallel_combine([0.3, 1.0]) == 1.0
    assert det_rules.parallel_combine([0.0, 0.0]) == 0.0
    # Never below the best link
    for chis in [[0.2, 0.9], [0.5, 0.5, 0.5], [0.99, 0.01]]:
        assert det_rules.parallel_combine(chis) >= max(chis)
    # Order does not matter
    values = [det_rules.parallel_combine(p) for p in itertools.permutations([0.2, 0.5, 0.8])]
    assert values == pytest.approx([values[0]] * len(values))


def test_parallel_combine_weak_prefactor():
    """A prefactor below one can push the result under its best input."""
    with pytest.warns(RuleValidityWarning):
        result = det_rules.parallel_combine([0.5], eta_p=0.5)
    assert result < 0.5
    with pytest.raises(DomainError):
        det_rules.parallel_combine([0.5], eta_p=0.0)


def test_optimal_parallel_order():
    """Test optimal_parallel_order and concentrate_in_order."""
    rs = [0.3, 1.0, 0.5]
    r, order = det_rules.optimal_parallel_order(rs)
    assert order == (1, 2, 0)
    assert math.sinh(r) == pytest.approx(math.sinh(1.0) * math.cosh(0.3) * math.cosh(0.5))
    for permutation in itertools.permutations(range(3)):
        assert det_rules.concentrate_in_order(rs, permutation) <= r + 1e-12
    assert det_rules.concentrate_in_order(rs, (0, 1, 2)) < r

    with pytest.raises(DomainError):
        det_rules.optimal_parallel_order([])
    with pytest.raises(DomainError):
        det_rules.optimal_parallel_order([0.0, 1.0])
    with pytest.raises(DomainError):
        det_rules.concentrate_in_order(rs, (0, 0, 1))


def test_large_squeezing_is_finite():
    """Concentration stays finite for squeezing where cosh overflows."""
    r, _ = det_rules.optimal_parallel_order([400.0, 400.0])
    assert r == pytest.approx(800.0 - math.log(2.0), rel=1e-12)


def test_rules_agree_across_domains():
    """Squeezing-domain rules give the same chi as the ratio negativity rules."""
    chis = [0.3, 0.6, 0.8]
    rs = [math.atanh(c) for c in chis]
    assert det_rules.parallel_combine_r(rs) == pytest.approx(det_rules.parallel_combine(chis))
    assert det_rules.series_combine_r(rs) == pytest.approx(det_rules.series_combine(chis))
    assert det_rules.parallel_combine_r(rs, eta_p=1.3) == pytest.approx(
        det_rules.parallel_combine(chis, eta_p=1.3)
    )


def test_rule_params():
    """Test RuleParams."""
    assert det_rules.RuleParams().is_standard
    assert not det_rules.RuleParams(eta_p=1.5).is_standard


@pytest.fixture()
def rng():
    """Seeded generator for the randomized rule checks. Do not change the seed!"""
    return np.random.default_rng(20240611)


def test_rules_agree_across_domains_random(rng):
    """Squeezing-domain and ratio negativity rules agree on random inputs."""
    for _ in range(1000):
        chis = list(rng.uniform(0.01, 0.99, size=rng.integers(1, 6)))
        rs = [math.atanh(c) for c in chis]
        eta_s = rng.uniform(0.5, 1.0)
        eta_p = rng.uniform(1.0, 2.0)
        assert det_rules.series_combine_r(rs, eta_s) == pytest.approx(
            det_rules.series_combine(chis, eta_s), rel=1e-10
        )
        assert det_rules.parallel_combine_r(rs, eta_p) == pytest.approx(
            det_rules.parallel_combine(chis, eta_p), rel=1e-10
        )


def test_largest_link_first_is_never_beaten(rng):
    """No concentration order beats putting the largest squeezing in the sinh slot."""
    for _ in range(200):
        rs = list(rng.uniform(0.05, 3.0, size=rng.integers(1, 6)))
        best, order = det_rules.optimal_parallel_order(rs)
        assert rs[order[0]] == max(rs)
        for permutation in itertools.permutations(range(len(rs))):
            assert det_rules.concentrate_in_order(rs, permutation) <= best * (1 + 1e-12)


def test_rule_bounds_random(rng):
    """Series never exceeds its weakest link and parallel never falls below its best."""
    for _ in range(500):
        chis = list(rng.uniform(0.0, 0.999, size=rng.integers(1, 6)))
        assert det_rules.series_combine(chis) <= min(chis) + 1e-15
        assert det_rules.parallel_combine(chis) >= max(chis) - 1e-15
        eta_p = rng.uniform(1.0, 2.0)
        assert det_rules.parallel_combine(chis, eta_p) >= max(chis) - 1e-15


def test_rules_are_monotone_random(rng):
    """Raising any single link never lowers either combined value."""
    for _ in range(300):
        chis = list(rng.uniform(0.0, 0.99, size=rng.integers(1, 6)))
        series = det_rules.series_combine(chis)
        parallel = det_rules.parallel_combine(chis)
        for i in range(len(chis)):
            raised = list(chis)
            raised[i] = min(chis[i] + rng.uniform(0.0, 0.1), 0.999)
            assert det_rules.series_combine(raised) >= series - 1e-15
            assert det_rules.parallel_combine(raised) >= parallel - 1e-15
