"""Comparison baselines: interdependent classical percolation and DV concurrence percolation."""

import math
from math import comb
from typing import NamedTuple

import numpy as np
import pandas as pd
from annalist.annalist import Annalist

from negperc.utils import (
    DomainError,
    check_degree,
    check_unit_interval,
    find_root,
)

annalizer = Annalist()

EDGE = 1e-15
SCAN_POINTS = np.geomspace(1e-12, 1.0, 400)


class InterdependentSpec(NamedTuple):
    """M fully interdependent Bethe lattices of degree k with occupation probability p."""

    k: int
    M: int
    p: float


def _check_layers(M):
    if int(M) != M or M < 1:
        raise DomainError(f"Number of layers M must be a positive integer, got {M}")
    return int(M)


def _open_fraction(P, k):
    # 1 - (1 - P)^(k-1) without cancellation at small P
    if P >= 1.0:
        return 1.0
    return -math.expm1((k - 1) * math.log1p(-P))


def _branch_gain(P, k, M):
    return _open_fraction(P, k) ** M


def _occupation_ratio(P, k, M):
    """Probability p for which P is a fixed point, p = P / g(P)."""
    return P / _branch_gain(P, k, M)


def _log_ratio_slope(P, k, M):
    q = (1.0 - P) ** (k - 2)
    return 1.0 / P - M * (k - 1) * q / _open_fraction(P, k)


def interdependent_critical(k, M):
    """
    Threshold and jump of percolation on M interdependent Bethe lattices.

    Parameters
    ----------
    k : int
        Degree
    M : int
        Number of fully interdependent layers

    Returns
    -------
    tuple of (float, float)
        (p_th, P_plus); continuous (P_plus = 0) for a single layer
    """
    k = check_degree(k)
    M = _check_layers(M)
    if M == 1:
        return 1.0 / (k - 1), 0.0
    p_star = find_root(_log_ratio_slope, EDGE, 1.0 - EDGE, args=(k, M))
    return _occupation_ratio(p_star, k, M), p_star


def interdependent_branch(k, M, p):
    """
    Largest fixed point of P = p [1 - (1 - P)^(k-1)]^M.

    Parameters
    ----------
    k : int
        Degree
    M : int
        Number of layers
    p : float
        Occupation probability

    Returns
    -------
    float
        The branch sponge-crossing probability, 0 below threshold
    """
    k = check_degree(k)
    M = _check_layers(M)
    p = check_unit_interval(p, name="p")
    p_th, p_plus = interdependent_critical(k, M)
    if p < p_th or (M == 1 and p == p_th):
        return 0.0
    low = p_plus if M > 1 else EDGE
    return find_root(lambda P: _occupation_ratio(P, k, M) - p, low, 1.0)


def interdependent_expansion(k, M, order=1):
    """
    Truncated binomial expansion of the jump minus the exact jump.

    P+ = p_th sum_m C(M, m) (-1)^m (1 - P+)^(m(k-1)); keeping terms up to
    ``order`` leaves a residual of the next order in (1 - P+)^(k-1).

    Returns
    -------
    float
        Truncated series minus P+
    """
    p_th, p_plus = interdependent_critical(k, M)
    q = (1.0 - p_plus) ** (k - 1)
    series = sum(comb(M, m) * (-q) ** m for m in range(min(order, M) + 1))
    return p_th * series - p_plus


def interdependent_scan(k, M, ps):
    """Branch probability over p values, columns k, M, p, P."""
    ps = list(ps)
    return pd.DataFrame(
        {"k": k, "M": M, "p": ps, "P": [interdependent_branch(k, M, p) for p in ps]}
    )


def _phi_complement(c):
    # 1 - phi(c) with phi(c) = (1 + sqrt(1 - c^2)) / 2, exact for small c
    c = np.asarray(c, dtype=float)
    return c * c / (2.0 * (1.0 + np.sqrt(1.0 - c * c)))


def _concurrence_from_log_phi(log_phi):
    # phi_out = max(1/2, exp(log_phi)); c = 2 sqrt(phi (1 - phi))
    phi = np.exp(log_phi)
    complement = -np.expm1(log_phi)
    value = 2.0 * np.sqrt(phi * complement)
    return np.where(phi <= 0.5, 1.0, value)


def _parallel_copies(c, n):
    """Concurrence of n identical parallel links."""
    return _concurrence_from_log_phi(n * np.log1p(-_phi_complement(c)))


def conpt_parallel(cs):
    """
    DV concentration of parallel concurrences.

    phi(c_out) = max(1/2, prod phi(c_i)) with phi(c) = (1 + sqrt(1 - c^2)) / 2.
    """
    cs = [check_unit_interval(c, name="c") for c in cs]
    if not cs:
        raise DomainError("At least one link is required")
    log_phi = float(np.sum(np.log1p(-_phi_complement(np.array(cs)))))
    return float(_concurrence_from_log_phi(log_phi))


def conpt_series(cs):
    """DV swapping of concurrences along a chain, the product of the link values."""
    cs = [check_unit_interval(c, name="c") for c in cs]
    if not cs:
        raise DomainError("At least one link is required")
    return math.prod(cs)


def conpt_threshold(k):
    """Continuous threshold c_th = (k - 1)^(-1/2) of concurrence percolation."""
    return (check_degree(k) - 1) ** -0.5


def conpt_saturation(k):
    """
    Link concurrence above which the Bethe sponge crossing equals 1.

    Returns
    -------
    float
        c1 / c2 with phi1 = 2^(-1/k), phi2 = phi1^(k-1), c_i = 2 sqrt(phi_i (1 - phi_i))
    """
    k = check_degree(k)
    phi_1 = 2.0 ** (-1.0 / k)
    phi_2 = phi_1 ** (k - 1)
    c_1 = 2.0 * math.sqrt(phi_1 * (1.0 - phi_1))
    c_2 = 2.0 * math.sqrt(phi_2 * (1.0 - phi_2))
    return c_1 / c_2


def conpt_branch(k, c):
    """Largest solution of c1 = c * Psi_{k-1}(c1), the single-branch concurrence."""
    k = check_degree(k)
    c = check_unit_interval(c, name="c")
    if c <= conpt_threshold(k):
        return 0.0
    if c == 1.0:
        return 1.0

    def excess(x):
        return c * float(_parallel_copies(x, k - 1)) - x

    positive = np.flatnonzero(c * _parallel_copies(SCAN_POINTS, k - 1) - SCAN_POINTS > 0)
    if positive.size == 0:
        return 0.0
    top = positive[-1]
    if top == SCAN_POINTS.size - 1:
        return 1.0
    return find_root(excess, SCAN_POINTS[top], SCAN_POINTS[top + 1])


def conpt_sponge_bethe(k, c):
    """
    Sponge-crossing concurrence of the infinite Bethe lattice.

    Parameters
    ----------
    k : int
        Degree
    c : float
        Link concurrence

    Returns
    -------
    float
        C_SC; continuous at c_th = (k-1)^(-1/2) and equal to 1 from the
        saturation value up
    """
    branch = conpt_branch(k, c)
    if branch == 0.0:
        return 0.0
    return float(_parallel_copies(branch, check_degree(k)))


def conpt_scan(k, cs):
    """Sponge-crossing concurrence over c values, columns k, c, c_sc."""
    cs = list(cs)
    return pd.DataFrame({"k": k, "c": cs, "c_sc": [conpt_sponge_bethe(k, c) for c in cs]})
