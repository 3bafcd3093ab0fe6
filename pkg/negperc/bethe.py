"""Negativity percolation on the Bethe lattice: sponge crossing, criticality and fits."""

import math
import warnings
from typing import NamedTuple

import numpy as np
import pandas as pd
from annalist.annalist import Annalist

from negperc.utils import (
    ConvergenceError,
    DiscretizationWarning,
    DomainError,
    RuleValidityWarning,
    check_degree,
    check_positive,
    check_unit_interval,
    find_root,
    log_spaced_window,
)

annalizer = Annalist()

NO_TRANSITION = "NoTransition"
SECOND_ORDER = "SecondOrder"
MIXED_ORDER = "MixedOrder"

DEPTH_CAP = 1_000_000
SECOND_DERIVATIVE_STEP = 1e-4
RICHARDSON_STEP = 5e-5
RICHARDSON_TOLERANCE = 1e-3

BETA_WINDOW = (1e-6, 1e-3)
CORRELATION_WINDOW = (1e-5, 1e-2)
SATURATION_WINDOW = (1e-5, 1e-2)
SHIFT_DEPTHS = tuple(range(8, 65))

EMPTY_SCAN = pd.DataFrame(columns=["k", "chi", "depth", "x_sc"])


class BetheSpec(NamedTuple):
    """Bethe lattice of degree k, truncated at depth (math.inf for the full lattice)."""

    k: int
    depth: float = math.inf


class CriticalPoint(NamedTuple):
    """Threshold and jump of the standard NegPT transition."""

    chi_th: float
    x_plus: float
    x1_plus: float


class PhaseDiagnosis(NamedTuple):
    """Kind of transition, with its threshold, jump and order-parameter exponent."""

    kind: str
    chi_th: float | None = None
    x_plus: float | None = None
    exponent: float | None = None


class PowerLawFit(NamedTuple):
    """Least-squares power law y = amplitude * x**exponent."""

    exponent: float
    amplitude: float
    r_squared: float
    window: tuple

    def to_dict(self):
        """JSON-ready record."""
        return {
            "exponent": self.exponent,
            "amplitude": self.amplitude,
            "r2": self.r_squared,
            "window": list(self.window),
        }


def turning_deficit(k, eta_p=1.0):
    """Deficit F = [eta_p^2/(k-1)]^(1/(k-2)) where the branch equation turns over."""
    return (eta_p * eta_p / (k - 1)) ** (1.0 / (k - 2))


def _threshold(k, eta_s, eta_p):
    """Formal threshold and the upper end of the physical deficit branch."""
    f = turning_deficit(k, eta_p)
    if f < 1.0:
        chi_th = math.sqrt(1.0 - f * (k - 2) / (k - 1)) / eta_s
        return chi_th, f
    return 1.0 / (eta_s * eta_p), 1.0


def _branch_equation(w, k, eta_p_sq):
    return eta_p_sq * w - w ** (k - 1)


def _solve_deficit(k, chi, eta_s, eta_p, nonphysical=False):
    """
    Solve eta_p^2 w - w^(k-1) = eta_p^2 (1 - eta_s^2 chi^2) for the deficit w = 1 - u.

    Returns None below threshold, and 0.0 (saturation) when eta_s chi > 1.
    """
    chi_th, w_max = _threshold(k, eta_s, eta_p)
    if chi < chi_th:
        return None
    eta_p_sq = eta_p * eta_p
    scaled = eta_s * chi
    rhs = eta_p_sq * (1.0 - scaled) * (1.0 + scaled)
    if rhs < 0.0:
        warnings.warn(
            f"eta_s * chi = {scaled} exceeds 1, sponge crossing saturates",
            category=RuleValidityWarning,
            stacklevel=3,
        )
        return 0.0
    if nonphysical:
        g_one = _branch_equation(1.0, k, eta_p_sq)
        if w_max >= 1.0 or rhs < g_one:
            return math.nan
        rhs = min(rhs, _branch_equation(w_max, k, eta_p_sq))
        return find_root(
            lambda w: _branch_equation(w, k, eta_p_sq) - rhs, w_max, 1.0, xtol=1e-18
        )
    rhs = min(rhs, _branch_equation(w_max, k, eta_p_sq))
    if rhs == 0.0:
        return 0.0
    return find_root(
        lambda w: _branch_equation(w, k, eta_p_sq) - rhs, 0.0, w_max, xtol=1e-18
    )


def _root_complement(k, w, eta_p):
    """Return (X_SC, 1 - X_SC) from the branch deficit, without cancellation."""
    u = 1.0 - w
    weighted = eta_p**4 * u
    tail = w**k
    x_sq = weighted / (weighted + tail)
    x = math.sqrt(x_sq)
    return x, (tail / (weighted + tail)) / (1.0 + x)


def generalized_infinite_sponge(k, chi, eta_s=1.0, eta_p=1.0, nonphysical=False):
    """
    Sponge-crossing value of the infinite Bethe lattice under generalized rules.

    Parameters
    ----------
    k : int
        Degree, k >= 3
    chi : float
        Link ratio negativity
    eta_s : float, optional
        Series prefactor
    eta_p : float, optional
        Parallel prefactor; the root combines k branches with eta_p^4
    nonphysical : bool, optional
        Return the smaller (decreasing) root of the branch equation instead,
        NaN where it does not exist

    Returns
    -------
    float
        X_SC, exactly 0 below the threshold
    """
    k = check_degree(k)
    chi = check_unit_interval(chi)
    eta_s = check_positive(eta_s, "eta_s")
    eta_p = check_positive(eta_p, "eta_p")
    w = _solve_deficit(k, chi, eta_s, eta_p, nonphysical=nonphysical)
    if w is None:
        return 0.0
    if math.isnan(w):
        return math.nan
    return _root_complement(k, w, eta_p)[0]


def infinite_sponge(k, chi, nonphysical=False):
    """
    Sponge-crossing value of the infinite Bethe lattice.

    Parameters
    ----------
    k : int
        Degree, k >= 3
    chi : float
        Link ratio negativity
    nonphysical : bool, optional
        Return the smaller root of the self-consistent equation instead

    Returns
    -------
    float
        X_SC; 0 below chi_th and at least x_plus from chi_th up

    Notes
    -----
    The single-branch value u = (X^(1))^2 solves chi^2 = u + (1-u)^(k-1). The
    equation is solved for the deficit w = 1 - u, which keeps full relative
    precision as chi approaches 1.
    """
    return generalized_infinite_sponge(k, chi, nonphysical=nonphysical)


def infinite_sponge_complement(k, chi, eta_s=1.0, eta_p=1.0):
    """1 - X_SC computed from the branch deficit, accurate near saturation."""
    k = check_degree(k)
    chi = check_unit_interval(chi)
    w = _solve_deficit(k, chi, eta_s, eta_p)
    if w is None:
        return 1.0
    return _root_complement(k, w, eta_p)[1]


def single_branch_sponge(k, chi):
    """Single-branch value X^(1) = sqrt(u) of the infinite lattice."""
    k = check_degree(k)
    chi = check_unit_interval(chi)
    w = _solve_deficit(k, chi, 1.0, 1.0)
    if w is None:
        return 0.0
    return math.sqrt(1.0 - w)


def critical_point(k) -> CriticalPoint:
    """
    Threshold and discontinuous jump of the standard transition.

    Parameters
    ----------
    k : int
        Degree, k >= 3

    Returns
    -------
    CriticalPoint
        chi_th, the jump x_plus of X_SC and the jump x1_plus of X^(1)
    """
    k = check_degree(k)
    chi_th, t = _threshold(k, 1.0, 1.0)
    x_plus = math.sqrt((1.0 - t) / (t**k - t + 1.0))
    return CriticalPoint(chi_th, x_plus, math.sqrt(1.0 - t))


def _finite_depth(k, depth, chi, eta_s, eta_p):
    chi = np.asarray(chi, dtype=float)
    a = np.ones_like(chi)
    x = chi
    eta_p_sq = eta_p * eta_p
    for _ in range(depth):
        x = eta_s * chi * a
        if np.any(x > 1.0):
            warnings.warn(
                "Generalized series rule exceeds 1, clipping",
                category=RuleValidityWarning,
                stacklevel=3,
            )
            x = np.minimum(x, 1.0)
        x_sq = x * x
        a = np.sqrt(eta_p_sq * x_sq / (eta_p_sq * x_sq + (1.0 - x_sq) ** (k - 1)))
    x_sq = x * x
    weighted = eta_p_sq * eta_p_sq * x_sq
    return np.sqrt(weighted / (weighted + (1.0 - x_sq) ** k))


def generalized_finite_depth_sponge(k, l, chi, eta_s=1.0, eta_p=1.0):
    """Finite-depth sponge crossing under generalized rules, see finite_depth_sponge."""
    k = check_degree(k)
    if int(l) != l or l < 1:
        raise DomainError(f"Depth must be a positive integer, got {l}")
    values = np.asarray(chi, dtype=float)
    if np.any((values < 0) | (values > 1)):
        raise DomainError("chi must lie in [0, 1]")
    result = _finite_depth(k, int(l), values, eta_s, eta_p)
    return float(result) if np.ndim(chi) == 0 else result


def finite_depth_sponge(k, l, chi):
    """
    Sponge crossing from the root of a Cayley tree of depth l to its leaves.

    Parameters
    ----------
    k : int
        Degree, k >= 3
    l : int
        Depth, l >= 1
    chi : float or array_like
        Link ratio negativity

    Returns
    -------
    float or np.ndarray
        X_SC(l), vectorized over chi
    """
    return generalized_finite_depth_sponge(k, l, chi)


def correlation_length(k, chi, crossing=0.5):
    """
    Depth at which the finite-depth sponge crossing falls to the crossing value.

    Parameters
    ----------
    k : int
        Degree
    chi : float
        Link value below chi_th
    crossing : float, optional
        Crossing value in (0, x_plus), default 0.5

    Returns
    -------
    float
        The crossing depth, linearly interpolated between integer depths
    """
    k = check_degree(k)
    chi = check_unit_interval(chi)
    point = critical_point(k)
    if chi >= point.chi_th:
        raise DomainError(
            f"chi = {chi} is not below chi_th = {point.chi_th}; X_SC never drops"
        )
    if not 0.0 < crossing < point.x_plus:
        raise DomainError(f"Crossing must lie in (0, {point.x_plus}), got {crossing}")

    a = 1.0
    previous = 1.0
    for depth in range(1, DEPTH_CAP + 1):
        x = chi * a
        x_sq = x * x
        current = x / math.sqrt(x_sq + (1.0 - x_sq) ** k)
        if current <= crossing:
            return depth - 1 + (previous - crossing) / (previous - current)
        a = x / math.sqrt(x_sq + (1.0 - x_sq) ** (k - 1))
        previous = current
    raise ConvergenceError(
        f"No crossing of {crossing} within {DEPTH_CAP} generations at chi = {chi}",
        bracket=(1, DEPTH_CAP),
    )


def _second_derivative(k, l, chi, step):
    f = _finite_depth(k, l, np.array([chi - step, chi, chi + step]), 1.0, 1.0)
    return (f[0] - 2.0 * f[1] + f[2]) / (step * step)


def _inflection(k, l, step):
    grid = np.arange(1.0 - 10 * step, 0.05, -step)
    values = _finite_depth(k, l, np.stack([grid - step, grid, grid + step]), 1.0, 1.0)
    curvature = (values[0] - 2.0 * values[1] + values[2]) / (step * step)
    concave = curvature < 0.0
    if not concave[0]:
        raise ConvergenceError(
            f"X_SC({l}) is not concave near chi = 1 for k = {k}",
            bracket=(grid[-1], grid[0]),
        )
    flips = np.flatnonzero(~concave)
    if flips.size == 0:
        raise ConvergenceError(
            f"No inflection of X_SC({l}) found for k = {k}",
            bracket=(grid[-1], grid[0]),
        )
    low, high = grid[flips[0]], grid[flips[0] - 1]
    return find_root(_second_derivative, low, high, xtol=1e-12, args=(k, l, step))


def finite_size_threshold(k, l):
    """
    Finite-depth threshold, the inflection point of X_SC(l) in chi.

    Parameters
    ----------
    k : int
        Degree
    l : int
        Depth, l >= 2

    Returns
    -------
    float
        chi_th(l), located from central second differences with step 1e-4

    Notes
    -----
    The grid is scanned down from chi near 1 for the first change from concave to
    convex, then bisected. The root is recomputed with step 5e-5 and a
    DiscretizationWarning is issued when the two disagree by more than 1e-3.
    """
    k = check_degree(k)
    if int(l) != l or l < 2:
        raise DomainError(f"Depth must be an integer >= 2, got {l}")
    root = _inflection(k, int(l), SECOND_DERIVATIVE_STEP)
    refined = _inflection(k, int(l), RICHARDSON_STEP)
    if abs(root - refined) > RICHARDSON_TOLERANCE:
        warnings.warn(
            f"Finite-size threshold moves by {abs(root - refined):.2e} when the "
            f"difference step is halved (k={k}, l={l})",
            category=DiscretizationWarning,
            stacklevel=2,
        )
    return root


def fit_power_law(xs, ys):
    """
    Fit y = amplitude * x**exponent by least squares on log-log data.

    Parameters
    ----------
    xs : array_like
        Positive regressor values, at least four
    ys : array_like
        Positive responses

    Returns
    -------
    PowerLawFit
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 4:
        raise DomainError("Power-law fit needs at least four matching points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise DomainError("Power-law fit needs strictly positive data")
    log_x, log_y = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = log_y - (slope * log_x + intercept)
    total = np.sum((log_y - log_y.mean()) ** 2)
    r_squared = 1.0 if total == 0 else 1.0 - np.sum(residual**2) / total
    return PowerLawFit(
        float(slope),
        float(np.exp(intercept)),
        float(np.clip(r_squared, 0.0, 1.0)),
        (float(xs.min()), float(xs.max())),
    )


def beta_exponent(k, window=BETA_WINDOW, n_points=25):
    """Fit X_SC - x_plus against chi - chi_th just above the threshold."""
    point = critical_point(k)
    deltas = log_spaced_window(*window, n_points)
    jumps = [infinite_sponge(k, point.chi_th + d) - point.x_plus for d in deltas]
    return fit_power_law(deltas, jumps)


def correlation_exponent(k, window=CORRELATION_WINDOW, n_points=20, crossing=0.5):
    """Fit the crossing depth l* against chi_th - chi just below the threshold."""
    point = critical_point(k)
    deltas = log_spaced_window(*window, n_points)
    depths = [correlation_length(k, point.chi_th - d, crossing) for d in deltas]
    return fit_power_law(deltas, depths)


def shift_exponent(k, depths=SHIFT_DEPTHS):
    """Fit |chi_th(l) - chi_th| against depth l."""
    chi_th = critical_point(k).chi_th
    shifts = [abs(finite_size_threshold(k, l) - chi_th) for l in depths]
    return fit_power_law(list(depths), shifts)


def saturation_exponent(k, window=SATURATION_WINDOW, n_points=20):
    """
    Fit 1 - X_SC against 1 - chi near saturation.

    Parameters
    ----------
    k : int
        Degree
    window : tuple of float, optional
        Range of 1 - chi
    n_points : int, optional
        Number of log-spaced points

    Returns
    -------
    PowerLawFit
        Exponent close to k
    """
    k = check_degree(k)
    deltas = log_spaced_window(*window, n_points)
    deficits = [infinite_sponge_complement(k, 1.0 - d) for d in deltas]
    return fit_power_law(deltas, deficits)


def sponge_scan(k, chis, depth=math.inf):
    """
    Scan X_SC over a chi grid.

    Parameters
    ----------
    k : int
        Degree
    chis : array_like
        Link values
    depth : int or float, optional
        Finite depth, or math.inf for the infinite lattice

    Returns
    -------
    pd.DataFrame
        Columns k, chi, depth, x_sc
    """
    chis = np.asarray(chis, dtype=float)
    if depth == math.inf:
        values = [infinite_sponge(k, c) for c in chis]
    else:
        values = finite_depth_sponge(k, depth, chis)
    scan = EMPTY_SCAN.copy()
    scan["chi"] = chis
    scan["k"] = k
    scan["depth"] = depth
    scan["x_sc"] = values
    return scan


def correlation_scan(k, chis, crossing=0.5):
    """Crossing depth over chi values below threshold, columns k, chi, depth."""
    return pd.DataFrame(
        {
            "k": k,
            "chi": list(chis),
            "depth": [correlation_length(k, c, crossing) for c in chis],
        }
    )


def finite_size_scan(k, depths):
    """Finite-depth thresholds, columns k, depth, chi_th."""
    return pd.DataFrame(
        {
            "k": k,
            "depth": list(depths),
            "chi_th": [finite_size_threshold(k, l) for l in depths],
        }
    )


def generalized_phase_classify(k, eta_s, eta_p) -> PhaseDiagnosis:
    """
    Classify the transition of the generalized rules on the Bethe lattice.

    Parameters
    ----------
    k : int
        Degree
    eta_s : float
        Series prefactor
    eta_p : float
        Parallel prefactor

    Returns
    -------
    PhaseDiagnosis
        MixedOrder for eta_p < sqrt(k-1) with a physical threshold, SecondOrder
        for eta_p >= sqrt(k-1) with a physical threshold, NoTransition otherwise.
        NoTransition carries the formal threshold (>= 1).

    Notes
    -----
    The second-order threshold is where the branch deficit reaches 1 in the
    self-consistent equation, chi_th = 1 / (eta_s eta_p). The linearized
    recursion grows by eta_s chi eta_p per level, so a transition needs
    eta_s eta_p > 1.
    """
    k = check_degree(k)
    eta_s = check_positive(eta_s, "eta_s")
    eta_p = check_positive(eta_p, "eta_p")
    chi_th, w_max = _threshold(k, eta_s, eta_p)
    if chi_th >= 1.0:
        return PhaseDiagnosis(NO_TRANSITION, chi_th=chi_th)
    if w_max < 1.0:
        f = w_max
        eta_p4 = eta_p**4
        x_plus = eta_p**2 * math.sqrt((1.0 - f) / (f**k - eta_p4 * f + eta_p4))
        return PhaseDiagnosis(MIXED_ORDER, chi_th, x_plus, 0.5)
    critical_gain = math.isclose(eta_p * eta_p, k - 1, rel_tol=1e-12)
    return PhaseDiagnosis(SECOND_ORDER, chi_th, 0.0, 0.25 if critical_gain else 0.5)


def expansion_coefficient(k):
    """Expansion variable z+ = -T^(k-1)/(1-T) of the branch jump at threshold."""
    t = turning_deficit(check_degree(k))
    return -(t ** (k - 1)) / (1.0 - t)


def expansion_residual(k, order=1):
    """
    Truncated expansion of the squared branch jump minus its exact value.

    Parameters
    ----------
    k : int
        Degree
    order : int, optional
        Highest power of z+ kept

    Returns
    -------
    float
        chi_th^2 * sum_{m<=order} z^m - (1 - T)
    """
    k = check_degree(k)
    t = turning_deficit(k)
    z = expansion_coefficient(k)
    chi_th_sq = critical_point(k).chi_th ** 2
    return chi_th_sq * sum(z**m for m in range(order + 1)) - (1.0 - t)
