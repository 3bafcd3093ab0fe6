"""General utilities."""

import math
import warnings

import numpy as np
from scipy.optimize import bisect

INFINITE_SQUEEZING = math.inf

DEFAULT_TOLERANCE = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class RuleRangeError(DomainError):
    """A generalized combination rule produced a value outside [0, 1]."""


class DegeneracyError(DomainError):
    """A Schmidt vector was requested for a maximally entangled (chi = 1) link."""


class IrreducibleGraphError(DomainError):
    """Series and parallel moves are exhausted before a single link remains.

    Attributes
    ----------
    graph : networkx.MultiGraph
        The stuck graph, with the merged terminals.
    """

    def __init__(self, message, graph=None):
        super().__init__(message)
        self.graph = graph


class NumericError(ArithmeticError):
    """A numerical procedure failed."""


class ConvergenceError(NumericError):
    """A root finder failed to converge.

    Attributes
    ----------
    bracket : tuple of float
        The bracket the solver was given.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class TruncationError(NumericError):
    """The truncated Fock space is too small for the requested accuracy."""


class StepSizeError(NumericError):
    """The feedback integrator step is too large for the dynamics."""


class StochasticityError(NumericError):
    """A transfer matrix violates column (sub)stochasticity."""


class RuleValidityWarning(UserWarning):
    """A generalized rule was evaluated outside its range of validity."""


class ClampWarning(RuntimeWarning):
    """An argument had to be clamped by more than rounding error."""


class DiscretizationWarning(RuntimeWarning):
    """Two discretizations of the same quantity disagree."""


def check_unit_interval(value, name="chi", closed_right=True):
    """
    Validate that a value lies in [0, 1] (or [0, 1)).

    Parameters
    ----------
    value : float
        The value to check
    name : str, optional
        Name used in the error message
    closed_right : bool, optional
        Whether 1 is admissible, default True

    Returns
    -------
    float
        The value as a float

    Raises
    ------
    DomainError
        If the value is not a number in the interval
    """
    try:
        value = float(value)
    except (TypeError, ValueError) as e:
        raise DomainError(f"{name} must be a real number, got {value!r}") from e
    upper_ok = value <= 1.0 if closed_right else value < 1.0
    if not (0.0 <= value and upper_ok):
        interval = "[0, 1]" if closed_right else "[0, 1)"
        raise DomainError(f"{name} must lie in {interval}, got {value}")
    return value


def check_degree(k):
    """Validate a Bethe lattice degree, returning it as an int."""
    if int(k) != k or k < 3:
        raise DomainError(f"Degree k must be an integer >= 3, got {k}")
    return int(k)


def check_positive(value, name):
    """Validate a strictly positive real parameter."""
    value = float(value)
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


def find_root(func, low, high, xtol=1e-15, rtol=8.9e-16, maxiter=200, args=()):
    """
    Bisection wrapper that reports the bracket on failure.

    Parameters
    ----------
    func : callable
        Function whose sign changes across the bracket
    low : float
        Lower end of the bracket
    high : float
        Upper end of the bracket
    xtol : float, optional
        Absolute tolerance on the root
    rtol : float, optional
        Relative tolerance on the root
    maxiter : int, optional
        Maximum number of bisection steps
    args : tuple, optional
        Extra arguments for func

    Returns
    -------
    float
        The root

    Raises
    ------
    ConvergenceError
        If the bracket is invalid or the solver does not converge
    """
    try:
        return bisect(func, low, high, args=args, xtol=xtol, rtol=rtol, maxiter=maxiter)
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError(
            f"Bisection failed on bracket [{low}, {high}]: {e}", bracket=(low, high)
        ) from e


def parse_grid(grid: str) -> np.ndarray:
    """
    Parse a grid specification of the form "start:stop:step".

    The stop value is included when it falls on the grid (within 1e-9 of a step).

    Parameters
    ----------
    grid : str
        Specification such as "0:1:0.001"

    Returns
    -------
    np.ndarray
        The grid points
    """
    try:
        start, stop, step = (float(part) for part in grid.split(":"))
    except ValueError as e:
        raise DomainError(f"Grid must look like 'start:stop:step', got {grid!r}") from e
    if step <= 0 or stop < start:
        raise DomainError(f"Grid {grid!r} is empty or has a nonpositive step")
    n_steps = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n_steps + 1)


def log_spaced_window(low, high, n_points=25):
    """Return points log-spaced across [low, high]."""
    if not 0 < low < high:
        raise DomainError(f"Window must satisfy 0 < low < high, got ({low}, {high})")
    return np.logspace(np.log10(low), np.log10(high), n_points)


def warn_if_clamped(raw, clamped, name, tolerance=1e-12):
    """Warn when a clamp moved a value by more than rounding error.

    Returns the clamp magnitude.
    """
    magnitude = abs(raw - clamped)
    if magnitude > tolerance:
        warnings.warn(
            f"{name} clamped by {magnitude:.3e}",
            category=ClampWarning,
            stacklevel=3,
        )
    return magnitude
