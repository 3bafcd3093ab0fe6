"""Conversions between squeezing and ratio negativity, and TMSVS Schmidt vectors."""

import math
from typing import NamedTuple

import numpy as np
from annalist.annalist import Annalist

from negperc.utils import (
    DEFAULT_TOLERANCE,
    INFINITE_SQUEEZING,
    DegeneracyError,
    DomainError,
    check_unit_interval,
)

annalizer = Annalist()


class SchmidtVector(NamedTuple):
    """Truncated Schmidt coefficients, nonincreasing, with the discarded mass."""

    values: np.ndarray
    truncation_error: float

    @property
    def total(self):
        """Retained mass plus truncation error (1 for a valid vector)."""
        return float(np.sum(self.values)) + self.truncation_error


def chi_from_r(r):
    """
    Ratio negativity of a TMSVS with squeezing r.

    Parameters
    ----------
    r : float
        Squeezing parameter, r >= 0; math.inf represents chi = 1

    Returns
    -------
    float
        chi = tanh(r)
    """
    r = float(r)
    if math.isnan(r) or r < 0:
        raise DomainError(f"Squeezing parameter must be nonnegative, got {r}")
    if r == INFINITE_SQUEEZING:
        return 1.0
    return math.tanh(r)


def r_from_chi(chi):
    """
    Squeezing parameter of a TMSVS with ratio negativity chi.

    Parameters
    ----------
    chi : float
        Ratio negativity in [0, 1]

    Returns
    -------
    float
        arctanh(chi), or math.inf for chi = 1
    """
    chi = check_unit_interval(chi)
    if chi == 1.0:
        return INFINITE_SQUEEZING
    return math.atanh(chi)


def tmsvs_schmidt(chi, n_max):
    """
    Schmidt vector of a TMSVS truncated to n_max photon numbers.

    Parameters
    ----------
    chi : float
        Ratio negativity, strictly below 1
    n_max : int
        Number of retained coefficients

    Returns
    -------
    SchmidtVector
        values[n] = (1 - chi^2) chi^(2n), truncation_error = chi^(2 n_max)
    """
    chi = check_unit_interval(chi)
    if chi == 1.0:
        raise DegeneracyError("A chi = 1 TMSVS has no normalizable Schmidt vector")
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max}")
    chi_sq = chi * chi
    values = (1.0 - chi_sq) * chi_sq ** np.arange(int(n_max), dtype=float)
    return SchmidtVector(values, chi_sq ** int(n_max))


def schmidt_product(x: SchmidtVector, y: SchmidtVector) -> SchmidtVector:
    """
    Schmidt vector of the tensor product of two pure states.

    Parameters
    ----------
    x : SchmidtVector
    y : SchmidtVector

    Returns
    -------
    SchmidtVector
        Entries sorted descending; discarded mass combines both truncations.
    """
    values = np.sort(np.outer(x.values, y.values).ravel())[::-1]
    truncation = 1.0 - (1.0 - x.truncation_error) * (1.0 - y.truncation_error)
    return SchmidtVector(values, truncation)


def is_normalized(vector: SchmidtVector, tolerance=DEFAULT_TOLERANCE):
    """Whether the values and the truncation error sum to one."""
    return abs(vector.total - 1.0) <= tolerance


def concurrence_from_schmidt(lam):
    """Concurrence c = 2 sqrt(lam (1 - lam)) of a two-level Schmidt pair."""
    lam = check_unit_interval(lam, name="lambda")
    return 2.0 * math.sqrt(lam * (1.0 - lam))


def schmidt_from_concurrence(c):
    """Largest Schmidt coefficient (1 + sqrt(1 - c^2)) / 2 of a two-qubit state."""
    c = check_unit_interval(c, name="c")
    return 0.5 * (1.0 + math.sqrt(1.0 - c * c))
