"""Series and parallel rules of deterministic Gaussian entanglement transmission."""

import math
import warnings
from typing import NamedTuple

import numpy as np
from annalist.annalist import Annalist

from negperc.utils import (
    DomainError,
    RuleRangeError,
    RuleValidityWarning,
    check_positive,
    check_unit_interval,
)

annalizer = Annalist()

LOG_TWO = math.log(2.0)


class RuleParams(NamedTuple):
    """Prefactors of the generalized series and parallel rules."""

    eta_s: float = 1.0
    eta_p: float = 1.0

    @property
    def is_standard(self):
        """Whether both prefactors are one."""
        return self.eta_s == 1.0 and self.eta_p == 1.0


def _validated(chis, closed_right=True):
    values = [check_unit_interval(c, closed_right=closed_right) for c in chis]
    if not values:
        raise DomainError("At least one link is required")
    return values


def series_combine(chis, eta_s=1.0):
    """
    Swap entanglement along a chain of links.

    Parameters
    ----------
    chis : list of float
        Ratio negativities of the links, each in [0, 1]
    eta_s : float, optional
        Series prefactor, default 1 (exact rule)

    Returns
    -------
    float
        eta_s times the product of the link values

    Raises
    ------
    RuleRangeError
        If eta_s pushes the result above 1
    """
    values = _validated(chis)
    eta_s = check_positive(eta_s, "eta_s")
    result = eta_s * math.prod(values)
    if result > 1.0:
        raise RuleRangeError(
            f"Series rule with eta_s={eta_s} gives {result} > 1 for links {values}"
        )
    return result


def parallel_combine(chis, eta_p=1.0):
    """
    Concentrate entanglement from parallel links.

    Solves chi^2 / (1 - chi^2) = eta_p^2 m^2 / prod(1 - chi_i^2) with m the
    largest link value.

    Parameters
    ----------
    chis : list of float
        Ratio negativities of the parallel links
    eta_p : float, optional
        Parallel prefactor, default 1 (exact rule)

    Returns
    -------
    float
        The concentrated ratio negativity
    """
    values = _validated(chis)
    eta_p = check_positive(eta_p, "eta_p")
    if any(c == 1.0 for c in values):
        return 1.0
    m = values[int(np.argmax(values))]
    product = math.prod(1.0 - c * c for c in values)
    numerator = eta_p * m
    result = numerator / math.sqrt(numerator * numerator + product)
    if result < m:
        warnings.warn(
            f"Parallel rule with eta_p={eta_p} gives {result} below its largest "
            f"input {m}",
            category=RuleValidityWarning,
            stacklevel=2,
        )
    return result


def _log_sinh(r):
    if r > 20.0:
        return r - LOG_TWO + math.log1p(-math.exp(-2.0 * r))
    return math.log(math.sinh(r))


def _log_cosh(r):
    return float(np.logaddexp(r, -r)) - LOG_TWO


def _asinh_exp(log_value):
    # arcsinh(exp(L)) without overflow
    if log_value > 0:
        return log_value + math.log(1.0 + math.sqrt(1.0 + math.exp(-2.0 * log_value)))
    return math.asinh(math.exp(log_value))


def concentrate_in_order(rs, order):
    """
    Squeezing after concentrating links one by one in the given order.

    The first link in ``order`` takes the sinh slot and every later link
    contributes a cosh factor.

    Parameters
    ----------
    rs : list of float
        Squeezing parameters, all positive
    order : sequence of int
        Permutation of range(len(rs))

    Returns
    -------
    float
        The resulting squeezing parameter
    """
    if sorted(order) != list(range(len(rs))):
        raise DomainError(f"{order} is not a permutation of {len(rs)} links")
    log_value = _log_sinh(rs[order[0]])
    log_value += sum(_log_cosh(rs[i]) for i in order[1:])
    return _asinh_exp(log_value)


def optimal_parallel_order(rs):
    """
    Best concentration order and the squeezing it achieves.

    Parameters
    ----------
    rs : list of float
        Squeezing parameters, all positive

    Returns
    -------
    tuple of (float, tuple of int)
        The squeezing r with sinh r = sinh(r_max) prod cosh(r_k), and an order
        placing the largest value first (ties keep their input order)
    """
    rs = [float(r) for r in rs]
    if not rs:
        raise DomainError("At least one squeezing parameter is required")
    if any(not r > 0 for r in rs):
        raise DomainError(f"Squeezing parameters must be positive, got {rs}")
    order = tuple(sorted(range(len(rs)), key=lambda i: -rs[i]))
    return concentrate_in_order(rs, order), order


def series_combine_r(rs, eta_s=1.0):
    """Series rule in the squeezing domain, tanh r = eta_s prod tanh r_i, as chi."""
    return eta_s * math.prod(math.tanh(r) for r in rs)


def parallel_combine_r(rs, eta_p=1.0):
    """Parallel rule in the squeezing domain, sinh r = eta_p sinh r_max prod cosh r_k, as chi."""
    _, order = optimal_parallel_order(rs)
    log_value = math.log(eta_p) + _log_sinh(rs[order[0]])
    log_value += sum(_log_cosh(rs[i]) for i in order[1:])
    return math.tanh(_asinh_exp(log_value))
