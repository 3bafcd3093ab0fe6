"""Majorization checks for deterministic LOCC concentration and swapping."""

import math
from typing import NamedTuple

import numpy as np
from annalist.annalist import Annalist
from scipy.linalg import block_diag
from scipy.stats import binom, nbinom

from negperc.measures import SchmidtVector, is_normalized, tmsvs_schmidt
from negperc.utils import (
    DEFAULT_TOLERANCE,
    INFINITE_SQUEEZING,
    DomainError,
    NumericError,
    StochasticityError,
    TruncationError,
    check_positive,
    check_unit_interval,
)

annalizer = Annalist()

CHI_CAP = 0.99
TAIL_BOUND = 1e-8
INPUT_TAIL = 1e-15
PHYSICALITY_RTOL = 1e-10
MAPPING_TOLERANCE = 1e-10


class TransferMatrix(NamedTuple):
    """Truncated photon-number transfer matrix of a loss or amplifier channel."""

    entries: np.ndarray
    kind: str
    parameter: float

    @property
    def row_sums(self):
        """Sums of the retained rows."""
        return self.entries.sum(axis=1)

    @property
    def column_sums(self):
        """Sums of the retained columns."""
        return self.entries.sum(axis=0)


class GaussianCM(NamedTuple):
    """
    Covariance matrix of a symmetric two-mode Gaussian state.

    The blocks are A = B = a I and C = c Z, with Z = diag(1, -1).
    """

    a: float
    c: float

    @property
    def matrix(self):
        """The 4 x 4 covariance matrix."""
        diag = self.a * np.eye(2)
        cross = self.c * np.diag([1.0, -1.0])
        return np.block([[diag, cross], [cross, diag]])

    def is_pure(self, rtol=PHYSICALITY_RTOL):
        """Whether c = sqrt(a^2 - 1) within relative tolerance."""
        expected = math.sqrt(max(self.a * self.a - 1.0, 0.0))
        return math.isclose(self.c, expected, rel_tol=rtol, abs_tol=1e-12)

    @classmethod
    def tmsvs(cls, r):
        """Covariance matrix of a TMSVS with squeezing r."""
        return cls(math.cosh(2.0 * r), math.sinh(2.0 * r))


class DCState(NamedTuple):
    """
    Superposition of a DV prefix and a geometric CV tail.

    Schmidt values are (1 - c_chi) mu followed by c_chi (1 - chi^2) chi^(2n).
    """

    c_chi: float
    mu: tuple
    chi: float

    def validated(self):
        """Return the state with checked fields, raising DomainError otherwise."""
        c_chi = check_unit_interval(self.c_chi, name="c_chi")
        chi = check_unit_interval(self.chi, closed_right=False)
        mu = np.asarray(self.mu, dtype=float)
        if mu.size == 0:
            if c_chi != 1.0:
                raise DomainError("An empty DV prefix requires c_chi = 1")
        elif np.any(mu < 0) or abs(mu.sum() - 1.0) > DEFAULT_TOLERANCE:
            raise DomainError(f"DV prefix must be nonnegative and sum to 1, got {self.mu}")
        return DCState(c_chi, tuple(float(m) for m in mu), chi)


class ConcentrationReport(NamedTuple):
    """Outcome of a Gaussian concentration check."""

    r1: float
    r2: float
    r_out: float
    chi_out: float
    n_max: int
    mapping_residual: float
    max_row_sum: float
    truncation_error: float
    majorized: bool
    passed: bool

    def to_dict(self):
        """Report as a JSON-ready dict."""
        return {
            "inputs": {"r1": self.r1, "r2": self.r2, "n_max": self.n_max},
            "r_out": self.r_out,
            "chi_out": self.chi_out,
            "residuals": {
                "mapping": self.mapping_residual,
                "max_row_sum": self.max_row_sum,
            },
            "truncation_error": self.truncation_error,
            "majorized": self.majorized,
            "pass": self.passed,
        }


def _check_size(n_max):
    if int(n_max) != n_max or n_max < 2:
        raise DomainError(f"n_max must be an integer >= 2, got {n_max}")
    return int(n_max)


def _input_size(chi, n_max):
    # retained inputs so that the discarded geometric mass is below INPUT_TAIL
    if chi == 0.0:
        return n_max
    return max(n_max, math.ceil(math.log(INPUT_TAIL) / (2.0 * math.log(chi))))


def majorizes(x: SchmidtVector, y: SchmidtVector, tolerance=DEFAULT_TOLERANCE):
    """
    Whether x is majorized by y.

    Parameters
    ----------
    x : SchmidtVector
        Candidate majorized vector
    y : SchmidtVector
        Candidate majorizing vector
    tolerance : float, optional
        Absolute tolerance on prefix sums

    Returns
    -------
    bool
        True iff every prefix sum of sorted x is at most that of sorted y

    Raises
    ------
    DomainError
        If either vector is not normalized
    """
    for name, vector in (("x", x), ("y", y)):
        if not is_normalized(vector, tolerance=max(tolerance, 1e-9)):
            raise DomainError(f"{name} is not normalized, total {vector.total}")
    x_cum = np.cumsum(np.sort(np.asarray(x.values, dtype=float))[::-1])
    y_cum = np.cumsum(np.sort(np.asarray(y.values, dtype=float))[::-1])
    length = max(x_cum.size, y_cum.size)
    x_cum = np.pad(x_cum, (0, length - x_cum.size), mode="edge")
    y_cum = np.pad(y_cum, (0, length - y_cum.size), mode="edge")
    return bool(np.all(x_cum <= y_cum + tolerance))


def loss_matrix(eta, n_max, n_columns=None):
    """
    Pure-loss transfer matrix D[i, j] = C(j, i) eta^i (1 - eta)^(j - i).

    Parameters
    ----------
    eta : float
        Transmissivity, 0 < eta <= 1
    n_max : int
        Number of retained rows
    n_columns : int, optional
        Number of retained columns, default n_max

    Returns
    -------
    TransferMatrix
        Upper triangular; retained columns sum to exactly one
    """
    eta = check_positive(eta, "eta")
    if eta > 1.0:
        raise DomainError(f"Transmissivity must not exceed 1, got {eta}")
    n_max = _check_size(n_max)
    n_columns = n_max if n_columns is None else _check_size(n_columns)
    rows = np.arange(n_max)[:, None]
    columns = np.arange(n_columns)[None, :]
    return TransferMatrix(binom.pmf(rows, columns, eta), "loss", eta)


def amp_matrix(G, n_max):
    """
    Quantum-limited amplifier transfer matrix.

    D[i, j] = C(i, j) a^(j+1) b^(i-j) for i >= j with a = 1/G and b = 1 - a.

    Parameters
    ----------
    G : float
        Gain, G >= 1
    n_max : int
        Matrix size

    Returns
    -------
    TransferMatrix
        Lower triangular; rows sum to exactly 1/G, columns to 1 up to the tail
    """
    G = float(G)
    if not G >= 1.0:
        raise DomainError(f"Gain must be at least 1, got {G}")
    n_max = _check_size(n_max)
    rows = np.arange(n_max)[:, None]
    columns = np.arange(n_max)[None, :]
    entries = nbinom.pmf(rows - columns, columns + 1, 1.0 / G)
    return TransferMatrix(np.where(rows >= columns, entries, 0.0), "amplifier", G)


def tensor_row_sum_max(eta, G, n_max):
    """
    Largest row sum of the truncated loss and amplifier tensor product.

    The row sums of a Kronecker product are the products of the factor row
    sums, so the maximum is the product of the two maxima. Untruncated, it
    equals 1 / (eta G).
    """
    loss = loss_matrix(eta, n_max)
    amp = amp_matrix(G, n_max)
    return float(loss.row_sums.max() * amp.row_sums.max())


def verify_concentration(r1, r2, n_max=200):
    """
    Check the LOCC map concentrating two TMSVS into one.

    The loss transmissivity and amplifier gain are eta = 1 - chi2^2 and
    G = 1/eta, which send the concentrated state and the vacuum to the two
    input states.

    Parameters
    ----------
    r1 : float
        Larger input squeezing
    r2 : float
        Smaller input squeezing, 0 <= r2 <= r1
    n_max : int, optional
        Truncation of each input Schmidt vector, default 200

    Returns
    -------
    ConcentrationReport

    Raises
    ------
    DomainError
        If the inputs are not ordered
    TruncationError
        If the output is too entangled for the truncation or a tail exceeds 1e-8
    """
    r1 = check_positive(r1, "r1")
    r2 = float(r2)
    if not 0.0 <= r2 <= r1:
        raise DomainError(f"Squeezing must satisfy 0 <= r2 <= r1, got r1={r1}, r2={r2}")
    n_max = _check_size(n_max)
    r_out = math.asinh(math.sinh(r1) * math.cosh(r2))
    chi, chi_1, chi_2 = math.tanh(r_out), math.tanh(r1), math.tanh(r2)
    if chi > CHI_CAP:
        raise TruncationError(f"Concentrated chi={chi:.6f} exceeds the cap {CHI_CAP}")
    lam_1 = tmsvs_schmidt(chi_1, n_max)
    lam_2 = tmsvs_schmidt(chi_2, n_max)
    tail = max(lam_1.truncation_error, lam_2.truncation_error)
    if tail >= TAIL_BOUND:
        raise TruncationError(f"Truncation tail {tail:.3e} at n_max={n_max} is not below {TAIL_BOUND}")

    eta = 1.0 - chi_2 * chi_2
    gain = 1.0 / eta
    n_in = _input_size(chi, n_max)
    lam = tmsvs_schmidt(chi, n_in)
    loss = loss_matrix(eta, n_max, n_columns=n_in)
    amp = amp_matrix(gain, n_max)
    mapped = np.outer(loss.entries @ lam.values, amp.entries[:, 0])
    residual = float(np.max(np.abs(mapped - np.outer(lam_1.values, lam_2.values))))

    max_row_sum = float(loss.row_sums.max() * amp.row_sums.max())
    majorized = majorizes(_trimmed_product(lam_1, lam_2), lam)
    passed = residual <= TAIL_BOUND and max_row_sum <= 1.0 + DEFAULT_TOLERANCE and majorized
    return ConcentrationReport(
        r1, r2, r_out, chi, n_max, residual, max_row_sum, tail, majorized, passed
    )


def _trimmed_product(x, y):
    product = np.outer(x.values, y.values).ravel()
    truncation = 1.0 - (1.0 - x.truncation_error) * (1.0 - y.truncation_error)
    return SchmidtVector(product, truncation)


def lemma2_convertible(r1, r2, r1p, r2p, tolerance=DEFAULT_TOLERANCE):
    """
    Sufficient condition for converting two TMSVS (r1, r2) into (r1p, r2p).

    The ratio [sinh(r1 + r2) +- sinh(r1 - r2)] / [sinh(r1p + r2p) +- sinh(r1p - r2p)]
    must be at least one, with the sign following r1p - r1.

    Returns
    -------
    bool

    Raises
    ------
    DomainError
        If either pair is not in decreasing order or both parameters move the
        same way
    """
    r1, r2, r1p, r2p = (float(v) for v in (r1, r2, r1p, r2p))
    if min(r1, r2, r1p, r2p) < 0:
        raise DomainError("Squeezing parameters must be nonnegative")
    if r1 < r2 or r1p < r2p:
        raise DomainError(f"Pairs must be decreasing, got ({r1}, {r2}) and ({r1p}, {r2p})")
    if (r1p - r1) * (r2p - r2) > 0:
        raise DomainError("r1p - r1 and r2p - r2 must have opposite signs")
    if r1p >= r1:
        numerator = math.sinh(r1) * math.cosh(r2)
        denominator = math.sinh(r1p) * math.cosh(r2p)
    else:
        numerator = math.cosh(r1) * math.sinh(r2)
        denominator = math.cosh(r1p) * math.sinh(r2p)
    if denominator == 0.0:
        return True
    return numerator / denominator >= 1.0 - tolerance


def gpovm_swap(r1, r2, r0):
    """
    Swap two TMSVS through a general Gaussian measurement with seed squeezing r0.

    Parameters
    ----------
    r1 : float
        Squeezing of the first link
    r2 : float
        Squeezing of the second link
    r0 : float
        Seed squeezing; math.inf is the optimal (homodyne-like) limit

    Returns
    -------
    tuple of (float, float, float)
        Covariance entries a and c of the output and its squeezing r, with
        tanh r = tanh r0 tanh r1 tanh r2

    Raises
    ------
    NumericError
        If the output is not a pure state, c != sqrt(a^2 - 1)
    """
    r1 = check_positive(r1, "r1")
    r2 = check_positive(r2, "r2")
    r0 = float(r0)
    if math.isnan(r0) or r0 < 0:
        raise DomainError(f"Seed squeezing must be nonnegative, got {r0}")
    c1, c2 = math.cosh(2.0 * r1), math.cosh(2.0 * r2)
    s1, s2 = math.sinh(2.0 * r1), math.sinh(2.0 * r2)
    # cosh 2r - 1 = 2 sinh^2 r, kept separate for precision at small squeezing
    d1, d2 = 2.0 * math.sinh(r1) ** 2, 2.0 * math.sinh(r2) ** 2
    if r0 == INFINITE_SQUEEZING:
        den = c1 + c2
        a = (c1 * c2 + 1.0) / den
        c = s1 * s2 / den
        a_minus_one = d1 * d2 / den
    else:
        c0, s0, d0 = math.cosh(2.0 * r0), math.sinh(2.0 * r0), 2.0 * math.sinh(r0) ** 2
        den = c1 * c2 + 1.0 + c0 * (c1 + c2)
        a = (c0 * (c1 * c2 + 1.0) + c1 + c2) / den
        c = s0 * s1 * s2 / den
        a_minus_one = d0 * d1 * d2 / den
    expected = math.sqrt(a_minus_one * (a + 1.0))
    if not math.isclose(c, expected, rel_tol=PHYSICALITY_RTOL, abs_tol=1e-300):
        raise NumericError(f"Swapped state is not pure: c={c}, sqrt(a^2-1)={expected}")
    return a, c, 0.5 * math.asinh(c)


def swap_chain(chis, seed_chis=()):
    """
    Generalized series rule along a chain with imperfect relays.

    Parameters
    ----------
    chis : list of float
        Link ratio negativities
    seed_chis : list of float, optional
        Seed ratio negativities of the general relays, at most len(chis) - 1

    Returns
    -------
    float
        prod(seed_chis) * prod(chis)
    """
    chis = [check_unit_interval(c) for c in chis]
    seeds = [check_unit_interval(s, name="seed chi") for s in seed_chis]
    if not chis:
        raise DomainError("At least one link is required")
    if len(seeds) > len(chis) - 1:
        raise DomainError(f"A chain of {len(chis)} links has {len(chis) - 1} relays, got {len(seeds)} seeds")
    return math.prod(seeds) * math.prod(chis)


def dc_schmidt(state: DCState, n_max):
    """
    Schmidt vector of a DV-CV superposition, in photon-number order.

    The entries are not sorted: the transfer matrices act on this ordering.
    """
    state = state.validated()
    n_max = _check_size(n_max)
    tail = tmsvs_schmidt(state.chi, n_max)
    values = np.concatenate(
        [(1.0 - state.c_chi) * np.asarray(state.mu, dtype=float), state.c_chi * tail.values]
    )
    return SchmidtVector(values, state.c_chi * tail.truncation_error)


def _prefix_block(mu_1, eta, prefix):
    n_0 = len(mu_1)
    if prefix == "identity" or n_0 == 0:
        return np.eye(n_0), tuple(mu_1)
    if prefix == "uniform":
        block = np.outer(mu_1, np.ones(n_0))
        if block.sum(axis=1).max() > 1.0 / eta + DEFAULT_TOLERANCE:
            raise StochasticityError(
                f"Uniform prefix needs n0 * max(mu) <= 1/eta = {1.0 / eta:.6f}"
            )
        return block, tuple(np.full(n_0, 1.0 / n_0))
    raise DomainError(f"Unknown prefix block {prefix!r}, use 'identity' or 'uniform'")


def nongaussian_concentrate(s1: DCState, s2: DCState, n_max=200, prefix="identity", eta=None):
    """
    Concentrate two DV-CV superpositions into one with a vacuum.

    Parameters
    ----------
    s1 : DCState
        State whose tail is attenuated
    s2 : DCState
        State consumed by the amplifier block
    n_max : int, optional
        Truncation of the CV tails, default 200
    prefix : str, optional
        Free DV block: "identity" keeps mu(1), "uniform" outputs a uniform prefix
    eta : float, optional
        Loss transmissivity, default the minimum 1 - c_chi2 chi2^2

    Returns
    -------
    tuple of (DCState, float, bool)
        The output state, the parallel prefactor eta_p = (1 - chi2^2) / eta and
        whether the block matrix is stochastic and maps the vectors correctly

    Raises
    ------
    StochasticityError
        If eta is below 1 - c_chi2 chi2^2
    """
    s1, s2 = s1.validated(), s2.validated()
    n_max = _check_size(n_max)
    chi_1, chi_2 = s1.chi, s2.chi
    eta_min = 1.0 - s2.c_chi * chi_2 * chi_2
    if eta is None:
        eta = eta_min
    eta = check_positive(eta, "eta")
    if eta > 1.0:
        raise DomainError(f"Transmissivity must not exceed 1, got {eta}")
    if eta < eta_min - DEFAULT_TOLERANCE:
        raise StochasticityError(f"eta={eta} is below the bound 1 - c chi2^2 = {eta_min}")
    eta_p = (1.0 - chi_2 * chi_2) / eta
    chi = chi_1 / math.sqrt(eta * (1.0 - chi_1 * chi_1) + chi_1 * chi_1)
    if chi > CHI_CAP:
        raise TruncationError(f"Concentrated chi={chi:.6f} exceeds the cap {CHI_CAP}")
    block, mu = _prefix_block(np.asarray(s1.mu, dtype=float), eta, prefix)
    out = DCState(s1.c_chi, mu, chi)

    n_in = _input_size(chi, n_max)
    first = block_diag(block, loss_matrix(eta, n_max, n_columns=n_in).entries)
    n_2 = len(s2.mu)
    top = np.zeros((n_2, n_max))
    top[:, 0] = np.asarray(s2.mu, dtype=float)
    shift = np.eye(n_max)
    shift[0, 0] = 0.0
    bottom = s2.c_chi * amp_matrix(1.0 / (1.0 - chi_2 * chi_2), n_max).entries
    second = np.vstack([(1.0 - s2.c_chi) * top, bottom + (1.0 - s2.c_chi) * shift])

    source = dc_schmidt(out, n_in).values
    mapped = np.outer(first @ source, second[:, 0])
    target = np.outer(dc_schmidt(s1, n_max).values, dc_schmidt(s2, n_max).values)
    residual = float(np.max(np.abs(mapped - target)))
    max_row_sum = float(first.sum(axis=1).max() * second.sum(axis=1).max())
    verified = (
        residual <= MAPPING_TOLERANCE
        and max_row_sum <= 1.0 + DEFAULT_TOLERANCE
        and bool(np.all(first >= 0))
        and bool(np.all(second >= 0))
    )
    return out, eta_p, verified
