"""Network response maps used by the feedback loop, and dataset export."""

import json
import math
from functools import lru_cache

import numpy as np
import pandas as pd
from annalist.annalist import Annalist
from annalist.decorators import ClassLogger

from negperc import baselines, bethe
from negperc.utils import DomainError, check_degree, check_unit_interval, find_root

annalizer = Annalist()

GRID_STEP = 1e-4


_EXACT = {
    "cv": bethe.infinite_sponge,
    "dv": baselines.conpt_sponge_bethe,
}


@lru_cache(maxsize=None)
def _response_grid(kind, k, lower, upper):
    n_points = max(2, math.ceil((upper - lower) / GRID_STEP) + 1)
    xs = np.linspace(lower, upper, n_points)
    func = _EXACT[kind]
    ys = np.array([func(k, float(x)) for x in xs])
    return xs, ys


class NetworkResponse:
    """Sponge-crossing output of an infinite Bethe network as a function of its link value.

    The output is exactly 0 below ``lower`` and exactly ``saturated`` above
    ``upper``; in between it is tabulated at step 1e-4 and interpolated
    linearly.
    """

    kind = ""

    @ClassLogger  # type:ignore
    def __init__(self, k, lower, upper, saturated=1.0, name=""):
        """
        Initialize NetworkResponse.

        Parameters
        ----------
        k : int
            Bethe lattice degree
        lower : float
            Threshold link value
        upper : float
            Saturation link value, 1 when the output never saturates
        saturated : float, optional
            Output above upper
        name : str, optional
            Name of the response
        """
        self.k = check_degree(k)
        self.lower = lower
        self.upper = upper
        self.saturated = saturated
        self.name = name or f"{self.kind}-{self.k}"
        self._xs, self._ys = _response_grid(self.kind, self.k, lower, upper)

    def __repr__(self):
        """NetworkResponse representation."""
        return repr(f"{type(self).__name__} '{self.name}'")

    def __call__(self, x):
        """Network output for link value x, memoized by the grid."""
        if x < self.lower:
            return 0.0
        if x >= self.upper:
            return self.saturated
        return float(np.interp(x, self._xs, self._ys))

    def exact(self, x):
        """Network output from the exact solver, bypassing the grid."""
        return _EXACT[self.kind](self.k, check_unit_interval(x))

    @property
    def jump(self):
        """float: Output just at the threshold (0 for a continuous transition)."""
        return float(self._ys[0])

    def inverse(self, target):
        """
        Link value whose network output equals target.

        Parameters
        ----------
        target : float
            Desired output, reachable by the response

        Returns
        -------
        float
            The link value

        Raises
        ------
        DomainError
            If the target lies in the jump or outside (0, 1)
        """
        target = check_unit_interval(target, name="target")
        if not self.jump < target < self.saturated:
            raise DomainError(
                f"Target {target} is not reachable by {self.name}, outputs span "
                f"({self.jump}, {self.saturated})"
            )
        return find_root(lambda x: self.exact(x) - target, self.lower, self.upper)


class CVBetheResponse(NetworkResponse):
    """Gaussian (NegPT) response, discontinuous at chi_th."""

    kind = "cv"

    def __init__(self, k, name=""):
        """Initialize CVBetheResponse, tabulated from chi_th to 1."""
        chi_th = bethe.critical_point(k).chi_th
        NetworkResponse.__init__(self, k, chi_th, 1.0, name=name)


class DVBetheResponse(NetworkResponse):
    """Qubit (concurrence percolation) response, continuous at c_th and 1 from c_sat."""

    kind = "dv"

    def __init__(self, k, name=""):
        """Initialize DVBetheResponse, tabulated from c_th to c_sat."""
        lower = baselines.conpt_threshold(k)
        upper = baselines.conpt_saturation(k)
        NetworkResponse.__init__(self, k, lower, upper, name=name)


def get_response(kind, k=3):
    """Return the response map matching the given kind.

    Parameters
    ----------
    kind : str
        "cv" or "dv"
    k : int, optional
        Bethe lattice degree, default 3

    Returns
    -------
    NetworkResponse
    """
    responses = {"cv": CVBetheResponse, "dv": DVBetheResponse}
    if kind not in responses:
        raise DomainError(f"Unknown response kind {kind!r}, use one of {sorted(responses)}")
    return responses[kind](k)


def frame_export_to_csv(file_location: str, frame: pd.DataFrame) -> None:
    """Export a scan or trajectory to csv without the index.

    Parameters
    ----------
    file_location : str
        Where the file is exported to
    frame : pd.DataFrame
        Data to be exported

    Returns
    -------
    None, but makes a file
    """
    frame.to_csv(str(file_location), index=False)


def records_to_json_lines(records) -> str:
    """One JSON object per line for a sequence of dicts."""
    return "".join(json.dumps(record, default=_json_default) + "\n" for record in records)


def records_export_to_json_lines(file_location: str, records) -> None:
    """Export reports as JSON lines."""
    with open(file_location, "w") as json_file:
        json_file.write(records_to_json_lines(records))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")
