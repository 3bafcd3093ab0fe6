"""Tools for judging feedback trajectories: stability, collapses and resource waste."""

from typing import NamedTuple

import numpy as np
import pandas as pd
from annalist.annalist import Annalist
from scipy.integrate import trapezoid

from negperc.utils import DomainError

annalizer = Annalist()

STABILIZED = "Stabilized"
OSCILLATING = "Oscillating"
COLLAPSED = "Collapsed"


class StabilityReport(NamedTuple):
    """Classification of a feedback trajectory."""

    kind: str
    settling_time: float | None
    threshold_crossings: int
    max_overshoot: float

    def to_dict(self):
        """Report as a JSON-ready dict."""
        return self._asdict()


def run_finder(mask) -> list:
    """
    Find the starts and lengths of runs of True values.

    Parameters
    ----------
    mask : array_like of bool
        Input flags

    Returns
    -------
    list :
        List of (start index, run length) tuples
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        return []
    # Positions where the flag changes, plus both ends
    idx0 = np.flatnonzero(np.r_[True, np.diff(mask.astype(np.int8)) != 0, True])
    count = np.diff(idx0)
    starts = idx0[:-1]
    valid = mask[starts]
    return list(zip(starts[valid].tolist(), count[valid].tolist(), strict=True))


def collapse_events(trajectory: pd.DataFrame) -> list:
    """
    Times at which the network output drops from a positive value to zero.

    Parameters
    ----------
    trajectory : pd.DataFrame
        Columns t and output

    Returns
    -------
    list of float
        Start time of every collapse after the first sample
    """
    runs = run_finder(trajectory["output"].to_numpy() == 0.0)
    times = trajectory["t"].to_numpy()
    return [float(times[start]) for start, _ in runs if start > 0]


def settling_time(trajectory: pd.DataFrame, band=0.02):
    """
    Earliest time after which |error| stays below band, None if it never settles.

    Parameters
    ----------
    trajectory : pd.DataFrame
        Columns t and error
    band : float, optional
        Error band

    Returns
    -------
    float or None
    """
    outside = np.abs(trajectory["error"].to_numpy()) >= band
    if outside.size == 0 or outside[-1]:
        return None
    if not outside.any():
        return float(trajectory["t"].iloc[0])
    last = np.flatnonzero(outside)[-1]
    return float(trajectory["t"].iloc[last + 1])


def max_overshoot(trajectory: pd.DataFrame, target):
    """
    Largest excess of the output over the target once it has first dropped below it.

    Parameters
    ----------
    trajectory : pd.DataFrame
        Column output
    target : float
        Desired network output

    Returns
    -------
    float
        Nonnegative overshoot, measured over the whole run if the output never
        drops below the target
    """
    output = trajectory["output"].to_numpy()
    below = np.flatnonzero(output < target)
    after = output[below[0] :] if below.size else output
    return float(max(0.0, np.max(after - target)))


def classify_stability(trajectory: pd.DataFrame, band=0.02, window=1.0, target=None):
    """
    Classify a feedback trajectory.

    Parameters
    ----------
    trajectory : pd.DataFrame
        Columns t, output and error
    band : float, optional
        Error band, 0 < band < 0.5
    window : float, optional
        Length of the trailing window, shorter than the run
    target : float, optional
        Desired output for the overshoot, default recovered from the first
        sample as output + error

    Returns
    -------
    StabilityReport
        Stabilized if |error| < band over the trailing window, Collapsed if the
        output is zero throughout it, Oscillating otherwise
    """
    if not 0.0 < band < 0.5:
        raise DomainError(f"Band must lie in (0, 0.5), got {band}")
    times = trajectory["t"].to_numpy()
    if times.size < 2 or not 0.0 < window < times[-1] - times[0]:
        raise DomainError(f"Window {window} must be positive and shorter than the run")
    if target is None:
        target = float(trajectory["output"].iloc[0] + trajectory["error"].iloc[0])

    trailing = trajectory[times >= times[-1] - window]
    if bool((np.abs(trailing["error"]) < band).all()):
        kind = STABILIZED
    elif bool((trailing["output"] == 0.0).all()):
        kind = COLLAPSED
    else:
        kind = OSCILLATING
    return StabilityReport(
        kind,
        settling_time(trajectory, band),
        len(collapse_events(trajectory)),
        max_overshoot(trajectory, target),
    )


def resource_waste(trajectory: pd.DataFrame, chi_target, excess=False):
    """
    Entanglement spent above the link value that meets the target.

    Parameters
    ----------
    trajectory : pd.DataFrame
        Columns t and chi
    chi_target : float
        Link value whose network output is the target, in (0, 1)
    excess : bool, optional
        Integrate chi(t) - chi_target instead of chi(t), default False

    Returns
    -------
    float
        Trapezoidal integral over the times where chi(t) > chi_target
    """
    if not 0.0 < chi_target < 1.0:
        raise DomainError(f"chi_target must lie in (0, 1), got {chi_target}")
    chi = trajectory["chi"].to_numpy()
    integrand = chi - chi_target if excess else chi
    integrand = np.where(chi > chi_target, integrand, 0.0)
    return float(trapezoid(integrand, trajectory["t"].to_numpy()))
