"""Delayed decay of link entanglement under PID feedback."""

from typing import NamedTuple

import numpy as np
import pandas as pd
from annalist.annalist import Annalist
from annalist.decorators import ClassLogger

from negperc import data_acquisition, data_sources, evaluator
from negperc.utils import DomainError, StepSizeError, check_degree

annalizer = Annalist()

MAX_STEP_CHANGE = 0.1
SWEEP_AXES = ("T0", "alpha", "target")

EMPTY_TRAJECTORY = pd.DataFrame(columns=["t", "chi", "output", "u", "error"])
EMPTY_ISSUES = pd.DataFrame(
    columns=[
        "start_time",
        "end_time",
        "code",
        "comment",
        "series_type",
        "message_type",
    ]
)


class FeedbackConfig(NamedTuple):
    """
    Parameters of one feedback run.

    Attributes
    ----------
    tau : float
        Decay timescale
    T0 : float
        Transport delay of the control action
    kp, ki, kd : float
        PID gains
    alpha : float
        Scale applied to all three gains
    target : float
        Desired network output, in (0, 1)
    chi0 : float
        Initial link value
    dt : float
        Integrator step
    horizon : float
        Simulated time
    response : str
        "cv" for the Gaussian network, "dv" for the qubit network
    k : int
        Bethe lattice degree of the network
    activation_time : float or None
        Time from which the control acts, None to use T0
    """

    tau: float = 1.0
    T0: float = 0.02
    kp: float = 2.2
    ki: float = 100.0
    kd: float = 0.01
    alpha: float = 1.0
    target: float = 0.95
    chi0: float = 1.0
    dt: float = 1e-4
    horizon: float = 5.0
    response: str = "cv"
    k: int = 3
    activation_time: float | None = None

    def validated(self):
        """Return the config with checked fields, raising DomainError otherwise."""
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if not self.dt > 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if not self.T0 >= 0:
            raise DomainError(f"T0 must be nonnegative, got {self.T0}")
        if not self.horizon > self.T0:
            raise DomainError(f"horizon {self.horizon} must exceed T0 {self.T0}")
        if not 0.0 < self.target < 1.0:
            raise DomainError(f"target must lie in (0, 1), got {self.target}")
        if not 0.0 <= self.chi0 <= 1.0:
            raise DomainError(f"chi0 must lie in [0, 1], got {self.chi0}")
        if self.response not in ("cv", "dv"):
            raise DomainError(f"response must be 'cv' or 'dv', got {self.response!r}")
        if self.activation_time is not None and self.activation_time < 0:
            raise DomainError(f"activation_time must be nonnegative, got {self.activation_time}")
        check_degree(self.k)
        return self

    @property
    def activation(self):
        """float: Time from which the delayed control term is applied."""
        return self.T0 if self.activation_time is None else self.activation_time

    @classmethod
    def from_dict(cls, params):
        """Build a config from the matching keys of a mapping, ignoring the rest."""
        fields = {key: params[key] for key in cls._fields if key in params}
        if fields.get("chi0") == "saturation":
            # The link value at which the network output first reaches 1
            kind = fields.get("response", cls._field_defaults["response"])
            fields["chi0"] = data_sources.get_response(kind, int(fields.get("k", 3))).upper
        for key in fields.keys() - {"response", "activation_time", "k"}:
            fields[key] = float(fields[key])
        if "k" in fields:
            fields["k"] = int(fields["k"])
        return cls(**fields).validated()


def cv_response(k=3):
    """Gaussian network output X_SC(chi), see data_sources.CVBetheResponse."""
    return data_sources.get_response("cv", k)


def dv_response(k=3):
    """Qubit network output C_SC(c), see data_sources.DVBetheResponse."""
    return data_sources.get_response("dv", k)


def _delayed(u, known, position):
    # u linearly interpolated at a fractional step index, 0 before t = 0 and
    # held at the latest sample beyond it
    if position <= 0.0:
        return 0.0
    i = int(position)
    if i >= known:
        return u[known]
    frac = position - i
    return u[i] + frac * (u[i + 1] - u[i])


def simulate(config: FeedbackConfig, response=None) -> pd.DataFrame:
    """
    Integrate d chi/dt = -chi/tau + u(t - T0) with a PID controller.

    Parameters
    ----------
    config : FeedbackConfig
        Run parameters
    response : callable, optional
        Network output map, default the response named in the config

    Returns
    -------
    pd.DataFrame
        Columns t, chi, output, u, error at every step

    Raises
    ------
    StepSizeError
        If chi changes by more than 0.1 in a single step
    """
    config = config.validated()
    if response is None:
        response = data_sources.get_response(config.response, config.k)
    dt, tau = config.dt, config.tau
    n_steps = int(round(config.horizon / dt))
    lag = config.T0 / dt
    start = config.activation / dt
    kp, ki, kd = (config.alpha * gain for gain in (config.kp, config.ki, config.kd))

    chi = np.empty(n_steps + 1)
    output = np.empty(n_steps + 1)
    u = np.zeros(n_steps + 1)
    error = np.empty(n_steps + 1)
    chi[0] = config.chi0
    integral = 0.0
    for n in range(n_steps + 1):
        output[n] = response(chi[n])
        error[n] = config.target - output[n]
        if n > 0:
            integral += 0.5 * (error[n] + error[n - 1]) * dt
            derivative = (error[n] - error[n - 1]) / dt
            u[n] = kp * error[n] + ki * integral + kd * derivative
        if n == n_steps:
            break

        g = [
            _delayed(u, n, n + offset - lag) if n + offset > start else 0.0
            for offset in (0.0, 0.5, 1.0)
        ]
        x = chi[n]
        k1 = -x / tau + g[0]
        k2 = -(x + 0.5 * dt * k1) / tau + g[1]
        k3 = -(x + 0.5 * dt * k2) / tau + g[1]
        k4 = -(x + dt * k3) / tau + g[2]
        step = dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if abs(step) > MAX_STEP_CHANGE:
            raise StepSizeError(
                f"chi changed by {step:.3g} at t={n * dt:.6g}; reduce dt={dt}"
            )
        chi[n + 1] = min(1.0, max(0.0, x + step))

    return pd.DataFrame(
        {"t": np.arange(n_steps + 1) * dt, "chi": chi, "output": output, "u": u, "error": error}
    )


def parameter_sweep(base: FeedbackConfig, axis, values, band=0.02, window=1.0):
    """
    One run and one stability report per value of a config field.

    Parameters
    ----------
    base : FeedbackConfig
        Settings shared by the runs
    axis : str
        "T0", "alpha" or "target"
    values : list of float
        Values of the swept field
    band : float, optional
        Error band for the classification
    window : float, optional
        Trailing window for the classification

    Returns
    -------
    pd.DataFrame
        The swept value followed by the StabilityReport fields
    """
    if axis not in SWEEP_AXES:
        raise DomainError(f"Sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    response = data_sources.get_response(base.response, base.k)
    rows = []
    for value in values:
        config = base._replace(**{axis: float(value)})
        report = evaluator.classify_stability(
            simulate(config, response), band=band, window=window, target=config.target
        )
        rows.append({axis: float(value), **report.to_dict()})
    return pd.DataFrame(rows, columns=[axis, *evaluator.StabilityReport._fields])


def target_study(base: FeedbackConfig, targets, from_operating_point=False, excess=True):
    """
    Resource waste for several network targets.

    Parameters
    ----------
    base : FeedbackConfig
        Settings shared by the runs
    targets : list of float
        Network output targets
    from_operating_point : bool, optional
        Start each run at the link value meeting its target instead of base.chi0
    excess : bool, optional
        Passed to evaluator.resource_waste

    Returns
    -------
    pd.DataFrame
        Columns target, chi_target, waste and kind
    """
    response = data_sources.get_response(base.response, base.k)
    rows = []
    for target in targets:
        chi_target = response.inverse(target)
        config = base._replace(target=float(target))
        if from_operating_point:
            config = config._replace(chi0=chi_target)
        trajectory = simulate(config, response)
        report = evaluator.classify_stability(trajectory, target=config.target)
        rows.append(
            {
                "target": float(target),
                "chi_target": chi_target,
                "waste": evaluator.resource_waste(trajectory, chi_target, excess=excess),
                "kind": report.kind,
            }
        )
    return pd.DataFrame(rows, columns=["target", "chi_target", "waste", "kind"])


class FeedbackProcessor:
    """
    Processor holding one feedback run, its trajectory and its issue log.

    Attributes
    ----------
    _config : FeedbackConfig
        The run parameters.
    _trajectory : pd.DataFrame
        The simulated trajectory, empty until run.
    processing_issues : pd.DataFrame
        Issues met while running, in the layout of report_processing_issue.
    export_file_name : str
        Where the trajectory is exported to when no path is given.
    """

    @ClassLogger  # type:ignore
    def __init__(
        self,
        config: FeedbackConfig,
        name: str = "",
        band: float = 0.02,
        window: float = 1.0,
        export_file_name: str | None = None,
    ):
        """
        Initialize FeedbackProcessor.

        Parameters
        ----------
        config : FeedbackConfig
            Run parameters
        name : str, optional
            Name used in logs
        band : float, optional
            Error band for the classification
        window : float, optional
            Trailing window for the classification
        export_file_name : str, optional
            Default trajectory export path
        """
        self._config = config.validated()
        self.name = name
        self.band = band
        self.window = window
        self.export_file_name = export_file_name
        self._trajectory = EMPTY_TRAJECTORY.copy()
        self.processing_issues = EMPTY_ISSUES.copy()
        self.response = data_sources.get_response(config.response, config.k)

    def __repr__(self):
        """FeedbackProcessor representation."""
        return repr(f"FeedbackProcessor '{self.name}'")

    @classmethod
    def from_processing_parameters_dict(cls, processing_parameters):
        """
        Initialises a FeedbackProcessor given a parameter dict.

        Parameters
        ----------
        processing_parameters : dict
            analyst_name, format and optional logfile for annalist, and the
            FeedbackConfig fields

        Returns
        -------
        FeedbackProcessor, Annalist
        """
        ann = Annalist()
        ann.configure(
            logfile=processing_parameters.get("logfile", None),
            analyst_name=processing_parameters["analyst_name"],
            stream_format_str=processing_parameters["format"].get("stream", None),
            file_format_str=processing_parameters["format"].get("file", None),
        )

        config = FeedbackConfig.from_dict(processing_parameters)
        extras = {
            key: processing_parameters[key]
            for key in ("name", "band", "window", "export_file_name")
            if key in processing_parameters
        }
        return cls(config, **extras), ann

    @classmethod
    def from_config_yaml(cls, config_path):
        """
        Initialises a FeedbackProcessor given a config file.

        Parameters
        ----------
        config_path : string
            Path to config.yaml.

        Returns
        -------
        FeedbackProcessor, Annalist
        """
        processing_parameters = data_acquisition.config_yaml_import(config_path)
        if "preset" in processing_parameters:
            # Values in the file override the preset they start from
            preset = dict(data_acquisition.get_preset(processing_parameters["preset"]))
            preset.update(processing_parameters)
            processing_parameters = preset
        processing_parameters.setdefault("analyst_name", "negperc")
        processing_parameters.setdefault("format", {})
        processing_parameters.setdefault("name", processing_parameters.get("preset", ""))
        return cls.from_processing_parameters_dict(processing_parameters)

    @property
    def config(self):  # type: ignore
        """FeedbackConfig: The run parameters."""
        return self._config

    @ClassLogger
    @config.setter
    def config(self, value):
        self._config = value.validated()
        self.response = data_sources.get_response(value.response, value.k)
        self._trajectory = EMPTY_TRAJECTORY.copy()

    @property
    def trajectory(self) -> pd.DataFrame:  # type: ignore
        """pd.DataFrame: The simulated trajectory."""
        return self._trajectory

    @ClassLogger
    @trajectory.setter
    def trajectory(self, value):
        self._trajectory = value

    @ClassLogger
    def run(self):
        """Simulate the configured run and store the trajectory."""
        try:
            self.trajectory = simulate(self.config, self.response)
        except StepSizeError as e:
            self.report_processing_issue(
                start_time=0.0,
                end_time=self.config.horizon,
                code="STP",
                comment=str(e),
                series_type="chi",
                message_type="error",
            )
            raise
        for time in evaluator.collapse_events(self.trajectory):
            self.report_processing_issue(
                start_time=time,
                code="COL",
                comment="Network output collapsed to zero",
                series_type="output",
                message_type="warning",
            )
        return self.trajectory

    def _require_trajectory(self):
        if self.trajectory.empty:
            raise DomainError(f"{self} has no trajectory, call run() first")

    @ClassLogger
    def classify(self):
        """Stability report of the stored trajectory."""
        self._require_trajectory()
        report = evaluator.classify_stability(
            self.trajectory, band=self.band, window=self.window, target=self.config.target
        )
        self.report_processing_issue(
            start_time=report.settling_time,
            end_time=self.config.horizon,
            code=report.kind[:3].upper(),
            comment=f"{report.threshold_crossings} collapses, overshoot {report.max_overshoot:.4g}",
            series_type="output",
            message_type="info" if report.kind == evaluator.STABILIZED else "warning",
        )
        return report

    def waste(self, excess=False):
        """Resource waste of the stored trajectory above the link value meeting the target."""
        self._require_trajectory()
        chi_target = self.response.inverse(self.config.target)
        return evaluator.resource_waste(self.trajectory, chi_target, excess=excess)

    def export_trajectory(self, file_location=None):
        """Write the trajectory as csv with columns t, chi, output, u, error."""
        self._require_trajectory()
        file_location = file_location or self.export_file_name
        if file_location is None:
            raise DomainError("No export location given")
        data_sources.frame_export_to_csv(file_location, self.trajectory)

    def report_processing_issue(
        self,
        start_time=None,
        end_time=None,
        code=None,
        comment=None,
        series_type=None,
        message_type=None,
    ):
        """
        Add an issue to be reported for processing usage.

        Parameters
        ----------
        start_time : float | None
            The start time of the issue.
        end_time : float | None
            The end time of the issue.
        code : str | None
            The code of the issue.
        comment : str | None
            The comment of the issue.
        series_type : str | None
            The column the issue is related to.
        message_type : str | None
            Should be one of: ["debug", "info", "warning", "error"]
        """
        self.processing_issues = pd.concat(
            [
                pd.DataFrame(
                    [[start_time, end_time, code, comment, series_type, message_type]],
                    columns=self.processing_issues.columns,
                    dtype=object,
                ),
                self.processing_issues,
            ],
            ignore_index=True,
        )
