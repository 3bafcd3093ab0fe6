"""Command line front end emitting figure-ready datasets."""

import argparse
import json
import logging
import math
import sys

import numpy as np
import pandas as pd
from annalist.annalist import Annalist

import negperc
from negperc import (
    baselines,
    bethe,
    data_acquisition,
    data_sources,
    evaluator,
    feedback,
    locc,
    sp_reduce,
)
from negperc.utils import DomainError, parse_grid

STREAM_FORMAT = "%(function_name)s | %(message)s"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULTS = {
    "sponge": {"depth": "inf", "chi_grid": "0:1:0.001", "eta_s": 1.0, "eta_p": 1.0},
    "critical": {"k": 3, "fit": [], "eta_s": 1.0, "eta_p": 1.0},
    "feedback": {"band": 0.02, "window": 1.0},
    "verify-concentration": {"nmax": 200},
    "gpovm": {},
    "lemma2": {},
    "nongaussian": {"nmax": 200, "prefix": "identity", "mu1": [], "mu2": []},
    "interdependent": {"k": 3, "M": 2},
    "conpt": {"k": 3},
    "preset": {},
    "presets": {},
}

FITS = {
    "beta": bethe.beta_exponent,
    "correlation": bethe.correlation_exponent,
    "shift": bethe.shift_exponent,
    "saturation": bethe.saturation_exponent,
}


def _depth(value):
    if str(value).lower() in ("inf", "infinite"):
        return math.inf
    depth = int(value)
    if depth < 1:
        raise DomainError(f"Depth must be a positive integer or 'inf', got {value}")
    return depth


def _chi_values(settings):
    if settings.get("chi") is not None:
        return np.array([float(settings["chi"])])
    return parse_grid(settings["chi_grid"])


def sponge_dataset(settings):
    """Sponge-crossing values for the topology named in settings, columns chi, x_sc."""
    eta_s, eta_p = float(settings["eta_s"]), float(settings["eta_p"])
    if settings.get("graph"):
        graph = data_acquisition.import_graph(settings["graph"])
        value = graph.reduce(eta_s=eta_s, eta_p=eta_p)
        return pd.DataFrame({"graph": [graph.name], "x_sc": [value]})

    chis = _chi_values(settings)
    if settings.get("bethe") is not None:
        k, depth = int(settings["bethe"]), _depth(settings["depth"])
        if (eta_s, eta_p) == (1.0, 1.0):
            return bethe.sponge_scan(k, chis, depth=depth)[["chi", "x_sc"]]
        if depth == math.inf:
            values = [bethe.generalized_infinite_sponge(k, c, eta_s, eta_p) for c in chis]
        else:
            values = bethe.generalized_finite_depth_sponge(k, depth, chis, eta_s, eta_p)
        return pd.DataFrame({"chi": chis, "x_sc": values})

    if settings.get("chain") is not None:
        n = int(settings["chain"])

        def topology(c):
            return sp_reduce.chain_graph(n, c).reduce(eta_s=eta_s, eta_p=eta_p)

    elif settings.get("parallel") is not None:
        n = int(settings["parallel"])

        def topology(c):
            return sp_reduce.bundle_graph(n, c).reduce(eta_s=eta_s, eta_p=eta_p)

    elif settings.get("wheatstone"):
        topology = sp_reduce.wheatstone_sponge
    elif settings.get("kelvin"):
        topology = sp_reduce.kelvin_sponge
    else:
        raise DomainError(
            "Give a topology: --bethe K, --chain N, --parallel K, --wheatstone, --kelvin or --graph FILE"
        )
    return pd.DataFrame({"chi": chis, "x_sc": [topology(float(c)) for c in chis]})


def critical_record(settings):
    """Threshold, jump and requested exponent fits as a dict."""
    k = int(settings["k"])
    eta_s, eta_p = float(settings["eta_s"]), float(settings["eta_p"])
    if (eta_s, eta_p) != (1.0, 1.0):
        diagnosis = bethe.generalized_phase_classify(k, eta_s, eta_p)
        return {"k": k, "eta_s": eta_s, "eta_p": eta_p, **diagnosis._asdict()}
    point = bethe.critical_point(k)
    record = {"k": k, **point._asdict()}
    fits = settings.get("fit") or []
    unknown = set(fits) - set(FITS)
    if unknown:
        raise DomainError(f"Unknown fits {sorted(unknown)}, use {sorted(FITS)}")
    if fits:
        record["fits"] = {name: FITS[name](k).to_dict() for name in fits}
    return record


def feedback_result(settings):
    """Stability report, sweep table or target study for a feedback run."""
    axis = settings.get("sweep") or settings.get("axis")
    if axis:
        base = feedback.FeedbackConfig.from_dict(settings)
        values = [float(v) for v in settings["values"]]
        return feedback.parameter_sweep(
            base, axis, values, float(settings["band"]), float(settings["window"])
        )
    if settings.get("targets"):
        base = feedback.FeedbackConfig.from_dict(settings)
        return feedback.target_study(
            base,
            [float(t) for t in settings["targets"]],
            from_operating_point=bool(settings.get("from_operating_point", False)),
            excess=bool(settings.get("excess", True)),
        )
    processor = feedback.FeedbackProcessor(
        feedback.FeedbackConfig.from_dict(settings),
        name=settings.get("preset", ""),
        band=float(settings["band"]),
        window=float(settings["window"]),
        export_file_name=settings.get("trajectory"),
    )
    processor.run()
    if settings.get("trajectory"):
        processor.export_trajectory()
    report = processor.classify().to_dict()
    report["waste"] = processor.waste(excess=bool(settings.get("excess", False)))
    return report


def _dc_state(settings, index):
    return locc.DCState(
        float(settings[f"c{index}"]),
        tuple(float(m) for m in settings[f"mu{index}"]),
        float(settings[f"chi{index}"]),
    )


def locc_record(action, settings):
    """Result of one LOCC check as a dict."""
    if action == "verify-concentration":
        report = locc.verify_concentration(
            float(settings["r1"]), float(settings["r2"]), int(settings["nmax"])
        )
        return report.to_dict()
    if action == "gpovm":
        a, c, r = locc.gpovm_swap(
            float(settings["r1"]), float(settings["r2"]), float(settings["r0"])
        )
        return {"a": a, "c": c, "r": r, "chi": math.tanh(r)}
    if action == "lemma2":
        args = [float(settings[key]) for key in ("r1", "r2", "r1p", "r2p")]
        return {"convertible": locc.lemma2_convertible(*args)}
    out, eta_p, verified = locc.nongaussian_concentrate(
        _dc_state(settings, 1),
        _dc_state(settings, 2),
        n_max=int(settings["nmax"]),
        prefix=settings["prefix"],
    )
    return {
        "c_chi": out.c_chi,
        "mu": list(out.mu),
        "chi": out.chi,
        "eta_p": eta_p,
        "verified": verified,
    }


def baseline_result(action, settings):
    """Threshold record, or a scan when a grid is given."""
    k = int(settings["k"])
    if action == "interdependent":
        M = int(settings["M"])
        if settings.get("p_grid"):
            return baselines.interdependent_scan(k, M, parse_grid(settings["p_grid"]))
        p_th, p_plus = baselines.interdependent_critical(k, M)
        return {"k": k, "M": M, "p_th": p_th, "P_plus": p_plus}
    if settings.get("c_grid"):
        return baselines.conpt_scan(k, parse_grid(settings["c_grid"]))
    return {
        "k": k,
        "c_th": baselines.conpt_threshold(k),
        "c_sat": baselines.conpt_saturation(k),
    }


def _generalized_dataset(preset):
    k = int(preset["k"])
    chis = parse_grid(preset["chi_grid"])
    frames = []
    for eta_s, eta_p in preset["pairs"]:
        diagnosis = bethe.generalized_phase_classify(k, eta_s, eta_p)
        values = [bethe.generalized_infinite_sponge(k, c, eta_s, eta_p) for c in chis]
        frames.append(
            pd.DataFrame(
                {
                    "eta_s": eta_s,
                    "eta_p": eta_p,
                    "kind": diagnosis.kind,
                    "chi": chis,
                    "x_sc": values,
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def _depth_profile_dataset(preset):
    k = int(preset["k"])
    chis = np.asarray(preset["chis"], dtype=float)
    depths = np.unique(np.geomspace(1, int(preset["max_depth"]), int(preset["n_depths"])).astype(int))
    frames = [
        pd.DataFrame(
            {"k": k, "chi": chis, "depth": int(l), "x_sc": bethe.finite_depth_sponge(k, int(l), chis)}
        )
        for l in depths
    ]
    return pd.concat(frames, ignore_index=True)


def _sponge_preset(preset):
    chis = parse_grid(preset["chi_grid"])
    frames = []
    for k in preset["ks"]:
        for depth in preset.get("depths", ["inf"]):
            scan = bethe.sponge_scan(int(k), chis, depth=_depth(depth))
            if preset.get("nonphysical") and scan["depth"].iloc[0] == math.inf:
                scan["x_nonphysical"] = [
                    bethe.infinite_sponge(int(k), c, nonphysical=True) for c in chis
                ]
            frames.append(scan)
    return pd.concat(frames, ignore_index=True)


def _correlation_preset(preset):
    k = int(preset["k"])
    chi_th = bethe.critical_point(k).chi_th
    deltas = np.geomspace(*preset["window"], int(preset["n_points"]))
    scan = bethe.correlation_scan(k, chi_th - deltas, crossing=float(preset.get("crossing", 0.5)))
    scan.insert(2, "delta", deltas)
    return scan


def _responses_preset(preset):
    k = int(preset["k"])
    xs = parse_grid(preset["grid"])
    return pd.DataFrame(
        {
            "x": xs,
            "x_sc": [bethe.infinite_sponge(k, x) for x in xs],
            "c_sc": [baselines.conpt_sponge_bethe(k, x) for x in xs],
        }
    )


def _feedback_preset(preset):
    config = feedback.FeedbackConfig.from_dict(preset)
    return feedback.simulate(config)


def _sweep_preset(preset):
    base = feedback.FeedbackConfig.from_dict(preset)
    return feedback.parameter_sweep(
        base,
        preset["axis"],
        preset["values"],
        float(preset.get("band", 0.02)),
        float(preset.get("window", 1.0)),
    )


def _target_preset(preset):
    base = feedback.FeedbackConfig.from_dict(preset)
    return feedback.target_study(
        base,
        preset["targets"],
        from_operating_point=bool(preset.get("from_operating_point", False)),
        excess=bool(preset.get("excess", True)),
    )


def _finite_size_preset(preset):
    depths = range(int(preset["min_depth"]), int(preset["max_depth"]) + 1)
    return bethe.finite_size_scan(int(preset["k"]), depths)


def _interdependent_preset(preset):
    ps = parse_grid(preset["p_grid"])
    frames = [baselines.interdependent_scan(int(preset["k"]), int(M), ps) for M in preset["Ms"]]
    return pd.concat(frames, ignore_index=True)


PRESET_BUILDERS = {
    "sponge": _sponge_preset,
    "depth_profile": _depth_profile_dataset,
    "correlation": _correlation_preset,
    "finite_size": _finite_size_preset,
    "generalized": _generalized_dataset,
    "responses": _responses_preset,
    "feedback": _feedback_preset,
    "sweep": _sweep_preset,
    "target_study": _target_preset,
    "interdependent": _interdependent_preset,
}


def build_dataset(name, file_name=None):
    """
    Dataset of a named figure preset.

    Parameters
    ----------
    name : str
        Preset name, see ``negperc presets``
    file_name : str, optional
        Presets YAML, default the packaged one

    Returns
    -------
    pd.DataFrame
    """
    preset = data_acquisition.get_preset(name, file_name)
    kind = preset.get("kind")
    if kind not in PRESET_BUILDERS:
        raise DomainError(f"Preset {name!r} has unknown kind {kind!r}")
    return PRESET_BUILDERS[kind](preset)


def preset_listing(file_name=None):
    """Preset names with their kind and description."""
    presets = data_acquisition.load_presets(file_name)
    return pd.DataFrame(
        [
            {"name": name, "kind": p.get("kind"), "description": p.get("description", "")}
            for name, p in presets.items()
        ],
        columns=["name", "kind", "description"],
    )


def emit(result, fmt="csv", output=None):
    """Write a DataFrame or dict(s) to output, stdout when None."""
    if isinstance(result, dict):
        result = [result]
    if fmt == "json":
        if isinstance(result, pd.DataFrame):
            result = json.loads(result.to_json(orient="records"))
        text = data_sources.records_to_json_lines(result)
    else:
        frame = result if isinstance(result, pd.DataFrame) else pd.json_normalize(result)
        text = frame.to_csv(index=False)
    if output:
        with open(output, "w") as out_file:
            out_file.write(text)
    else:
        sys.stdout.write(text)


def _add_common(parser):
    parser.add_argument("--format", choices=["csv", "json"], default=None, help="Output format")
    parser.add_argument("--output", "-o", default=None, help="Write data here instead of stdout")
    parser.add_argument("--config", default=None, help="YAML file of option values")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log steps on stderr")


def build_parser():
    """Argument parser with one subcommand per task."""
    parser = argparse.ArgumentParser(
        prog="negperc",
        description="Negativity percolation on continuous-variable quantum networks",
    )
    parser.add_argument("--version", action="version", version=f"negperc {negperc.__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p_sponge = subparsers.add_parser("sponge", help="Sponge-crossing values on a topology")
    topology = p_sponge.add_mutually_exclusive_group()
    topology.add_argument("--bethe", type=int, metavar="K", help="Bethe lattice of degree K")
    topology.add_argument("--chain", type=int, metavar="N", help="Chain of N links")
    topology.add_argument("--parallel", type=int, metavar="K", help="K parallel links")
    topology.add_argument("--wheatstone", action="store_true", default=None)
    topology.add_argument("--kelvin", action="store_true", default=None)
    topology.add_argument("--graph", metavar="FILE", help="Edge list or JSON network")
    p_sponge.add_argument("--depth", help="Bethe depth, an integer or 'inf'")
    p_sponge.add_argument("--chi", type=float, help="Single link value")
    p_sponge.add_argument("--chi-grid", help="Grid 'start:stop:step'")
    p_sponge.add_argument("--eta-s", type=float, help="Series prefactor")
    p_sponge.add_argument("--eta-p", type=float, help="Parallel prefactor")
    _add_common(p_sponge)

    p_critical = subparsers.add_parser("critical", help="Bethe threshold, jump and exponents")
    p_critical.add_argument("--k", type=int, help="Degree")
    p_critical.add_argument("--fit", action="append", choices=sorted(FITS), help="Exponent fit")
    p_critical.add_argument("--eta-s", type=float, help="Series prefactor")
    p_critical.add_argument("--eta-p", type=float, help="Parallel prefactor")
    _add_common(p_critical)

    p_feedback = subparsers.add_parser("feedback", help="PID feedback against decay")
    p_feedback.add_argument("--preset", help="Feedback preset name")
    p_feedback.add_argument("--response", choices=["cv", "dv"])
    for name in ("tau", "T0", "kp", "ki", "kd", "alpha", "target", "dt", "horizon"):
        p_feedback.add_argument(f"--{name}", type=float)
    p_feedback.add_argument("--chi0", help="Initial link value, or 'saturation'")
    p_feedback.add_argument("--k", type=int)
    p_feedback.add_argument("--activation-time", type=float)
    p_feedback.add_argument("--band", type=float)
    p_feedback.add_argument("--window", type=float)
    p_feedback.add_argument("--trajectory", metavar="FILE", help="Write the trajectory csv")
    p_feedback.add_argument("--sweep", choices=feedback.SWEEP_AXES, help="Swept field")
    p_feedback.add_argument("--values", type=float, nargs="+", help="Swept values")
    p_feedback.add_argument("--targets", type=float, nargs="+", help="Targets for a waste study")
    p_feedback.add_argument("--excess", action="store_true", default=None)
    _add_common(p_feedback)

    p_locc = subparsers.add_parser("locc", help="LOCC convertibility checks")
    locc_actions = p_locc.add_subparsers(dest="action", required=True)
    p_verify = locc_actions.add_parser("verify-concentration")
    p_verify.add_argument("--r1", type=float)
    p_verify.add_argument("--r2", type=float)
    p_verify.add_argument("--nmax", type=int)
    _add_common(p_verify)
    p_gpovm = locc_actions.add_parser("gpovm")
    for name in ("r1", "r2", "r0"):
        p_gpovm.add_argument(f"--{name}", type=float)
    _add_common(p_gpovm)
    p_lemma = locc_actions.add_parser("lemma2")
    for name in ("r1", "r2", "r1p", "r2p"):
        p_lemma.add_argument(f"--{name}", type=float)
    _add_common(p_lemma)
    p_nongaussian = locc_actions.add_parser("nongaussian")
    for index in (1, 2):
        p_nongaussian.add_argument(f"--c{index}", type=float)
        p_nongaussian.add_argument(f"--mu{index}", type=float, nargs="*")
        p_nongaussian.add_argument(f"--chi{index}", type=float)
    p_nongaussian.add_argument("--nmax", type=int)
    p_nongaussian.add_argument("--prefix", choices=["identity", "uniform"])
    _add_common(p_nongaussian)

    p_baseline = subparsers.add_parser("baseline", help="Classical and DV comparison models")
    baseline_actions = p_baseline.add_subparsers(dest="action", required=True)
    p_inter = baseline_actions.add_parser("interdependent")
    p_inter.add_argument("--k", type=int)
    p_inter.add_argument("--M", type=int)
    p_inter.add_argument("--p-grid")
    _add_common(p_inter)
    p_conpt = baseline_actions.add_parser("conpt")
    p_conpt.add_argument("--k", type=int)
    p_conpt.add_argument("--c-grid")
    _add_common(p_conpt)

    p_preset = subparsers.add_parser("preset", help="Emit a named figure dataset")
    p_preset.add_argument("name")
    _add_common(p_preset)

    p_presets = subparsers.add_parser("presets", help="List preset names")
    _add_common(p_presets)
    return parser


def resolve_settings(args):
    """
    Merge defaults, the --config file and the given flags, in that order.

    Returns
    -------
    dict
    """
    task = args.action if getattr(args, "action", None) else args.command
    settings = dict(DEFAULTS.get(task, {}))
    if task == "feedback" and args.preset:
        settings.update(data_acquisition.get_preset(args.preset))
    if args.config:
        file_values = data_acquisition.config_yaml_import(args.config)
        # An annalist format block belongs to FeedbackProcessor, not to the output format
        if isinstance(file_values.get("format"), dict):
            file_values.pop("format")
        settings.update({key.replace("-", "_"): value for key, value in file_values.items()})
    flags = {
        key: value
        for key, value in vars(args).items()
        if value is not None and key not in ("command", "action", "config", "verbose")
    }
    settings.update(flags)
    settings.setdefault("format", "json" if task in _RECORD_TASKS else "csv")
    return settings


_RECORD_TASKS = {"critical", "feedback", "verify-concentration", "gpovm", "lemma2", "nongaussian"}


def dispatch(args, settings):
    """Run the task and return its data and exit code."""
    if args.command == "sponge":
        return sponge_dataset(settings), EXIT_OK
    if args.command == "critical":
        return critical_record(settings), EXIT_OK
    if args.command == "feedback":
        return feedback_result(settings), EXIT_OK
    if args.command == "locc":
        record = locc_record(args.action, settings)
        failed = record.get("pass") is False or record.get("verified") is False
        return record, EXIT_NUMERIC if failed else EXIT_OK
    if args.command == "baseline":
        return baseline_result(args.action, settings), EXIT_OK
    if args.command == "preset":
        return build_dataset(settings["name"]), EXIT_OK
    return preset_listing(), EXIT_OK


def configure_logging(verbose=False):
    """Send annalist records to stderr, only at warning level unless verbose."""
    ann = Annalist()
    ann.configure(analyst_name="negperc", stream_format_str=STREAM_FORMAT)
    ann.logger.setLevel(logging.INFO if verbose else logging.WARNING)
    return ann


def main(argv=None) -> int:
    """
    Entry point of the ``negperc`` command.

    Returns
    -------
    int
        0 on success, 2 for usage or validation errors, 3 for numeric failures
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    configure_logging(args.verbose)
    try:
        settings = resolve_settings(args)
        result, code = dispatch(args, settings)
    except DomainError as e:
        print(f"negperc: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as e:
        print(f"negperc: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (KeyError, TypeError, ValueError) as e:
        print(f"negperc: invalid settings: {e}", file=sys.stderr)
        return EXIT_USAGE
    emit(result, settings["format"], settings.get("output"))
    if isinstance(result, dict) and "kind" in result and result.get("kind") in (
        evaluator.COLLAPSED,
        evaluator.OSCILLATING,
    ):
        print(f"negperc: feedback run is {result['kind']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
