"""Command-line interface: fit, score, sweep, verify, and event scans.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 numeric non-convergence (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from xml.etree import ElementTree as ET

import numpy as np

from .dataset import Dataset, load_csv
from .experiments import (ExperimentConfig, analytic_event_probability,
                          catastrophic_statistic, detect_unfortunate_events,
                          fit_interpolator, heavy_tail_diagnostic, run_sweep,
                          sample_iid, tempered_statistic, trial_rng)
from .interpolators import envelope, linear_spline
from .pwl import PiecewiseLinear
from .risk import GaussianNoise, reconstruction_risk, risk_report
from .solver import minnorm_interpolate
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3


class UsageError(Exception):
    pass


def _parse_noise(text: str) -> GaussianNoise:
    kind, _, arg = text.partition(":")
    if kind != "gaussian":
        raise UsageError(f"unsupported noise {text!r}; expected gaussian:<sigma>")
    try:
        sigma = float(arg)
    except ValueError as exc:
        raise UsageError(f"bad sigma in {text!r}") from exc
    if sigma < 0:
        raise UsageError("sigma must be non-negative")
    return GaussianNoise(sigma)


def _parse_target(text: str) -> PiecewiseLinear:
    if text == "zero":
        return PiecewiseLinear.zero()
    kind, _, path = text.partition(":")
    if kind != "csv" or not path:
        raise UsageError(f"unsupported target {text!r}; expected zero or csv:<path>")
    try:
        return linear_spline(load_csv(path))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot build target from {path!r}: {exc}") from exc


def _parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok)
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _log_config(command: str, resolved: dict) -> None:
    print(json.dumps({"command": command, **resolved}, default=str), file=sys.stderr)


# -- SVG ------------------------------------------------------------------------


def render_svg(path, dataset: Dataset, function: PiecewiseLinear,
               envelopes=None, width: int = 720, height: int = 440) -> None:
    """Plot the samples, the fitted function, and optional envelope shading."""
    margin = 40.0
    grid = np.linspace(0.0, 1.0, 512)
    xs = np.unique(np.concatenate([grid, function.breakpoints_in(0.0, 1.0)]))
    fy = np.asarray(function(xs))
    ys = [np.asarray(dataset.y), fy]
    if envelopes:
        for env in envelopes:
            if env.x_hi > env.x_lo:
                exs = np.linspace(env.x_lo, env.x_hi, 32)
                ys.append(np.asarray(env.lower(exs)))
                ys.append(np.asarray(env.upper(exs)))
    y_all = np.concatenate(ys)
    y_lo, y_hi = float(np.min(y_all)), float(np.max(y_all))
    pad = 0.05 * max(y_hi - y_lo, 1e-9)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(v):
        return margin + v * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                      viewBox=f"0 0 {width} {height}",
                      width=str(width), height=str(height))
    ET.SubElement(root, "rect", x="0", y="0", width=str(width), height=str(height),
                  fill="white")
    if envelopes:
        for env in envelopes:
            if env.x_hi <= env.x_lo:
                continue
            exs = np.linspace(env.x_lo, env.x_hi, 32)
            lower = np.asarray(env.lower(exs))
            upper = np.asarray(env.upper(exs))
            pts = [f"{sx(v):.2f},{sy(w):.2f}" for v, w in zip(exs, upper)]
            pts += [f"{sx(v):.2f},{sy(w):.2f}" for v, w in zip(exs[::-1], lower[::-1])]
            ET.SubElement(root, "polygon", points=" ".join(pts),
                          fill="#cfe8ff", stroke="none", opacity="0.7")
    ET.SubElement(root, "rect", x=str(margin), y=str(margin),
                  width=str(width - 2 * margin), height=str(height - 2 * margin),
                  fill="none", stroke="#888", **{"stroke-width": "1"})
    line_pts = " ".join(f"{sx(v):.2f},{sy(w):.2f}" for v, w in zip(xs, fy))
    ET.SubElement(root, "polyline", points=line_pts, fill="none",
                  stroke="#1a7f37", **{"stroke-width": "1.5"})
    for xi, yi in zip(dataset.x, dataset.y):
        ET.SubElement(root, "circle", cx=f"{sx(float(xi)):.2f}",
                      cy=f"{sy(float(yi)):.2f}", r="3", fill="#b02a37")
    ET.ElementTree(root).write(path, xml_declaration=True, encoding="unicode")


# -- subcommands ----------------------------------------------------------------


def _function_to_doc(function: PiecewiseLinear, method: str, converged: bool,
                     cost: float) -> dict:
    doc = json.loads(function.to_json())
    doc["metadata"] = {"method": method, "converged": converged, "cost": cost}
    return doc


def cmd_interpolate(args) -> int:
    try:
        dataset = load_csv(args.input)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read dataset: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _log_config("interpolate", {"input": args.input, "method": args.method,
                                "output": args.output, "svg": args.svg})
    function, cost, converged = fit_interpolator(dataset, args.method)
    doc = _function_to_doc(function, args.method, converged, cost)
    Path(args.output).write_text(json.dumps(doc) + "\n")
    if args.svg:
        envs = envelope(dataset) if args.method == "minnorm" else None
        render_svg(args.svg, dataset, function, envs)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def cmd_risk(args) -> int:
    try:
        doc = json.loads(Path(args.input).read_text())
        function = PiecewiseLinear(anchor=tuple(doc["anchor"]),
                                   initial_slope=doc["initial_slope"],
                                   kinks=tuple(tuple(k) for k in doc["kinks"]))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read function JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    target = _parse_target(args.target)
    noise = _parse_noise(args.noise)
    _log_config("risk", {"input": args.input, "target": args.target,
                         "noise": args.noise, "p": list(args.p)})
    from .risk import RiskReport
    lines = [RiskReport.CSV_HEADER]
    for p in args.p:
        lines.append(risk_report(function, target, noise, p).csv_row())
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    target = _parse_target(args.target)
    noise = _parse_noise(args.noise)
    try:
        cfg = ExperimentConfig(design=args.design, target=target, noise=noise,
                               n_values=args.n, p_values=args.p, trials=args.trials,
                               seed=args.seed, interpolator=args.method)
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _log_config("sweep", {"design": args.design, "target": args.target,
                          "noise": args.noise, "n": list(args.n), "p": list(args.p),
                          "trials": args.trials, "seed": args.seed,
                          "interpolator": args.method, "output": args.output})
    sweep = run_sweep(cfg)
    out = Path(args.output)
    out.write_text(sweep.records_csv())
    summary_path = out.with_name(out.stem + "_summary.csv")
    summary_path.write_text(sweep.summary_csv())
    converged_all = all(r.converged for r in sweep.records)
    for p in cfg.p_values:
        if noise.moment(p) > 0:
            series = tempered_statistic(sweep, p)
            print(f"p={p} median L_p ratio to noise floor: "
                  + ", ".join(f"n={n}: {r:.4g}" for n, r in series))
        if p >= 2:
            growth = catastrophic_statistic(sweep, p)
            print(f"p={p} log-log slope of median L_p: {growth.loglog_slope:.4g} "
                  f"(catastrophic: {growth.catastrophic})")
        ratio = heavy_tail_diagnostic(sweep, p)
        print(f"p={p} max-to-sum across trials: "
              + ", ".join(f"n={n}: {r:.3g}" for n, r in ratio))
    return EXIT_OK if converged_all else EXIT_NOT_CONVERGED


def cmd_verify(args) -> int:
    _log_config("verify", {"suite": args.suite, "seed": args.seed})
    passed, payload = run_suite(args.suite, args.seed)
    print(json.dumps({"suite": args.suite, "passed": passed, "detail": payload},
                     default=float))
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def cmd_events(args) -> int:
    target = _parse_target(args.target)
    noise = _parse_noise(args.noise)
    p = args.p[0] if args.p else 2.0
    _log_config("events", {"n": list(args.n), "trials": args.trials,
                           "seed": args.seed, "noise": args.noise, "p": p})
    total_blocks = 0
    total_fired = 0
    risk_checks = []
    for n in args.n:
        for trial in range(args.trials):
            rng = trial_rng(args.seed, n, trial)
            ds = sample_iid(n, target, noise, rng)
            eps = np.asarray(ds.y) - np.asarray(target(ds.x))
            report = detect_unfortunate_events(ds, eps, p)
            total_blocks += report.n_blocks
            total_fired += report.count
            for ev in report.events:
                if not ev.fired:
                    continue
                res = minnorm_interpolate(ds)
                risk_on_interval = reconstruction_risk(
                    res.function, target, p, lo=ev.interval[0], hi=ev.interval[1])
                risk_checks.append({
                    "n": n, "trial": trial, "block": ev.block, "term": ev.term,
                    "risk_on_interval": risk_on_interval,
                    "holds": bool(risk_on_interval >= ev.term - 1e-8),
                })
    prob, noise_part, gap_part, gap_se = analytic_event_probability(
        sigma=noise.sigma if isinstance(noise, GaussianNoise) else 1.0)
    c0 = total_fired / total_blocks if total_blocks else math.nan
    doc = {
        "blocks": total_blocks,
        "fired": total_fired,
        "c0_estimate": c0,
        "analytic_probability": prob,
        "noise_pattern_probability": noise_part,
        "gap_pattern_probability": gap_part,
        "gap_pattern_se": gap_se,
        "risk_checks": risk_checks,
        "all_risk_checks_hold": all(c["holds"] for c in risk_checks),
    }
    text = json.dumps(doc)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK if doc["all_risk_checks_hold"] else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="overfit-lab",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_int = sub.add_parser("interpolate", help="fit a dataset and write the function JSON")
    p_int.add_argument("--input", required=True)
    p_int.add_argument("--method", required=True,
                       choices=("spline", "extspline", "minnorm"))
    p_int.add_argument("--output", required=True)
    p_int.add_argument("--svg")
    p_int.set_defaults(fn=cmd_interpolate)

    p_risk = sub.add_parser("risk", help="score a function JSON against a target")
    p_risk.add_argument("--input", required=True)
    p_risk.add_argument("--target", default="zero")
    p_risk.add_argument("--noise", default="gaussian:1.0")
    p_risk.add_argument("--p", type=_parse_float_list, default=(1.0, 2.0))
    p_risk.add_argument("--output")
    p_risk.set_defaults(fn=cmd_risk)

    p_sweep = sub.add_parser("sweep", help="run a seeded risk sweep")
    p_sweep.add_argument("--design", required=True, choices=("iid", "grid"))
    p_sweep.add_argument("--target", default="zero")
    p_sweep.add_argument("--noise", default="gaussian:1.0")
    p_sweep.add_argument("--n", type=_parse_int_list, required=True)
    p_sweep.add_argument("--p", type=_parse_float_list, required=True)
    p_sweep.add_argument("--trials", type=int, default=10)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--method", default="minnorm",
                         choices=("spline", "extspline", "minnorm"))
    p_sweep.add_argument("--output", required=True)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run a named invariant suite")
    p_verify.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_verify.add_argument("--seed", type=int)
    p_verify.set_defaults(fn=cmd_verify)

    p_events = sub.add_parser("events", help="scan for spike-forcing 6-point blocks")
    p_events.add_argument("--n", type=_parse_int_list, default=(600,))
    p_events.add_argument("--trials", type=int, default=10)
    p_events.add_argument("--seed", type=int, default=0)
    p_events.add_argument("--target", default="zero")
    p_events.add_argument("--noise", default="gaussian:1.0")
    p_events.add_argument("--p", type=_parse_float_list, default=(2.0,))
    p_events.add_argument("--output")
    p_events.set_defaults(fn=cmd_events)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
