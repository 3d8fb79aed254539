"""Command-line front end: ``run``, ``validate`` and ``report-obscurity``."""

from __future__ import annotations

import argparse
import importlib
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import SalvoError
from .graph import mirror_spectrum, validate_gains
from .obscurity import DEFAULT_BINS, ObservationSpec, compare_records, simulate_pair
from .output import write_csv, write_summary
from .scenario import initial_tgo, load_scenario, resolve_scenario_path, run_scenario

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="salvo-sim",
        description="Cooperative simultaneous interception with heterogeneous guidance laws.",
    )
    p.add_argument(
        "--plugin",
        action="append",
        default=[],
        metavar="MODULE",
        help="import MODULE before loading scenarios (it should register guidance plugins)",
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write record.csv, summary.json and plots")
    r.add_argument("scenario", help="scenario JSON file, or the name of a bundled one (scenario1..scenario4)")
    r.add_argument("--out", default="out", help="output directory (default: ./out)")
    r.add_argument("--dt", type=float, help="integration step [s]")
    r.add_argument("--decimate", type=int, help="record every k-th step")
    r.add_argument("--seed", type=int, default=0, help="recorded in the summary; the engagement itself has no randomness")
    r.add_argument("--no-plots", action="store_true", help="skip the SVG plots")

    v = sub.add_parser("validate", help="check a scenario and print lambda2, the beta bound and initial t_go")
    v.add_argument("scenario")

    o = sub.add_parser("report-obscurity", help="per-feature total-variation distance between two scenarios")
    o.add_argument("scenario_a")
    o.add_argument("scenario_b")
    o.add_argument("--sigma", type=float, default=50.0, help="observation noise std (channel units, default 50)")
    o.add_argument("--runs", type=int, default=500, help="noisy observations per side (default 500)")
    o.add_argument("--operator", choices=("positions", "bearings", "los_rates"), default="positions")
    o.add_argument("--times", type=float, nargs="+", help="sample times [s]; default: 8 evenly spaced")
    o.add_argument("--bins", type=int, default=DEFAULT_BINS)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", help="write the JSON report here instead of standard output")
    return p


def _load(spec: str):
    return load_scenario(resolve_scenario_path(spec))


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    record = run_scenario(scenario, dt=args.dt, decimate=args.decimate)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(record, out / "record.csv")
    write_summary(record, out / "summary.json", scenario=scenario.name or str(args.scenario), seed=args.seed)
    s = record.summary
    print(f"status: {s.status}")
    if s.status == "intercepted":
        print("interception times [s]: " + ", ".join(f"{t:.3f}" for t in s.interception_times))
    if s.consensus_time is not None:
        print(f"consensus reached at {s.consensus_time:.3f} s")
    if s.message:
        print(s.message, file=sys.stderr)
    if scenario.plots and not args.no_plots:
        # best effort and written last so CSV/JSON are already complete
        try:
            from .plotting import write_plots

            write_plots(record, out)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: plot rendering failed: {exc}", file=sys.stderr)
    if s.status == "intercepted":
        return EXIT_OK
    if s.status == "timeout":
        return EXIT_TIMEOUT
    return EXIT_ERROR


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = _load(args.scenario)
    spectrum = mirror_spectrum(scenario.topology())
    verdict = validate_gains(scenario.gains.alpha, scenario.gains.beta, spectrum)
    tgo = initial_tgo(scenario)
    print(f"scenario: {scenario.name or args.scenario}")
    print(f"pursuers: {scenario.n}")
    print(f"lambda2: {spectrum.lambda2:.6g}")
    print(f"beta bound (beta >= 1/lambda2): {verdict.beta_bound:.6g}")
    print(f"alpha = {scenario.gains.alpha:g}, beta = {scenario.gains.beta:g}, t_e = {scenario.gains.t_e:g} s: admissible")
    print("initial t_go [s]: [" + ", ".join(f"{t:.3f}" for t in tgo) + "]")
    return EXIT_OK


def _default_times(end: float, count: int = 8) -> list[float]:
    return [float(t) for t in np.linspace(0.0, 0.9 * end, count + 1)[1:]]


def _cmd_obscurity(args: argparse.Namespace) -> int:
    a = _load(args.scenario_a)
    b = _load(args.scenario_b)
    if a.n != b.n:
        raise SalvoError(f"scenarios have different pursuer counts ({a.n} vs {b.n})")
    rec_a, rec_b = simulate_pair(a, None, b, None)
    times = args.times or _default_times(min(rec_a.times[-1], rec_b.times[-1]))
    spec = ObservationSpec(args.operator, args.sigma, tuple(times), args.seed)
    report = compare_records(rec_a, rec_b, spec, args.runs, args.bins)
    text = json.dumps(report.to_json(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"epsilon-hat = {report.epsilon:.4f} ({report.worst_feature})", file=sys.stderr)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        for module in args.plugin:
            importlib.import_module(module)
        handler = {"run": _cmd_run, "validate": _cmd_validate, "report-obscurity": _cmd_obscurity}[args.command]
        return handler(args)
    except (SalvoError, OSError, ImportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
