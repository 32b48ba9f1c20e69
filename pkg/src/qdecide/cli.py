"""Command-line front end.

Exit codes: 0 success, 1 validation or parse diagnostics, 2 capacity errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuit_lang import format_circuit, parse_circuit
from .decision import CRITERIA, DecisionReport, decide, sweep
from .errors import CapacityError, ParseDiagnostic, ValidationError
from .noise import NoiseModel, error_sites, exact_noisy_distribution
from .reward_lang import evaluate_parameters, reward_moments
from .scenario import BUNDLED, bundled_text, load_scenario
from .statevector import bits_to_str, circuit_distribution, total_variation

RESULT_FIELDS = [
    "scenario",
    "action",
    "mode",
    "criterion",
    "mean",
    "variance",
    "std_error",
    "shots",
    "seed",
    "noise_p",
    "chosen",
    "tie",
]
SWEEP_FIELDS = RESULT_FIELDS + ["param", "param_value"]


def _assignment(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    if not sep or not name.strip() or not value.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    return name.strip(), value.strip()


def _overrides(pairs) -> dict[str, float | str]:
    out: dict[str, float | str] = {}
    for name, value in pairs or []:
        try:
            out[name] = float(value)
        except ValueError:
            out[name] = value
    return out


def _effective_mode(base: str, noise_p: float) -> str:
    if noise_p > 0:
        return "noisy-exact" if base == "exact" else "noisy-sampled"
    return base


def _load(args):
    scenario = load_scenario(args.scenario, overrides=_overrides(args.set))
    problem = scenario.problem
    changes = {}
    if getattr(args, "shots", None) is not None:
        changes["shots"] = args.shots
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "noise", None) is not None:
        changes["noise"] = NoiseModel(args.noise)
    if changes:
        problem = replace(problem, **changes)
    criterion = getattr(args, "criterion", None) or scenario.criterion
    return scenario, problem, criterion


def _rows(scenario_name, problem, report: DecisionReport):
    for est in report.estimates:
        yield {
            "scenario": scenario_name,
            "action": est.action,
            "mode": est.mode,
            "criterion": report.criterion,
            "mean": repr(est.mean),
            "variance": repr(est.variance),
            "std_error": repr(est.std_error),
            "shots": problem.shots,
            "seed": problem.seed,
            "noise_p": repr(problem.noise.per_op_error_prob),
            "chosen": int(est.action == report.chosen),
            "tie": int(report.tie),
        }


def _write_csv(rows, fields, path: str | None, out) -> None:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if path is None:
        out.write(buffer.getvalue())
    else:
        Path(path).write_text(buffer.getvalue(), encoding="utf-8")


def _print_report(scenario_name, problem, report: DecisionReport, out) -> None:
    print(
        f"scenario {scenario_name}  criterion {report.criterion}  mode {report.mode}  "
        f"shots {problem.shots}  seed {problem.seed}  noise_p {problem.noise.per_op_error_prob:g}",
        file=out,
    )
    width = max(len(e.action) for e in report.estimates)
    header = f"{'action':<{width}}  {'mean':>10}  {'std_dev':>10}  {'std_error':>10}"
    if report.criterion != "bayes":
        header += f"  {'score':>10}"
    print(header, file=out)
    for est in report.estimates:
        line = f"{est.action:<{width}}  {est.mean:>10.6f}  {est.std_dev:>10.6f}  {est.std_error:>10.6f}"
        if report.criterion != "bayes":
            line += f"  {report.scores[est.action]:>10.6f}"
        if est.action == report.chosen:
            line += "  *"
        print(line, file=out)
    if report.nature is not None:
        print(f"most likely nature state: {bits_to_str(report.nature)}", file=out)
    for warning in report.warnings:
        print(f"warning: {warning}", file=out)
    print(f"chosen: {report.chosen}" + ("  (tie, first declared wins)" if report.tie else ""), file=out)


def cmd_run(args, out) -> int:
    scenario, problem, criterion = _load(args)
    mode = _effective_mode(args.mode, problem.noise.per_op_error_prob)
    report = decide(problem, criterion, mode)
    _print_report(scenario.name, problem, report, out)
    if args.csv:
        _write_csv(_rows(scenario.name, problem, report), RESULT_FIELDS, args.csv, out)
    return 0


def cmd_sweep(args, out) -> int:
    if args.steps < 1:
        raise ValidationError("--steps must be at least 1")
    scenario, problem, criterion = _load(args)
    mode = _effective_mode(args.mode, problem.noise.per_op_error_prob)
    grid = [args.start] if args.steps == 1 else list(np.linspace(args.start, args.stop, args.steps))
    points = sweep(problem, args.param, grid, mode, criterion)
    rows = []
    for point in points:
        for row in _rows(scenario.name, problem, point.report):
            row.update(param=args.param, param_value=repr(point.value))
            rows.append(row)
    _write_csv(rows, SWEEP_FIELDS, args.csv, out)
    if args.csv:
        print(f"wrote {len(rows)} rows to {args.csv}", file=out)
    return 0


def cmd_oracle(args, out) -> int:
    scenario, problem, _ = _load(args)
    index = problem.action_index(args.action)
    action = problem.resolved[index]
    noise = NoiseModel(args.noise) if args.noise is not None else problem.noise
    dist = exact_noisy_distribution(action.circuit, noise)
    mean, var = reward_moments(dist, action.reward, problem.bindings)
    ideal = circuit_distribution(action.circuit)
    n = problem.n_qubits
    print(
        f"scenario {scenario.name}  action {action.name}  noise_p {noise.per_op_error_prob:g}  "
        f"error sites {len(error_sites(action.circuit))}",
        file=out,
    )
    print(f"{''.join(f's{k}' for k in range(n))}  probability", file=out)
    for bits, p in dist.items():
        print(f"{bits_to_str(bits):<{2 * n}}  {p:.12f}", file=out)
    print(f"expected reward: {mean:.12f}", file=out)
    print(f"std dev: {var ** 0.5:.12f}", file=out)
    print(f"std error (N={problem.shots}): {(var / problem.shots) ** 0.5:.12f}", file=out)
    print(f"tv distance from ideal: {total_variation(dist, ideal):.12f}", file=out)
    return 0


def cmd_parse(args, out) -> int:
    try:
        text = Path(args.circuit).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read circuit {args.circuit!r}: {exc.strerror}") from None
    params = evaluate_parameters(_overrides(args.set))
    out.write(format_circuit(parse_circuit(text, params)))
    return 0


def cmd_scenarios(args, out) -> int:
    if args.name:
        out.write(bundled_text(args.name))
    else:
        for name in BUNDLED:
            print(name, file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdecide", description="Decisions under uncertainty from simulated qubits.")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p, noise_help="per-operation depolarizing error probability"):
        p.add_argument("scenario", help="scenario file, or a bundled scenario name")
        p.add_argument("--set", action="append", type=_assignment, metavar="NAME=VALUE", help="override a parameter")
        p.add_argument("--noise", type=float, help=noise_help)

    def run_args(p):
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--mode", choices=["exact", "sampled"], default="sampled")
        p.add_argument("--criterion", choices=CRITERIA)
        p.add_argument("--csv", metavar="PATH")

    p = sub.add_parser("run", help="evaluate every action and choose one")
    scenario_args(p)
    run_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="re-decide over a parameter grid, emitting CSV")
    scenario_args(p)
    run_args(p)
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact noisy distribution of one action by enumerating error patterns")
    scenario_args(p)
    p.add_argument("--action", required=True)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("parse", help="parse a circuit file and print its canonical form")
    p.add_argument("circuit")
    p.add_argument("--set", action="append", type=_assignment, metavar="NAME=VALUE")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("scenarios", help="list bundled scenarios or print one")
    p.add_argument("name", nargs="?", choices=BUNDLED)
    p.set_defaults(func=cmd_scenarios)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ParseDiagnostic as diag:
        print(f"error: {diag}", file=err)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=err)
        return 1
    except CapacityError as exc:
        print(f"error: {exc}", file=err)
        return 2


if __name__ == "__main__":
    sys.exit(main())
