"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 infeasible/unbounded
optimization, 3 I/O error.  Diagnostics go to stderr; results to stdout or
``--out``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import compare as compare_mod
from .causal import build_program, enumerate_oracle, impact_probability, \
    intervene, receptor_probability
from .linear import (
    CapacityObjective,
    SignConvention,
    assess,
    build_capacity_problem,
    optimize_scenario_delta,
    solve_max_receptor,
)
from .lp import sensitivity_report, solve_lp
from .matrices import (
    MatrixFormatError,
    UnknownEntityError,
    load_matrices_dir,
    load_scenario,
    scenario_to_dict,
    validate,
    validate_scenario,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _load_matrices(args):
    try:
        return load_matrices_dir(args.matrices)
    except FileNotFoundError as exc:
        raise CliError(EXIT_IO, f"matrices directory: {exc}") from exc
    except MatrixFormatError as exc:
        lines = "\n  ".join(exc.findings)
        raise CliError(EXIT_VALIDATION, f"invalid matrices:\n  {lines}") from exc


def _load_scenario(args):
    try:
        return load_scenario(Path(args.scenario))
    except FileNotFoundError as exc:
        raise CliError(EXIT_IO, f"scenario file: {exc}") from exc
    except MatrixFormatError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from exc


def _check_scenario(m, s):
    report = validate_scenario(m, s)
    if not report.ok:
        lines = "\n  ".join(f.message for f in report.errors)
        raise CliError(EXIT_VALIDATION, f"scenario does not match matrices:\n  {lines}")


def _emit(args, text: str):
    if getattr(args, "out", None):
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _convention(args) -> SignConvention:
    return SignConvention(getattr(args, "convention", "polarity_signed"))


# -- subcommands --------------------------------------------------------------


def cmd_validate(args) -> int:
    m = _load_matrices(args)
    report = validate(m)
    if args.scenario:
        s = _load_scenario(args)
        report.findings.extend(validate_scenario(m, s).findings)
    for f in report.findings:
        print(f"{f.severity}: {f.message}", file=sys.stderr)
    if not report.ok:
        return EXIT_VALIDATION
    print(f"ok: {m.nope} activities, {m.npre} impacts, {m.nric} receptors, "
          f"{len(report.warnings)} warning(s)")
    return EXIT_OK


def cmd_assess(args) -> int:
    m = _load_matrices(args)
    s = _load_scenario(args)
    _check_scenario(m, s)
    report = assess(m, s, _convention(args))
    if args.format == "doc":
        _emit(args, json.dumps(report.to_dict(), indent=2) + "\n")
    else:
        _emit(args, report.to_table())
    return EXIT_OK


def cmd_optimize(args) -> int:
    m = _load_matrices(args)
    convention = _convention(args)
    try:
        if args.kind == "max_receptor":
            if not args.receptor:
                raise CliError(EXIT_VALIDATION, "--receptor is required")
            result = solve_max_receptor(m, args.receptor, args.sense, convention,
                                        cross_check=True)
            doc = {
                "status": "optimal",
                "kind": "max_receptor",
                "chosen_activity": result.activity_id,
                "objective_value": result.value,
            }
            _emit(args, json.dumps(doc, indent=2) + "\n")
            return EXIT_OK

        if args.kind == "capacity":
            s = _load_scenario(args)
            _check_scenario(m, s)
            if args.objective_receptor:
                objective = CapacityObjective(
                    kind="receptor", sense=args.sense,
                    receptor_id=args.objective_receptor,
                )
            else:
                objective = CapacityObjective(
                    kind="group_total", sense=args.sense,
                    group_index=args.objective_group,
                )
            try:
                problem = build_capacity_problem(m, s, objective, convention)
            except ValueError as exc:
                raise CliError(EXIT_VALIDATION, str(exc)) from exc
            sol = solve_lp(problem)
            if sol.status != "optimal":
                print(f"status: {sol.status}", file=sys.stderr)
                return EXIT_INFEASIBLE
            sens = sensitivity_report(problem, sol)
            doc = {
                "status": sol.status,
                "kind": "capacity",
                "objective_value": sol.objective_value,
                "primal": {k: v for k, v in sol.primal.items() if v != 0.0},
                "sensitivity": sens.to_dict(),
            }
            _emit(args, json.dumps(doc, indent=2) + "\n")
            return EXIT_OK

        if args.kind == "delta":
            s = _load_scenario(args)
            _check_scenario(m, s)
            if not args.receptor:
                raise CliError(EXIT_VALIDATION, "--receptor is required")
            result = optimize_scenario_delta(
                m, s, args.delta, args.receptor, args.sense, convention,
                enforce_budget=args.enforce_budget,
            )
            if result.solution.status != "optimal":
                print(f"status: {result.solution.status}", file=sys.stderr)
                return EXIT_INFEASIBLE
            doc = {
                "status": "optimal",
                "kind": "delta",
                "objective_value": result.solution.objective_value,
                "scenario": scenario_to_dict(result.scenario),
                "footprint": result.footprint.to_dict(),
            }
            _emit(args, json.dumps(doc, indent=2) + "\n")
            return EXIT_OK

        raise CliError(EXIT_VALIDATION, f"unknown kind {args.kind!r}")
    except UnknownEntityError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from exc


def cmd_causal(args) -> int:
    m = _load_matrices(args)
    do_set = [a for a in (args.do or "").split(",") if a]
    probs = {}
    for item in args.activity_prob or []:
        key, _, value = item.partition("=")
        try:
            probs[key] = float(value)
        except ValueError:
            raise CliError(EXIT_VALIDATION,
                           f"--activity-prob expects id=prob, got {item!r}") from None
    try:
        program = intervene(build_program(m, activity_probs=probs), do_set)
        if args.target in m.impact_ids:
            prob = (enumerate_oracle(program, args.target) if args.oracle
                    else impact_probability(program, args.target))
        elif args.target in m.receptor_ids:
            prob = (enumerate_oracle(program, args.target) if args.oracle
                    else receptor_probability(program, args.target))
        else:
            raise CliError(EXIT_VALIDATION, f"unknown target id {args.target!r}")
    except (UnknownEntityError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from exc
    _emit(args, f"{prob:.6f}\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    m = _load_matrices(args)
    table = compare_mod.build_table(m, _convention(args))
    if args.view == "scatter":
        _emit(args, compare_mod.scatter_export(table))
    elif args.view == "divergence":
        try:
            entries = compare_mod.divergence_rank(table)
        except ValueError as exc:
            raise CliError(EXIT_VALIDATION, str(exc)) from exc
        doc = [
            {"activity": e.cell.activity_id, "receptor": e.cell.receptor_id,
             "linear": e.cell.linear_value, "probability": e.cell.causal_prob,
             "residual": e.residual}
            for e in entries
        ]
        _emit(args, json.dumps(doc, indent=2) + "\n")
    elif args.view == "signs":
        _emit(args, json.dumps(compare_mod.sign_agreement(table).to_dict(),
                               indent=2) + "\n")
    else:
        doc = [
            {"activity": c.activity_id, "receptor": c.receptor_id,
             "linear": c.linear_value, "probability": c.causal_prob}
            for c in table.cells
        ]
        _emit(args, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .store import WorkspaceStore

    store = WorkspaceStore(args.workspace)
    if args.matrices:
        d = Path(args.matrices)
        try:
            store.set_matrices(
                (d / "activity_impact.csv").read_text(),
                (d / "impact_receptor.csv").read_text(),
                (d / "entities.json").read_text(),
            )
        except FileNotFoundError as exc:
            raise CliError(EXIT_IO, str(exc)) from exc
        except MatrixFormatError as exc:
            raise CliError(EXIT_VALIDATION, str(exc)) from exc
    app = create_app(store, time_budget=args.time_budget,
                     ui_dir=args.ui if args.ui else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seadss",
        description="Strategic environmental assessment engine over coaxial matrices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario=False):
        p.add_argument("--matrices", required=True,
                       help="directory with activity_impact.csv, "
                            "impact_receptor.csv, entities.json")
        p.add_argument("--convention", default="polarity_signed",
                       choices=[c.value for c in SignConvention])
        p.add_argument("--out", help="write result to file instead of stdout")
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON file")

    p = sub.add_parser("validate", help="validate a matrix set (and scenario)")
    p.add_argument("--matrices", required=True)
    p.add_argument("--scenario", help="optional scenario JSON to cross-check")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("assess", help="environmental footprint of a scenario")
    add_common(p, scenario=True)
    p.add_argument("--format", default="table", choices=["table", "doc"])
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("optimize", help="planning optimizations")
    add_common(p)
    p.add_argument("--kind", default="max_receptor",
                   choices=["max_receptor", "capacity", "delta"])
    p.add_argument("--scenario", help="scenario JSON file (capacity/delta)")
    p.add_argument("--receptor", help="receptor id (max_receptor/delta)")
    p.add_argument("--sense", default="max", choices=["max", "min"])
    p.add_argument("--objective-receptor", help="capacity: optimize this receptor")
    p.add_argument("--objective-group", type=int, default=0,
                   help="capacity: optimize total magnitude of demand group N")
    p.add_argument("--delta", type=float, default=0.01,
                   help="allowed relative deviation per magnitude")
    p.add_argument("--enforce-budget", action="store_true",
                   help="apply the scenario's costs/budget in delta optimization")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("causal", help="probability of an impact or receptor")
    add_common(p)
    p.add_argument("--do", default="", help="comma-separated activity ids to force")
    p.add_argument("--activity-prob", action="append", metavar="ID=P",
                   help="activity performed with probability P (repeatable)")
    p.add_argument("--target", required=True, help="impact or receptor id")
    p.add_argument("--oracle", action="store_true",
                   help="answer by exhaustive enumeration instead of closed form")
    p.set_defaults(func=cmd_causal)

    p = sub.add_parser("compare", help="linear vs causal comparison table")
    add_common(p)
    p.add_argument("--view", default="table",
                   choices=["table", "scatter", "divergence", "signs"])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--workspace", default="workspace",
                   help="directory for persisted matrices and scenarios")
    p.add_argument("--matrices", help="preload a matrices directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--time-budget", type=float, default=30.0)
    p.add_argument("--ui", help="serve a built workbench from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
