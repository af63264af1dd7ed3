"""Command-line interface.

Exit codes: 0 success, 1 validation/diagnostic failure, 2 usage error,
3 missing rate. All output files are written atomically (temp + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import assess as assess_mod
from . import engine, model, pricing, report
from .errors import (AssessmentError, CatalogError, CloudCostError, MissingRateError,
                     ModelError, PatternError, PlanError, WindowError)
from .money import format_money, format_money_grouped
from .months import Month, SimulationWindow

CATALOG_ENV = "CLOUDCOST_CATALOG"


def write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _catalog_path(args: argparse.Namespace) -> str:
    path = getattr(args, "catalog", None) or os.environ.get(CATALOG_ENV)
    if not path:
        raise CatalogError(
            f"no catalog given: pass --catalog or set {CATALOG_ENV}")
    return path


def _load_plan(path: str | None) -> dict[str, engine.PlanChoice]:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise PlanError(f"plan file {path}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise PlanError(f"plan file {path}: expected an object of node choices")
    return engine.parse_plan(data)


def _window(args: argparse.Namespace) -> SimulationWindow:
    return SimulationWindow(args.start, args.end)


def _summary_payload(row: engine.SummaryRow, currency: str) -> dict:
    return {
        "label": row.label,
        "months": row.months,
        "first_month": format_money(row.first_month),
        "monthly_avg": format_money(row.monthly_avg_money()),
        "total": format_money(row.total),
        "currency": currency,
    }


def _comparison_payload(table: engine.ComparisonTable, currency: str) -> dict:
    return {
        "currency": currency,
        "baseline": table.baseline_label,
        "rows": [
            {
                **_summary_payload(entry.row, currency),
                "difference": entry.difference,
                "delta": format_money(entry.delta),
                "baseline": entry.is_baseline,
            }
            for entry in table.entries
        ],
        "warnings": list(table.warnings),
    }


def _print_comparison(table: engine.ComparisonTable, currency: str) -> None:
    labels = [entry.row.label for entry in table.entries]
    header = [f"Cost ({currency})"]
    first = ["1st month"]
    avg = ["Monthly avg."]
    total = ["Total"]
    diff = [f"Difference with {table.baseline_label}"]
    for entry in table.entries:
        header.append(entry.row.label)
        first.append(format_money_grouped(entry.row.first_month))
        avg.append(format_money_grouped(entry.row.monthly_avg_money()))
        total.append(format_money_grouped(entry.row.total))
        diff.append(entry.difference or "")
    widths = [max(len(row[i]) for row in (header, first, avg, total, diff))
              for i in range(len(labels) + 1)]
    for row in (header, first, avg, total, diff):
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[i + 1]) for i, cell in enumerate(row[1:])]
        print("  ".join(cells))
    for warning in table.warnings:
        print(f"warning: {warning}", file=sys.stderr)


# --- subcommands ---------------------------------------------------------------

def cmd_validate(args: argparse.Namespace) -> int:
    with open(args.model, encoding="utf-8") as handle:
        text = handle.read()
    try:
        parsed = model.parse_model(text)
    except ModelError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    for diag in model.validate(parsed):
        print(str(diag), file=sys.stderr)
    return 0


def _run_simulation(args: argparse.Namespace) -> tuple[model.DeploymentModel,
                                                       engine.CostReport]:
    parsed = model.load_model(args.model)
    catalog = pricing.load_catalog_file(_catalog_path(args))
    for warning in catalog.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    plan = _load_plan(getattr(args, "plan", None))
    cost_report = engine.simulate(parsed, catalog, _window(args), plan)
    return parsed, cost_report


def cmd_simulate(args: argparse.Namespace) -> int:
    parsed, cost_report = _run_simulation(args)
    out = Path(args.out)
    summary = engine.summarize(cost_report, parsed.name)
    write_atomic(out / "report.csv", report.to_csv(cost_report))
    write_atomic(out / "report.html",
                 report.to_html(cost_report, [summary], model=parsed))
    write_atomic(out / "summary.json",
                 json.dumps(_summary_payload(summary, cost_report.currency),
                            indent=2) + "\n")
    for warning in cost_report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_export_csv(args: argparse.Namespace) -> int:
    _, cost_report = _run_simulation(args)
    write_atomic(Path(args.out) / "report.csv", report.to_csv(cost_report))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    model_paths = [p for p in args.models.split(",") if p]
    if len(model_paths) < 2:
        print("compare needs at least two models", file=sys.stderr)
        return 2
    plan_paths: list[str | None] = [None] * len(model_paths)
    if args.plans:
        raw = args.plans.split(",")
        if len(raw) != len(model_paths):
            print("--plans must list one entry per model ('-' for on-demand)",
                  file=sys.stderr)
            return 2
        plan_paths = [None if p in ("", "-") else p for p in raw]
    catalog = pricing.load_catalog_file(_catalog_path(args))
    scenarios = []
    labels_seen: dict[str, int] = {}
    for path, plan_path in zip(model_paths, plan_paths):
        parsed = model.load_model(path)
        label = parsed.name
        if label in labels_seen:
            labels_seen[label] += 1
            label = f"{label} #{labels_seen[parsed.name]}"
        else:
            labels_seen[label] = 1
        scenarios.append((label, parsed, _load_plan(plan_path)))
    result = engine.compare_scenarios(scenarios, catalog, _window(args))
    _print_comparison(result.table, catalog.currency)
    if args.out:
        write_atomic(Path(args.out) / "comparison.json",
                     json.dumps(_comparison_payload(result.table, catalog.currency),
                                indent=2) + "\n")
    return 0


def cmd_compare_providers(args: argparse.Namespace) -> int:
    parsed = model.load_model(args.model)
    catalog = pricing.load_catalog_file(_catalog_path(args))
    with open(args.map, encoding="utf-8") as handle:
        try:
            mapping = json.load(handle)
        except json.JSONDecodeError as exc:
            raise CatalogError(f"map file {args.map}: invalid JSON: {exc.msg}") from exc
    if not isinstance(mapping, dict) or not mapping:
        raise CatalogError(f"map file {args.map}: expected label -> {{provider, region}}")
    plan = _load_plan(getattr(args, "plan", None))
    scenarios = []
    for label, target in mapping.items():
        if not isinstance(target, dict) or set(target) != {"provider", "region"}:
            raise CatalogError(
                f"map entry {label!r}: expected exactly provider and region")
        scenarios.append((label, parsed.replaced(target["provider"], target["region"]),
                          plan))
    if len(scenarios) < 2:
        print("compare-providers needs at least two map entries", file=sys.stderr)
        return 2
    result = engine.compare_scenarios(scenarios, catalog, _window(args))
    _print_comparison(result.table, catalog.currency)
    if args.out:
        write_atomic(Path(args.out) / "comparison.json",
                     json.dumps(_comparison_payload(result.table, catalog.currency),
                                indent=2) + "\n")
    return 0


def cmd_assess(args: argparse.Namespace) -> int:
    items = assess_mod.load_items_file(args.items)
    sheet = assess_mod.parse_ratings_file(args.ratings)
    diagnostics = assess_mod.validate_sheet(sheet, items)
    for diag in diagnostics:
        print(str(diag), file=sys.stderr)
    if any(d.severity == "error" for d in diagnostics):
        return 1
    radar_data = assess_mod.radar(sheet, items)
    important = assess_mod.important_items(sheet, items, args.threshold)
    for row in radar_data.rows():
        print(f"{row.kind:8s} {row.category:15s} {row.average:.4f} "
              f"({row.item_count} rated)")
    print(f"important (rating >= {args.threshold}): "
          f"{len(important['benefit'])} benefits, {len(important['risk'])} risks")
    if args.out:
        out = Path(args.out)
        write_atomic(out / "radar.json",
                     json.dumps(radar_data.to_payload(), indent=2) + "\n")
        write_atomic(out / "important.json",
                     json.dumps({"threshold": args.threshold, **important},
                                indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloudcost",
        description="Estimate IaaS deployment costs and score migration "
                    "benefits and risks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a deployment model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    def sim_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", required=True)
        p.add_argument("--catalog", help=f"price catalog (default ${CATALOG_ENV})")
        p.add_argument("--start", required=True, type=Month.parse, metavar="YYYY-MM")
        p.add_argument("--end", required=True, type=Month.parse, metavar="YYYY-MM")

    p = sub.add_parser("simulate", help="simulate costs and write reports")
    sim_args(p)
    p.add_argument("--plan", help="purchase plan JSON (node id -> choice)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("export-csv", help="simulate and write only report.csv")
    sim_args(p)
    p.add_argument("--plan")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_csv)

    p = sub.add_parser("compare", help="compare scenario models side by side")
    p.add_argument("--models", required=True, help="comma-separated model files")
    p.add_argument("--plans", help="comma-separated plan files ('-' for on-demand)")
    p.add_argument("--catalog")
    p.add_argument("--start", required=True, type=Month.parse, metavar="YYYY-MM")
    p.add_argument("--end", required=True, type=Month.parse, metavar="YYYY-MM")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("compare-providers",
                       help="re-place all nodes per provider map and compare")
    sim_args(p)
    p.add_argument("--map", required=True,
                   help="JSON file: label -> {provider, region}")
    p.add_argument("--plan")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_providers)

    p = sub.add_parser("assess", help="score a Likert rating sheet")
    p.add_argument("--items", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--threshold", type=int, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_assess)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MissingRateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except WindowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, PatternError, CatalogError, PlanError, AssessmentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CloudCostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
