"""
Command-line entry point of the carbon-aware co-design engine.

Subcommands: evaluate, search, enumerate, report {iso, breakdown, sweep,
consistency, extremes}, hv and spearman. Every command prints a
CommandResponse as JSON on standard output; logs go to standard error.

Exit codes: 0 ok, 1 usage or configuration error, 2 infeasible.
"""

import argparse
import json
import logging
import os
import sys
import time
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from config import settings
from core.data import CommandResponse, RunConfig, load_run_config
from core.errors import CodesignError, ConfigError, InfeasibleMappingError
from estimator.archspace import L2_PRESETS, resolve_tops
from estimator.carbon import total_carbon
from estimator.models.hardware_models import HardwareConfig
from estimator.perf import dump_op_costs, graph_cost
from estimator.proxy import spearman
from estimator.workload import dump_graph, load_model_preset, lower_to_graph, reference_hardware
from optimizer.codesign_optimizer import CodesignOptimizer
from optimizer.evaluation import evaluate_candidate
from optimizer.models.search_models import ObjectiveVariant
from optimizer.pareto import hypervolume
from reporting.reports import (
    LATENCY_TIERS,
    BreakdownRow,
    ConsistencyRow,
    ExtremeRow,
    IsoAccuracyRow,
    breakdown,
    breakdown_models,
    emit_rows,
    extremes,
    hv_consistency,
    iso_accuracy,
    normalized_hypervolumes,
    pareto_scatter_frame,
    sweep,
)
from reporting.run_store import REPORTS_DIR, RunStore, load_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

DEFAULT_SWEEP_VALUES = {
    "tops": ["20", "4", "1"],
    "region": ["TW", "CA-US", "BC-CA"],
    "latency": [f"{tier:g}" for tier in LATENCY_TIERS],
}


class CliArgumentParser(argparse.ArgumentParser):
    """Argument parser whose usage errors follow the exit-code contract"""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _csv_list(text: Optional[str]) -> List[str]:
    if not text:
        return []
    return [part.strip() for part in text.split(",") if part.strip()]


def _float_list(text: Optional[str]) -> List[float]:
    try:
        return [float(part) for part in _csv_list(text)]
    except ValueError as e:
        raise ConfigError(f"Expected comma-separated numbers, got '{text}'") from e


# Run configuration

def _set(payload: Dict[str, Any], section: str, **values) -> None:
    target = payload.setdefault(section, {})
    for key, value in values.items():
        if value is not None:
            target[key] = value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from --config (or CODESIGN_CONFIG_PATH) with CLI flags applied on top"""
    base = load_run_config(getattr(args, "config", None) or settings.config_path)
    payload = base.model_dump(mode="json")

    if getattr(args, "preset", None):
        _set(payload, "model", preset=args.preset)
        payload["model"]["base"] = None
    if getattr(args, "fixed_model", False):
        _set(payload, "model", fixed=True)

    if getattr(args, "tops", None):
        payload["arch"]["platform"]["tops_budget"] = resolve_tops(args.tops, args.tops_value)
    if getattr(args, "l2_preset", None):
        payload["arch"]["l2_bytes"] = list(L2_PRESETS[args.l2_preset])

    _set(payload, "files", coeffs_path=getattr(args, "coeffs", None))
    _set(
        payload, "carbon",
        region=getattr(args, "region", None),
        fab_region=getattr(args, "fab_region", None),
        grid_override=getattr(args, "grid_override", None),
    )
    if getattr(args, "network_grid", False):
        _set(payload, "carbon", use_network_grid=True)
    payload["carbon"].setdefault("schedule", {})
    _set(
        payload["carbon"], "schedule",
        lifetime_years=getattr(args, "lifetime_years", None),
        active_hours_per_day=getattr(args, "duty_hours", None),
        inferences_per_second=getattr(args, "inf_per_sec", None),
    )
    _set(
        payload, "search",
        mode=getattr(args, "mode", None),
        latency_cap_s=getattr(args, "latency_cap", None),
        strategy=getattr(args, "strategy", None),
        budget=getattr(args, "budget", None),
        seed=getattr(args, "seed", None),
        population=getattr(args, "population", None),
    )
    if getattr(args, "jobs", None):
        payload["jobs"] = args.jobs
    if getattr(args, "out", None):
        payload["out_dir"] = args.out

    try:
        return RunConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(f"Invalid flag values: {e}") from e


def _out_dir(args: argparse.Namespace, config: Optional[RunConfig] = None) -> str:
    return getattr(args, "out", None) or (config.out_dir if config else None) or settings.out_dir


# Evaluate command

def _default_hardware(name: Optional[str]) -> HardwareConfig:
    if name:
        for key in (f"{name}:min-carbon", name):
            try:
                return reference_hardware(key)
            except ConfigError:
                continue
    raise ConfigError("No reference hardware for this model; pass --hw TC,PEx,PEy,L2_KB,L2bw,GLB_MB")


def cmd_evaluate(args: argparse.Namespace) -> CommandResponse:
    """Evaluate one (model, hardware) pair and print its cost and carbon"""
    config = build_run_config(args)
    optimizer = CodesignOptimizer(config)
    model = optimizer.base_model
    ctx = optimizer.context
    preset = config.model.preset if config.model.base is None else None
    try:
        hw = HardwareConfig.from_notation(args.hw) if args.hw else _default_hardware(preset)
    except ValueError as e:
        raise ConfigError(f"--hw: {str(e)}") from e

    candidate = evaluate_candidate(model, hw, ctx)
    graph = lower_to_graph(model)
    data: Dict[str, Any] = {
        "fingerprint": candidate.fingerprint,
        "hw": hw.notation(),
        "feasible": candidate.feasible,
        "violations": list(candidate.violations),
        "params": graph.total_params,
        "metrics": candidate.metrics.model_dump() if candidate.metrics else None,
    }

    try:
        perf = graph_cost(graph, hw, ctx.platform, ctx.coeffs)
        carbon = total_carbon(perf, ctx.factors, ctx.schedule, ctx.grid, ctx.platform)
        data["perf"] = perf.model_dump(exclude={"op_costs"})
        data["bound_counts"] = perf.bound_counts()
        data["carbon"] = carbon.model_dump()
        if args.dump_ops:
            dump_op_costs(graph, perf, args.dump_ops)
    except InfeasibleMappingError as e:
        logger.warning(f"No cost report: {str(e)}")

    if args.dump_graph:
        data["graph"] = json.loads(dump_graph(graph))

    if not candidate.feasible:
        return CommandResponse(
            success=False, data=data, error="; ".join(candidate.violations),
            exit_code=EXIT_INFEASIBLE,
        )
    return CommandResponse(success=True, data=data)


# Search commands

def _run_summary(record, run_dir: str) -> Dict[str, Any]:
    return {
        "run_dir": run_dir,
        "strategy": record.strategy,
        "mode": record.mode.variant.value,
        "seed": record.seed,
        "evaluations": record.evaluations,
        "candidates": len(record.candidates),
        "feasible": len(record.feasible_candidates()),
        "front_size": len(record.front),
        "ref_point": list(record.ref_point) if record.ref_point else None,
        "hypervolume": record.hypervolume,
        "oracle_hypervolume": record.oracle_hypervolume,
        "hv_ratio": record.hv_ratio,
    }


def cmd_search(args: argparse.Namespace) -> CommandResponse:
    """Run a search (NSGA-II or exhaustive) into a run directory"""
    if args.command == "enumerate":
        args.strategy = "exhaustive"
    config = build_run_config(args)
    run_dir = _out_dir(args, config)
    store = RunStore(run_dir, force=args.force).prepare()
    oracle = load_run(args.oracle) if getattr(args, "oracle", None) else None

    optimizer = CodesignOptimizer(config)
    record = optimizer.run(store, oracle)
    store.write_report("pareto_scatter", pareto_scatter_frame(record.front))

    data = _run_summary(record, run_dir)
    if not record.front.members:
        return CommandResponse(
            success=False, data=data, error="No feasible candidate found",
            exit_code=EXIT_INFEASIBLE,
        )
    return CommandResponse(success=True, data=data)


# Report commands

def _report_path(out_dir: str, name: str) -> str:
    return os.path.join(out_dir, REPORTS_DIR, f"{name}.csv")


def _require_runs(args: argparse.Namespace) -> List[str]:
    run_dirs = _csv_list(getattr(args, "runs", None))
    if not run_dirs:
        raise ConfigError("--runs needs at least one run directory")
    return run_dirs


def report_iso(args: argparse.Namespace) -> CommandResponse:
    run_dirs = _require_runs(args)
    targets = _float_list(args.targets)
    if not targets:
        raise ConfigError("--targets needs at least one accuracy value")
    runs = [load_run(d) for d in run_dirs]
    rows = iso_accuracy(runs, targets, args.tol, front_only=not args.all)
    path = _report_path(args.out or run_dirs[0], "iso_accuracy")
    emit_rows(rows, IsoAccuracyRow, path)
    return CommandResponse(success=True, data={
        "report": path,
        "source": "feasible" if args.all else "front",
        "rows": len(rows),
        "empty_cells": sum(1 for r in rows if not r.filled),
    })


def report_breakdown(args: argparse.Namespace) -> CommandResponse:
    presets = _csv_list(args.presets)
    if presets:
        # model ladder on fixed hardware
        if not args.hw:
            raise ConfigError("--presets needs --hw")
        config = build_run_config(args)
        ctx = CodesignOptimizer(config).context
        models = [load_model_preset(name) for name in presets]
        rows = breakdown_models(models, HardwareConfig.from_notation(args.hw), ctx)
        out_dir = _out_dir(args, config)
    else:
        if not args.run:
            raise ConfigError("report breakdown needs --run or --presets")
        store = RunStore(args.run)
        ctx = CodesignOptimizer(store.load_config()).context
        rows = breakdown(store.load_run(), ctx, front_only=not args.all)
        out_dir = args.out or args.run

    path = _report_path(out_dir, "breakdown")
    emit_rows(rows, BreakdownRow, path)
    return CommandResponse(success=True, data={"report": path, "rows": len(rows)})


def report_sweep(args: argparse.Namespace) -> CommandResponse:
    config = build_run_config(args)
    values = _csv_list(args.values) or _csv_list(args.regions) or DEFAULT_SWEEP_VALUES[args.axis]
    out_dir = _out_dir(args, config)
    result = sweep(args.axis, values, config, out_dir=out_dir, force=args.force)
    return CommandResponse(success=True, data={
        "report": _report_path(out_dir, f"sweep_{args.axis}"),
        "points": [row.model_dump() for row in result.rows],
    })


def report_consistency(args: argparse.Namespace) -> CommandResponse:
    run_dirs = _require_runs(args)
    rows = hv_consistency([load_run(d) for d in run_dirs])
    path = _report_path(args.out or run_dirs[0], "hv_consistency")
    emit_rows(rows, ConsistencyRow, path)
    return CommandResponse(success=True, data={"report": path, "modes": [r.model_dump() for r in rows]})


def report_extremes(args: argparse.Namespace) -> CommandResponse:
    if not args.run:
        raise ConfigError("report extremes needs --run")
    rows = extremes(load_run(args.run))
    path = _report_path(args.out or args.run, "extremes")
    emit_rows(rows, ExtremeRow, path)
    if not rows:
        return CommandResponse(
            success=False, data={"report": path}, error="Run has no feasible candidate",
            exit_code=EXIT_INFEASIBLE,
        )
    return CommandResponse(success=True, data={"report": path, "rows": [r.model_dump() for r in rows]})


REPORTS: Dict[str, Callable[[argparse.Namespace], CommandResponse]] = {
    "iso": report_iso,
    "breakdown": report_breakdown,
    "sweep": report_sweep,
    "consistency": report_consistency,
    "extremes": report_extremes,
}


def cmd_report(args: argparse.Namespace) -> CommandResponse:
    return REPORTS[args.report](args)


# Metric commands

def cmd_hv(args: argparse.Namespace) -> CommandResponse:
    """Hypervolume of one run, or normalized hypervolumes of several runs of one mode"""
    if args.runs:
        run_dirs = _csv_list(args.runs)
        values = normalized_hypervolumes([load_run(d) for d in run_dirs])
        return CommandResponse(success=True, data={
            "normalized": True,
            "runs": [{"run_dir": d, "hypervolume": v} for d, v in zip(run_dirs, values)],
        })
    if not args.run:
        raise ConfigError("hv needs --run or --runs")
    record = load_run(args.run)
    ref = tuple(_float_list(args.ref)) if args.ref else record.ref_point
    if ref is None:
        return CommandResponse(
            success=False, data={"hypervolume": 0.0}, error="Run has no feasible candidate",
            exit_code=EXIT_INFEASIBLE,
        )
    value = hypervolume(record.front, ref, record.mode)
    return CommandResponse(success=True, data={"hypervolume": value, "ref_point": list(ref)})


def cmd_spearman(args: argparse.Namespace) -> CommandResponse:
    """Rank correlation of two score lists, or of accuracy against parameters in a run"""
    if args.run:
        seen: Dict[str, Any] = {}
        for c in load_run(args.run).candidates:
            if c.metrics is not None:
                seen.setdefault(c.model.fingerprint, c.metrics)
        xs = [m.accuracy for m in seen.values()]
        ys = [float(m.params) for m in seen.values()]
    else:
        xs, ys = _float_list(args.xs), _float_list(args.ys)
    rho = spearman(xs, ys, ties=args.ties)
    return CommandResponse(success=True, data={"rho": rho, "n": len(xs), "ties": args.ties})


# Argument parsing

def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="Run config JSON (default: CODESIGN_CONFIG_PATH)")
    p.add_argument("--preset", help="Model preset name, e.g. clip-b-16")
    p.add_argument("--coeffs", help="Cost coefficient JSON file")
    p.add_argument("--tops", help="Peak-throughput budget: 20, 4, 1, custom or a number")
    p.add_argument("--tops-value", type=float, help="Budget for --tops custom")
    p.add_argument("--l2-preset", choices=sorted(L2_PRESETS), help="Local-buffer candidate list")
    p.add_argument("--mode", choices=[v.value for v in ObjectiveVariant], help="Objective mode")
    p.add_argument("--latency-cap", type=float, help="Latency cap in seconds for capped modes")
    p.add_argument("--region", help="Operation grid region, e.g. CA-US")
    p.add_argument("--fab-region", help="Fab grid region, e.g. TW")
    p.add_argument("--grid-override", type=float, help="Operation grid intensity in gCO2/kWh")
    p.add_argument("--network-grid", action="store_true", help="Use the configured grid service")
    p.add_argument("--lifetime-years", type=float)
    p.add_argument("--duty-hours", type=float, help="Active hours per day")
    p.add_argument("--inf-per-sec", type=float, help="Inferences per second while active")
    p.add_argument("--jobs", type=int, help="Parallel evaluation processes")


def _add_search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, help="Evaluation budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--population", type=int)
    p.add_argument("--strategy", choices=["nsga2", "exhaustive"])
    p.add_argument("--fixed-model", action="store_true", help="Search hardware only")
    p.add_argument("--out", help="Output directory")
    p.add_argument("--force", action="store_true", help="Overwrite a non-empty output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = CliArgumentParser(prog="codesign", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default=None, help="Logging level (default from CODESIGN_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="Evaluate one model on one hardware config")
    _add_config_args(p)
    p.add_argument("--hw", help="Hardware as TC,PEx,PEy,L2_KB,L2bw,GLB_MB")
    p.add_argument("--dump-graph", action="store_true", help="Include the operator graph")
    p.add_argument("--dump-ops", help="Write per-operator costs to this CSV")
    p.set_defaults(handler=cmd_evaluate)

    for name, text in (("search", "Seeded co-design search"), ("enumerate", "Exhaustive search")):
        p = sub.add_parser(name, help=text)
        _add_config_args(p)
        _add_search_args(p)
        if name == "search":
            p.add_argument("--oracle", help="Run directory of an exhaustive run of the same space")
        p.set_defaults(handler=cmd_search)

    p = sub.add_parser("report", help="Report tables")
    reports = p.add_subparsers(dest="report", required=True)

    r = reports.add_parser("iso", help="Iso-accuracy comparison across modes")
    r.add_argument("--runs", required=True, help="Comma-separated run directories")
    r.add_argument("--targets", required=True, help="Comma-separated accuracy targets")
    r.add_argument("--tol", type=float, default=0.01)
    r.add_argument("--all", action="store_true",
                   help="Pick from all feasible candidates; the default picks from front members")
    r.add_argument("--out")

    r = reports.add_parser("breakdown", help="Embodied / operational carbon split")
    _add_config_args(r)
    r.add_argument("--run", help="Run directory")
    r.add_argument("--all", action="store_true", help="All feasible candidates, not only the front")
    r.add_argument("--presets", help="Comma-separated model presets evaluated on --hw")
    r.add_argument("--hw")
    r.add_argument("--out")

    r = reports.add_parser("sweep", help="Same search across a TOPS, region or latency axis")
    _add_config_args(r)
    _add_search_args(r)
    r.add_argument("--axis", required=True, choices=["tops", "region", "latency"])
    r.add_argument("--values", help="Comma-separated axis values")
    r.add_argument("--regions", help="Alias of --values for the region axis")

    r = reports.add_parser("consistency", help="Hypervolume mean / std / CV per mode")
    r.add_argument("--runs", required=True)
    r.add_argument("--out")

    r = reports.add_parser("extremes", help="Minimum-carbon and minimum-latency designs")
    r.add_argument("--run", required=True)
    r.add_argument("--out")

    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("hv", help="Hypervolume of a run")
    p.add_argument("--run")
    p.add_argument("--runs", help="Several runs of one mode, normalized over shared bounds")
    p.add_argument("--ref", help="Comma-separated reference point")
    p.set_defaults(handler=cmd_hv)

    p = sub.add_parser("spearman", help="Spearman rank correlation")
    p.add_argument("--xs")
    p.add_argument("--ys")
    p.add_argument("--run", help="Correlate accuracy with parameter count over a run")
    p.add_argument("--ties", choices=["average", "first"], default="average",
                   help="Tie rule. average: tied values share their mean rank (xs 1,2,2,4 vs "
                        "ys 1,3,2,4 gives 0.949). first: ties ranked by position, the "
                        "hand-ranked convention that gives 0.8 on the same lists")
    p.set_defaults(handler=cmd_spearman)

    return parser


def run_command(args: argparse.Namespace) -> CommandResponse:
    start_time = time.time()
    try:
        response = args.handler(args)
    except CodesignError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        response = CommandResponse(success=False, error=str(e), exit_code=EXIT_USAGE)
    except (ValueError, KeyError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        response = CommandResponse(success=False, error=str(e), exit_code=EXIT_USAGE)

    meta = dict(response.meta or {})
    meta["command"] = args.command
    meta["execution_time_ms"] = int((time.time() - start_time) * 1000)
    return response.model_copy(update={"meta": meta})


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        response = CommandResponse(success=False, error=str(e), exit_code=EXIT_USAGE)
        print(response.model_dump_json(indent=2))
        return response.exit_code

    # Configure logging
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )

    response = run_command(args)
    print(response.model_dump_json(indent=2))
    return response.exit_code


if __name__ == "__main__":
    sys.exit(main())
