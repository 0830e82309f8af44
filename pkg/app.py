"""
Command-line entry point: run, compare and diagnose scenarios
"""
from pathlib import Path
from typing import List, Optional
import argparse
import logging
import sys

from agents.orchestrator import compare, run, strategy_variants
from modules.data_loader import load_scenario_file
from modules.graph import build_topology
from modules.observer import diagnose_observer
from modules.reporting import format_comparison_table, write_comparison, write_run_artifacts
from modules.scenario import build_scenario
from shared.errors import ConsensusError, DivergenceError, TopologyError
from shared.schema import ScenarioFile, TriggerStrategy
from shared.settings import get_default_scenario, get_log_level, get_output_dir

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_DIAGNOSTIC = 3


def resolve_output_dir(doc: ScenarioFile, out: Optional[str]) -> Path:
    """--out, then the scenario's output.directory, then ETC_OUTPUT_DIR"""
    if out:
        return Path(out)
    if "directory" in doc.output.model_fields_set:
        return Path(doc.output.directory)
    return Path(get_output_dir())


def _fail(code: int, message: str) -> int:
    print(f"✗ {message}", file=sys.stderr)
    return code


def command_run(scenario_path: str, strategy: Optional[str] = None, out: Optional[str] = None,
                dt: Optional[float] = None, horizon: Optional[float] = None,
                seed: Optional[int] = None) -> int:
    """Run one strategy and write trajectory, events, metrics and figures"""
    try:
        doc = load_scenario_file(scenario_path, strategy=strategy, dt=dt, horizon=horizon, seed=seed)
        scenario = build_scenario(doc)
    except ConsensusError as e:
        return _fail(EXIT_CONFIG, f"invalid scenario: {e}")

    directory = resolve_output_dir(doc, out)
    try:
        log, metrics = run(scenario)
    except DivergenceError as e:
        if e.partial is not None:
            partial_log, partial_metrics = e.partial
            write_run_artifacts(partial_log, partial_metrics, scenario.reference, directory)
        return _fail(EXIT_DIVERGENCE, f"run diverged: {e}")

    write_run_artifacts(log, metrics, scenario.reference, directory)
    for entry in metrics.agents:
        print(f"follower {entry.agent}: {entry.update_count} updates, "
              f"min interval {entry.min_interval}, tail RMS {entry.tracking_rms_tail:.3e}")
    print(f"✓ Results in {directory}")
    return EXIT_OK


def command_compare(scenario_path: str, out: Optional[str] = None, dt: Optional[float] = None,
                    horizon: Optional[float] = None, seed: Optional[int] = None) -> int:
    """Run all four strategies on one base scenario and tabulate their trigger economy"""
    try:
        doc = load_scenario_file(scenario_path, dt=dt, horizon=horizon, seed=seed)
        base = build_scenario(doc)
    except ConsensusError as e:
        return _fail(EXIT_CONFIG, f"invalid scenario: {e}")

    report = compare(strategy_variants(base))
    directory = resolve_output_dir(doc, out)
    directory.mkdir(parents=True, exist_ok=True)
    write_comparison(report, directory)
    print(format_comparison_table(report), end="")
    if report.errors:
        return _fail(EXIT_DIVERGENCE, f"diverged: {', '.join(report.errors)}")
    return EXIT_OK


def command_diagnose(scenario_path: str) -> int:
    """Observer Hurwitz / Lyapunov check plus every design side condition"""
    try:
        doc = load_scenario_file(scenario_path, lenient=True)
    except ConsensusError as e:
        return _fail(EXIT_CONFIG, f"invalid scenario: {e}")

    ok = True
    try:
        build_topology(doc.topology.adjacency, doc.topology.pinning)
        print("[pass] topology")
    except TopologyError as e:
        ok = False
        print(f"[FAIL] topology: {e}")

    report = diagnose_observer(doc.observer.q)
    print(f"[{'pass' if report.hurwitz else 'FAIL'}] P Hurwitz for q={report.q}")
    print(f"  eig(P) = {', '.join(f'{v:.6g}' for v in report.p_eigenvalues)}")
    if report.hurwitz:
        print(f"  eig(F) = {', '.join(f'{v:.6g}' for v in report.f_eigenvalues)}")
        print(f"  residual = {report.residual:.3e}")
        print(f"[{'pass' if report.passed else 'FAIL'}] Lyapunov solve PᵀF + FP = −2I")
    ok = ok and report.passed

    print("side conditions:")
    for cond in doc.side_conditions():
        ok = ok and cond.passed
        print(f"  [{'pass' if cond.passed else 'FAIL'}] {cond.name} ({cond.field}) {cond.detail}")

    if not ok:
        return _fail(EXIT_DIAGNOSTIC, "diagnostics failed")
    print("✓ All diagnostics passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Event-triggered adaptive consensus tracking simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_arg(p):
        p.add_argument("--scenario", type=str, default=get_default_scenario(),
                       help="scenario JSON file")

    def overrides(p):
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--dt", type=float, default=None, help="integration step override")
        p.add_argument("--horizon", type=float, default=None, help="final time override")
        p.add_argument("--seed", type=int, default=None, help="network-center seed override")

    run_p = sub.add_parser("run", help="simulate one trigger strategy")
    scenario_arg(run_p)
    run_p.add_argument("--strategy", type=str, default=None,
                       help=f"one of {', '.join(s.value for s in TriggerStrategy)}")
    overrides(run_p)

    compare_p = sub.add_parser("compare", help="compare all trigger strategies")
    scenario_arg(compare_p)
    overrides(compare_p)

    diag_p = sub.add_parser("diagnose", help="check observer and design side conditions")
    scenario_arg(diag_p)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=get_log_level(), format="%(levelname)s %(name)s: %(message)s")

    if args.command == "run":
        return command_run(args.scenario, args.strategy, args.out, args.dt, args.horizon, args.seed)
    if args.command == "compare":
        return command_compare(args.scenario, args.out, args.dt, args.horizon, args.seed)
    return command_diagnose(args.scenario)


if __name__ == '__main__':
    sys.exit(main())
