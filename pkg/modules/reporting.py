"""
Run artifacts: CSV logs, metric summaries, comparison tables and SVG figures
"""
from pathlib import Path
from typing import Dict, List, Optional, Union
import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from modules.plant import ReferenceSignal
from modules.trajectory import TrajectoryLog
from shared.schema import ComparisonReport, RunMetrics, TriggerStrategy

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
PathLike = Union[str, Path]


# ============================================================================
# CSV
# ============================================================================

def write_trajectory_csv(log: TrajectoryLog, path: PathLike) -> Path:
    path = Path(path)
    log.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"✓ Wrote {log.n_samples} samples to {path}")
    return path


def read_trajectory_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_events_csv(log: TrajectoryLog, path: PathLike) -> Path:
    path = Path(path)
    log.events_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"✓ Wrote {len(log.events)} events to {path}")
    return path


def write_metrics(metrics: RunMetrics, directory: PathLike) -> List[Path]:
    """metrics.txt (key = value) and metrics.json"""
    directory = Path(directory)
    text = "\n".join(f"{key} = {value}" for key, value in metrics.as_key_values().items())
    txt_path = directory / "metrics.txt"
    txt_path.write_text(text + "\n", encoding="utf-8")
    json_path = directory / "metrics.json"
    json_path.write_text(metrics.model_dump_json(indent=2), encoding="utf-8")
    return [txt_path, json_path]


# ============================================================================
# Comparison
# ============================================================================

def _count_cell(row, label: str) -> str:
    if label not in row.updates:
        return "-"
    if label == TriggerStrategy.SWITCH.value:
        return f"{row.updates[label]}({row.switch_relative}+{row.switch_fixed})"
    return str(row.updates[label])


def _flag(value: Optional[bool]) -> str:
    return "n/a" if value is None else ("pass" if value else "FAIL")


def format_comparison_table(report: ComparisonReport) -> str:
    """Fixed / switch(relative+fixed) / relative update counts per follower"""
    columns = [s.value for s in (TriggerStrategy.FIXED, TriggerStrategy.SWITCH, TriggerStrategy.RELATIVE)]
    extra = [label for label in report.strategies
             if label not in columns and label != TriggerStrategy.PERIODIC.value]
    columns += extra
    header = ["follower"] + columns + ["rel<=sw<=fix"]
    rows = [header]
    for row in report.rows:
        rows.append([str(row.agent)] + [_count_cell(row, c) for c in columns]
                    + [_flag(row.ordering_ok)])
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(r)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if report.periodic_updates is not None:
        lines.append("periodic baseline: " + ", ".join(str(c) for c in report.periodic_updates))

    lines.append("")
    lines.append("tail tracking RMS of z_1:")
    for row in report.rows:
        cells = ", ".join(f"{label}={value:.3e}" for label, value in row.tracking_rms_tail.items())
        lines.append(f"  follower {row.agent}: {cells}")
    lines.append("largest control jump at an update:")
    for row in report.rows:
        cells = ", ".join(f"{label}={value:.3g}" for label, value in row.max_update_jump.items())
        lines.append(f"  follower {row.agent}: {cells}")
    lines.append(f"switch uses both branches: {_flag(report.switch_split_ok)}")
    for label, error in report.errors.items():
        lines.append(f"{label}: diverged ({error})")
    return "\n".join(lines) + "\n"


def write_comparison(report: ComparisonReport, directory: PathLike) -> List[Path]:
    directory = Path(directory)
    txt_path = directory / "comparison.txt"
    txt_path.write_text(format_comparison_table(report), encoding="utf-8")
    json_path = directory / "comparison.json"
    json_path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"✓ Wrote comparison to {txt_path}")
    return [txt_path, json_path]


# ============================================================================
# Figures
# ============================================================================

def plot_outputs(log: TrajectoryLog, reference: ReferenceSignal, path: PathLike) -> Path:
    """Follower outputs against the leader trajectory"""
    fig, ax = plt.subplots(figsize=(10, 4))
    y_r = np.array([reference.y_r(t) for t in log.time])
    ax.plot(log.time, y_r, "k--", linewidth=1.5, label="leader")
    for i in range(log.n_followers):
        ax.plot(log.time, log.x[:, i, 0], linewidth=1.0, label=f"follower {i + 1}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("y")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def plot_consensus_errors(log: TrajectoryLog, path: PathLike) -> Path:
    fig, ax = plt.subplots(figsize=(10, 4))
    for i in range(log.n_followers):
        ax.plot(log.time, log.z[:, i, 0], linewidth=1.0, label=f"z_{i + 1},1")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("consensus error")
    ax.legend(loc="upper right")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def plot_intervals(log: TrajectoryLog, agent: int, path: PathLike) -> Path:
    """Release instants of one follower (0-based) against the interval that preceded them"""
    times = np.array([e.time for e in log.events_for(agent)])
    fig, ax = plt.subplots(figsize=(10, 3))
    if times.size > 1:
        ax.stem(times[1:], np.diff(times), basefmt=" ")
    ax.set_xlabel("release instant [s]")
    ax.set_ylabel("interval [s]")
    ax.set_title(f"follower {agent + 1}: {max(times.size - 1, 0)} updates")
    ax.grid(True, alpha=0.3)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return Path(path)


def write_run_artifacts(log: TrajectoryLog, metrics: RunMetrics, reference: ReferenceSignal,
                        directory: PathLike) -> Dict[str, Path]:
    """Everything `run` leaves on disk"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = {
        "trajectory": write_trajectory_csv(log, directory / "trajectory.csv"),
        "events": write_events_csv(log, directory / "events.csv"),
        "outputs": plot_outputs(log, reference, directory / "outputs_vs_reference.svg"),
        "errors": plot_consensus_errors(log, directory / "consensus_errors.svg"),
    }
    txt_path, json_path = write_metrics(metrics, directory)
    written["metrics"] = txt_path
    written["metrics_json"] = json_path
    for i in range(log.n_followers):
        written[f"intervals_{i + 1}"] = plot_intervals(log, i, directory / f"intervals_agent_{i + 1}.svg")
    logger.info(f"✓ Artifacts written to {directory}")
    return written
