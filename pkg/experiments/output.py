"""Result files: CSV with a '#'-prefixed run header, JSON for verify reports."""

from __future__ import annotations

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Any, Iterable, Sequence

import yaml

from experiments import __version__

if TYPE_CHECKING:
    from config.experiment import ExperimentConfig

logger = logging.getLogger(__name__)


def format_value(v: Any) -> str:
    """17 significant digits for floats (round-trip exact), str() otherwise."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def run_metadata(cfg: "ExperimentConfig") -> dict[str, Any]:
    return {
        "tool": "risklab",
        "version": __version__,
        "experiment": cfg.experiment,
        "timestamp": cfg.timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": cfg.seed,
    }


def header_lines(cfg: "ExperimentConfig", columns: Sequence[str]) -> list[str]:
    meta = run_metadata(cfg)
    lines = [f"# {meta['tool']} {meta['version']}",
             f"# experiment: {meta['experiment']}",
             f"# timestamp: {meta['timestamp']}",
             f"# seed: {meta['seed']}",
             "# config:"]
    echo = yaml.safe_dump(cfg.raw, sort_keys=True, default_flow_style=None)
    lines += [f"#   {line}" for line in echo.splitlines()]
    lines.append(f"# columns: {','.join(columns)}")
    return lines


def write_csv(path: str | Path, cfg: "ExperimentConfig", columns: Sequence[str],
              rows: Iterable[dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="") as f:
        for line in header_lines(cfg, columns):
            f.write(line + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
            count += 1
    logger.info("Wrote %d rows to %s", count, path)
    return path


def read_csv(path: str | Path) -> tuple[dict[str, str], list[dict[str, float]]]:
    """Parse a result CSV back into (header fields, rows of floats)."""
    header: dict[str, str] = {}
    data_lines = []
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                key, sep, val = line[1:].strip().partition(": ")
                if sep and not line.startswith("#   "):
                    header[key] = val
            else:
                data_lines.append(line)
    reader = csv.DictReader(data_lines)
    return header, [{k: float(v) for k, v in row.items()} for row in reader]


def write_json(path: str | Path, cfg: "ExperimentConfig", payload: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {**run_metadata(cfg), "config": cfg.raw, **payload}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, default=str)
        f.write("\n")
    logger.info("Wrote report to %s", path)
    return path
