"""Expected running time (ERT) and success rates from run logs.

For a target phi and runs i = 1..r with budgets B_i::

    ERT = sum_i min(t_i, B_i) / #{i : t_i < inf}

where t_i is the first hitting time of phi. A run that never reached phi is
charged the evaluations it actually used (capped at B_i); this equals B_i for
runs stopped by the budget and is smaller for runs that stopped early at a
lower final target.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .runlog import RunLog, parse_runs

INF = math.inf


class ErtError(ValueError):
    pass


def _check_batch(logs) -> list[RunLog]:
    logs = list(logs)
    if not logs:
        raise ErtError("ERT of an empty run collection")
    key = (logs[0].config_name, logs[0].func_id, logs[0].dimension)
    for log in logs[1:]:
        if (log.config_name, log.func_id, log.dimension) != key:
            raise ErtError(f"mixed batch: {key} vs "
                           f"{(log.config_name, log.func_id, log.dimension)}")
    return logs


def ert(logs: Iterable[RunLog], target: float) -> tuple[float, float]:
    """Return ``(ert, success_rate)``; ert is ``inf`` when no run hits."""
    logs = _check_batch(logs)
    spent = 0
    hits = 0
    for log in logs:
        t = log.first_hitting_time(target)
        if t is None:
            spent += min(log.total_evaluations, log.budget)
        else:
            spent += min(t, log.budget)
            hits += 1
    ps = hits / len(logs)
    return (spent / hits if hits else INF), ps


def fixed_target_curve(logs: Iterable[RunLog], targets) -> list[tuple[float, float, float]]:
    targets = list(targets)
    if any(b < a for a, b in zip(targets, targets[1:])):
        raise ErtError("targets must be ascending")
    logs = _check_batch(logs)
    return [(t, *ert(logs, t)) for t in targets]


@dataclass(frozen=True)
class ErtEntry:
    ert: float
    ps: float
    runs: int
    budget: int


class ErtTable:
    """ERT/success-rate lookup keyed by (config name, func id, dim, target)."""

    def __init__(self, entries: Mapping | None = None):
        self.entries: dict[tuple[str, int, int, float], ErtEntry] = dict(entries or {})

    def __len__(self):
        return len(self.entries)

    def __contains__(self, key):
        return key in self.entries

    def __getitem__(self, key) -> ErtEntry:
        return self.entries[key]

    def add_logs(self, logs, targets) -> None:
        logs = _check_batch(logs)
        head = logs[0]
        budget = max(log.budget for log in logs)
        for t in targets:
            e, ps = ert(logs, t)
            self.entries[(head.config_name, head.func_id, head.dimension, float(t))] = \
                ErtEntry(e, ps, len(logs), budget)

    def configs(self, func_id: int, dim: int) -> list[str]:
        return sorted({c for c, f, d, _ in self.entries if (f, d) == (func_id, dim)})

    def targets(self, func_id: int, dim: int) -> list[float]:
        return sorted({t for _, f, d, t in self.entries if (f, d) == (func_id, dim)})

    def problems(self) -> list[tuple[int, int]]:
        return sorted({(f, d) for _, f, d, _ in self.entries})

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["config_name", "func_id", "dim", "target", "ert", "ps", "runs", "budget"])
            for (c, f, d, t), e in sorted(self.entries.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0], kv[0][3])):
                w.writerow([c, f, d, repr(t), fmt_value(e.ert), repr(e.ps), e.runs, e.budget])

    @classmethod
    def read_csv(cls, path) -> "ErtTable":
        table = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                key = (row["config_name"], int(row["func_id"]), int(row["dim"]), float(row["target"]))
                table.entries[key] = ErtEntry(float(row["ert"]), float(row["ps"]),
                                              int(row["runs"]), int(row["budget"]))
        return table


def fmt_value(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def load_batches(data_root) -> dict[tuple[str, int, int], list[RunLog]]:
    """All run logs below ``data_root`` grouped by (config, func id, dim)."""
    batches: dict[tuple[str, int, int], list[RunLog]] = defaultdict(list)
    for path in sorted(Path(data_root).rglob("*.dat")):
        for log in parse_runs(path):
            batches[(log.config_name, log.func_id, log.dimension)].append(log)
    return dict(batches)


def build_ert_table(data_root, targets: Mapping[tuple[int, int], Iterable[float]]) -> ErtTable:
    """ERT table for every batch under ``data_root`` whose problem has targets.

    ``targets`` maps (func id, dim) to that problem's target list.
    """
    table = ErtTable()
    for (_, func_id, dim), logs in load_batches(data_root).items():
        if (func_id, dim) in targets:
            table.add_logs(logs, targets[(func_id, dim)])
    return table
