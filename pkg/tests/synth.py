"""Random synthetic inputs shared by unit and acceptance tests."""

from __future__ import annotations

import math

import numpy as np

from dynas.ert import ErtEntry, ErtTable
from dynas.runlog import RunLog


def random_batch(rng: np.random.Generator, runs: int | None = None, name: str = "(1+1) EA_{>0}"):
    """Logs of one (algorithm, problem) batch; some runs stop early, some at the budget."""
    runs = runs or int(rng.integers(1, 12))
    budget = int(rng.integers(20, 400))
    logs = []
    for i in range(runs):
        log = RunLog(name, 1, 50, i, int(rng.integers(0, 2**63)), budget, 50.0)
        k = int(rng.integers(1, 12))
        evals = np.sort(rng.choice(np.arange(1, budget + 1), size=min(k, budget), replace=False))
        fits = np.sort(rng.choice(np.arange(0, 51), size=evals.size, replace=False)).astype(float)
        for e, f in zip(evals, fits):
            log.record(int(e), float(f))
        log.hit_final_target = log.final_best >= 50
        log.total_evaluations = log.evaluations[-1] if log.hit_final_target else budget
        if not log.hit_final_target and rng.random() < 0.3:
            # a run that stopped early (e.g. at a lower final target)
            log.total_evaluations = int(rng.integers(log.evaluations[-1], budget + 1))
        logs.append(log)
    return logs


def random_table(rng: np.random.Generator, n_configs: int, n_targets: int, func_id=1, dim=10):
    """Random ERT table with consistent entries (ert = inf exactly when ps = 0).

    ERT values are small integers or halves so that ties occur often.
    """
    configs = [f"({i + 1}+1) EA_{{>0}}" for i in range(n_configs)]
    targets = sorted({float(t) for t in rng.choice(np.arange(0, 30), size=n_targets, replace=False)})
    phi_f = targets[-1]
    table = ErtTable()
    for c in configs:
        for t in targets:
            ps = float(rng.choice([0.0, 0.5, 0.8, 0.9, 1.0]))
            ert = math.inf if ps == 0 else float(rng.integers(1, 40)) / 2
            table.entries[(c, func_id, dim, t)] = ErtEntry(ert, ps, 10, 1000)
    return table, configs, targets, phi_f


def table_dicts(table, func_id=1, dim=10):
    erts = {(c, t): e.ert for (c, f, d, t), e in table.entries.items() if (f, d) == (func_id, dim)}
    ps = {(c, t): e.ps for (c, f, d, t), e in table.entries.items() if (f, d) == (func_id, dim)}
    return erts, ps
