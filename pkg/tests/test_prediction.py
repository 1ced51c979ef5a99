import math

import numpy as np
import pytest

from dynas.ert import ErtEntry, ErtTable
from dynas.prediction import (InsufficientData, NoFeasiblePolicy, ReportRow, best_dynamic,
                              best_static, generate_targets, predicted_ert, rank_policies,
                              write_report)

from . import oracles
from .synth import random_table, table_dicts


def table_from(rows, func_id=1, dim=10):
    """rows: {(config, target): (ert, ps)}"""
    return ErtTable({(c, func_id, dim, float(t)): ErtEntry(e, p, 10, 100)
                     for (c, t), (e, p) in rows.items()})


def test_targets_linear_and_log_points():
    ts = generate_targets(0, 100)
    values = list(ts)
    assert values == sorted(set(values)) and values[0] == 0 and values[-1] == 100
    assert {5.0 * k for k in range(1, 20)} <= set(values)
    assert len(values) == 40  # 19 + 19 interior points and both ends, no collisions
    shifted = [math.exp(math.log(101) * k / 20) - 1 for k in range(1, 20)]
    assert all(any(abs(v - s) < 1e-12 for v in values) for s in shifted)


def test_targets_positive_minimum_and_errors():
    ts = generate_targets(1, 51)
    assert ts[0] == 1 and ts[-1] == 51
    assert all(1 <= v <= 51 for v in ts)
    logs = [math.exp(math.log(51) * k / 20) for k in range(1, 20)]
    assert all(any(abs(v - s) < 1e-12 for v in ts) for s in logs)
    with pytest.raises(ValueError):
        generate_targets(5, 5)
    with pytest.raises(ValueError):
        generate_targets(0, 1e-12)
    with pytest.raises(ValueError):
        generate_targets(6, 5)


def test_predicted_ert_direct_substitution():
    t = table_from({("A", 5): (5.0, 1.0), ("B", 5): (8.0, 0.2), ("B", 9): (20.0, 0.9),
                    ("A", 9): (math.inf, 0.0)})
    pred = predicted_ert(t, "A", "B", 5, 9, 1, 10)
    assert pred.predicted_ert == 17.0 and pred.feasible
    assert (pred.ert_a1_s, pred.ert_a2_f, pred.ert_a2_s) == (5.0, 20.0, 8.0)
    # A2's success rate at phi_s is not filtered
    assert predicted_ert(t, "A", "B", 5, 9, 1, 10, ps_min=0.95).feasible is False
    infeasible = predicted_ert(t, "B", "A", 5, 9, 1, 10)
    assert not infeasible.feasible and infeasible.predicted_ert == math.inf
    with pytest.raises(InsufficientData, match=r"\(C, F1/d10, target 5"):
        predicted_ert(t, "C", "B", 5, 9, 1, 10)


def test_same_algorithm_collapses_exactly():
    rng = np.random.default_rng(0)
    for _ in range(200):
        e = rng.random(3) * 10 ** rng.integers(0, 7, 3)
        t = table_from({("A", 1): (e[0], 1.0), ("A", 2): (e[1], 1.0)})
        assert predicted_ert(t, "A", "A", 1, 2, 1, 10).predicted_ert == e[1]


def test_best_static():
    t = table_from({("B", 9): (10.0, 1.0), ("A", 9): (12.0, 1.0)})
    assert best_static(t, 1, 10, 9) == ("B", 10.0)
    tie = table_from({("B", 9): (10.0, 1.0), ("A", 9): (10.0, 0.8)})
    assert best_static(tie, 1, 10, 9) == ("A", 10.0)
    with pytest.raises(NoFeasiblePolicy, match="no successful algorithm"):
        best_static(table_from({("A", 9): (math.inf, 0.0)}), 1, 10, 9)
    with pytest.raises(InsufficientData):
        best_static(ErtTable(), 1, 10, 9)


def test_toy_grid_by_hand():
    rows = {("A", 1): (2.0, 1.0), ("A", 2): (30.0, 1.0),
            ("B", 1): (10.0, 1.0), ("B", 2): (15.0, 1.0)}
    t = table_from(rows)
    best = best_dynamic(t, 1, 10, [1, 2], 2)
    # A until 1, then B: 2 + 15 - 10 = 7
    assert (best.a1, best.a2, best.phi_s, best.predicted_ert) == ("A", "B", 1.0, 7.0)
    ranked = rank_policies(t, 1, 10, [1, 2], 2, top_k=8)
    assert [p.predicted_ert for p in ranked] == sorted(p.predicted_ert for p in ranked)
    assert len({p.key for p in ranked}) == len(ranked) == 8
    assert rank_policies(t, 1, 10, [1, 2], 2, top_k=1) == [best]


def test_tie_breaking_by_names_then_target():
    rows = {(c, t): (1.0, 1.0) for c in ("B", "A") for t in (1, 2)}
    best = best_dynamic(table_from(rows), 1, 10, [2, 1], 2)
    assert (best.a1, best.a2, best.phi_s) == ("A", "A", 1.0)


def test_no_feasible_policy():
    rows = {("A", 1): (1.0, 0.5), ("A", 2): (2.0, 0.5)}
    with pytest.raises(NoFeasiblePolicy):
        best_dynamic(table_from(rows), 1, 10, [1, 2], 2)


def test_cap_one_per_a2():
    rows = {}
    for c in ("A", "B", "C"):
        rows[(c, 1)] = (1.0, 1.0)
        rows[(c, 2)] = (100.0 if c != "C" else 2.0, 1.0)
    ranked = rank_policies(table_from(rows), 1, 10, [1, 2], 2, top_k=10, per_alg_cap=1)
    assert len({p.a2 for p in ranked}) == len(ranked)
    assert len({p.a1 for p in ranked}) == len(ranked)


def test_matches_bruteforce_on_random_tables():
    rng = np.random.default_rng(11)
    for _ in range(150):
        table, configs, targets, phi_f = random_table(rng, int(rng.integers(1, 6)),
                                                      int(rng.integers(1, 6)))
        erts, ps = table_dicts(table)
        expected = oracles.enumerate_policies(erts, ps, configs, targets, phi_f, 0.8)
        if not expected:
            with pytest.raises(NoFeasiblePolicy):
                best_dynamic(table, 1, 10, targets, phi_f)
            continue
        got = rank_policies(table, 1, 10, targets, phi_f, top_k=10**6)
        assert [(p.predicted_ert, p.a1, p.a2, p.phi_s) for p in got] == expected
        cap = int(rng.integers(1, 4))
        capped = rank_policies(table, 1, 10, targets, phi_f, top_k=5, per_alg_cap=cap)
        assert [(p.predicted_ert, p.a1, p.a2, p.phi_s) for p in capped] == \
            oracles.capped(expected, 5, cap)


def test_report_csv(tmp_path):
    rows = {("A", 1): (2.0, 1.0), ("A", 2): (30.0, 1.0),
            ("B", 1): (10.0, 1.0), ("B", 2): (15.0, 1.0)}
    t = table_from(rows)
    best = best_dynamic(t, 1, 10, [1, 2], 2)
    bsa, sert = best_static(t, 1, 10, 2)
    row = ReportRow(1, 10, 2.0, bsa, sert, best)
    assert row.ratio == (15.0 - 7.0) / 15.0
    write_report([row, ReportRow(2, 10, 5.0, error="insufficient data")], tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "funcId,fTarget,BSA,sERT,A1,A2,sTarget,dERT,ratio"
    assert lines[1] == f"1,2.0,B,15.0,A,B,1.0,7.0,{8 / 15!r}"
    assert lines[2].startswith("2,5.0,insufficient data")
