import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynas.runlog import (LogError, ParseError, RunLog, first_hitting_time, format_block,
                          parse_run, parse_runs, record_improvement, write_run, write_runs)


def make_log(records, **kw):
    meta = dict(config_name="(1+1) EA_{>0}", func_id=1, dimension=100, run_index=0, seed=42,
                budget=1000, final_target=100.0)
    meta.update(kw)
    log = RunLog(**meta)
    for e, f in records:
        log.record(e, f)
    log.hit_final_target = bool(records) and records[-1][1] >= log.final_target
    return log


def test_record_improvement():
    log = make_log([])
    record_improvement(log, 1, 54.0)
    record_improvement(log, 5, 60.0)
    assert [(r.evaluations, r.best_f) for r in log.records] == [(1, 54.0), (5, 60.0)]
    assert log.final_best == 60.0
    with pytest.raises(LogError):
        record_improvement(log, 6, 53.0)
    with pytest.raises(LogError):
        record_improvement(log, 5, 61.0)


def test_first_hitting_time():
    log = make_log([(1, 54), (7, 60), (30, 100)])
    assert first_hitting_time(log, 60) == 7
    assert first_hitting_time(log, 59.5) == 7
    assert first_hitting_time(log, 100.5) is None
    assert first_hitting_time(log, -math.inf) == 1


def roundtrip(log):
    buf = io.StringIO()
    write_run(log, buf)
    return parse_run(buf.getvalue())


def test_roundtrip_simple():
    log = make_log([(1, 54.0), (7, 60.0), (30, 100.0)], total_evaluations=0)
    log.total_evaluations = 30
    assert roundtrip(log) == log


def test_roundtrip_fractional_and_infinite_target():
    log = make_log([(3, 0.1 + 0.2), (9, 17.2)], final_target=math.inf, budget=50)
    log.total_evaluations = 50
    assert roundtrip(log) == log


runs_strategy = st.lists(
    st.tuples(st.integers(1, 10_000), st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)),
    min_size=1, max_size=25,
)


@settings(max_examples=200, deadline=None)
@given(runs_strategy, st.integers(0, 2**64 - 1), st.integers(0, 50))
def test_roundtrip_property(raw, seed, extra):
    evals = sorted({e for e, _ in raw})
    fits = sorted({f for _, f in raw})
    recs = list(zip(evals, fits))
    log = make_log(recs, seed=seed)
    log.total_evaluations = recs[-1][0] + extra
    assert roundtrip(log) == log
    buf1, buf2 = io.StringIO(), io.StringIO()
    write_run(log, buf1)
    write_run(parse_run(buf1.getvalue()), buf2)
    assert buf1.getvalue() == buf2.getvalue()


def test_batch_file(tmp_path):
    logs = [make_log([(1, 50.0), (i + 2, 60.0 + i)], run_index=i, seed=i) for i in range(3)]
    path = tmp_path / "batch.dat"
    write_runs(logs, path)
    text = path.read_text()
    assert text.startswith("% suite = PBO\n% funcId = 1\n% DIM = 100\n% algId = (1+1) EA_{>0}\n")
    assert text.count("% run ") == 3
    assert parse_runs(path) == logs
    with pytest.raises(LogError):
        write_runs([logs[0], make_log([(1, 1.0)], func_id=2)], tmp_path / "mixed.dat")


HEADER = "% suite = PBO\n% funcId = 1\n% DIM = 10\n% algId = (1+1) EA_{>0}\n"
RUN = "% run 0 seed 1 evaluations 9 budget 100 target 10 hit 0\n"


@pytest.mark.parametrize("text, line", [
    (HEADER + RUN + "1 5\n4 3\n", 7),            # fitness decreases
    (HEADER + RUN + "5 5\n4 6\n", 7),            # evaluations decrease
    (HEADER + RUN + "1 five\n", 6),              # malformed row
    (HEADER + RUN + "1 5 7\n", 6),               # too many fields
    (HEADER + RUN, 5),                           # run without records
    (HEADER + "% run 0 seed x\n1 2\n", 5),       # malformed run line
    (HEADER + RUN.replace("evaluations 9", "evaluations 2") + "1 5\n4 6\n", 5),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ParseError, match=f"line {line}:"):
        parse_runs(text)


def test_missing_header():
    with pytest.raises(ParseError, match="missing header"):
        parse_runs("% funcId = 1\n" + RUN + "1 2\n")
    with pytest.raises(ParseError, match="missing header"):
        parse_runs("% nothing here\n\n")


def test_comments_ignored_and_path_in_message(tmp_path):
    text = HEADER + "% a comment\n" + RUN + "1 5\n% another\n3 6\n"
    log = parse_run(text)
    assert log.evaluations == [1, 3] and log.total_evaluations == 9
    bad = tmp_path / "bad.dat"
    bad.write_text(HEADER + RUN + "3 5\n2 6\n")
    with pytest.raises(ParseError, match="bad.dat:line 7"):
        parse_runs(bad)


def test_block_format_is_exact():
    log = make_log([(1, 54.0), (12, 60.5)], seed=7)
    log.total_evaluations = 20
    assert format_block(log) == (
        "% run 0 seed 7 evaluations 20 budget 1000 target 100 hit 0\n1 54\n12 60.5\n")
