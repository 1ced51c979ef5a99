"""Fixed-target run logs and their text format.

A data file holds the runs of one (algorithm, problem) batch::

    % suite = PBO
    % funcId = 7
    % DIM = 100
    % algId = (50+50) EA_{>0}
    % run 0 seed 1234 evaluations 5000 budget 5000 target 100 hit 0
    1 54
    3 55
    ...
    % run 1 seed 9876 ...

Only improvements are logged: one ``<evaluations> <best_f>`` row each time
the best-so-far fitness increases. Other lines starting with ``%`` are
comments. A companion ``.info`` file repeats the header as ``key = value``
lines for external analyzers.
"""

from __future__ import annotations

import bisect
import io
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from ._kernel import TOL

SUITE = "PBO"
_HEADER_KEYS = ("suite", "funcId", "DIM", "algId")


class LogError(ValueError):
    pass


class ParseError(LogError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path}:" if path else ""
        where += f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


@dataclass(frozen=True)
class ImprovementRecord:
    evaluations: int
    best_f: float


@dataclass
class RunLog:
    """Improvement trace of a single run plus its metadata."""

    config_name: str
    func_id: int
    dimension: int
    run_index: int
    seed: int
    budget: int
    final_target: float
    evaluations: list[int] = field(default_factory=list)
    best_f: list[float] = field(default_factory=list)
    total_evaluations: int = 0
    hit_final_target: bool = False

    @property
    def records(self) -> list[ImprovementRecord]:
        return [ImprovementRecord(e, f) for e, f in zip(self.evaluations, self.best_f)]

    @property
    def final_best(self) -> float:
        return self.best_f[-1] if self.best_f else -math.inf

    def record(self, evaluations: int, best_f: float) -> None:
        """Append an improvement; both coordinates must strictly increase."""
        if self.evaluations:
            if evaluations <= self.evaluations[-1]:
                raise LogError(
                    f"evaluations not increasing: {evaluations} after {self.evaluations[-1]}")
            if best_f <= self.best_f[-1]:
                raise LogError(f"fitness not improving: {best_f} after {self.best_f[-1]}")
        elif evaluations < 1:
            raise LogError(f"evaluation count must be positive, got {evaluations}")
        self.evaluations.append(int(evaluations))
        self.best_f.append(float(best_f))
        self.total_evaluations = max(self.total_evaluations, int(evaluations))

    def first_hitting_time(self, target: float) -> int | None:
        """Evaluations needed to first reach ``target``; ``None`` if never."""
        i = bisect.bisect_left(self.best_f, target - TOL)
        return self.evaluations[i] if i < len(self.best_f) else None


def record_improvement(log: RunLog, evaluations: int, best_f: float) -> None:
    log.record(evaluations, best_f)


def first_hitting_time(log: RunLog, target: float) -> int | None:
    return log.first_hitting_time(target)


# --- text format ------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x)) if math.isinf(x) else format(x, ".17g")


def format_header(config_name: str, func_id: int, dimension: int) -> str:
    return (f"% suite = {SUITE}\n% funcId = {func_id}\n% DIM = {dimension}\n"
            f"% algId = {config_name}\n")


def format_block(log: RunLog) -> str:
    lines = [
        f"% run {log.run_index} seed {log.seed} evaluations {log.total_evaluations} "
        f"budget {log.budget} target {_fmt(log.final_target)} hit {int(log.hit_final_target)}"
    ]
    lines += [f"{e} {_fmt(f)}" for e, f in zip(log.evaluations, log.best_f)]
    return "\n".join(lines) + "\n"


def write_runs(logs, sink) -> None:
    """Write a batch of runs sharing one (algorithm, problem) pair.

    ``sink`` is a path or a text stream.
    """
    logs = list(logs)
    if not logs:
        raise LogError("nothing to write")
    head = logs[0]
    for log in logs:
        if (log.config_name, log.func_id, log.dimension) != (head.config_name, head.func_id, head.dimension):
            raise LogError("a batch must share algorithm, function and dimension")
    text = format_header(head.config_name, head.func_id, head.dimension)
    text += "".join(format_block(log) for log in logs)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def write_run(log: RunLog, sink) -> None:
    write_runs([log], sink)


def write_info(logs, path) -> None:
    logs = list(logs)
    head = logs[0]
    lines = [
        f"suite = {SUITE}",
        f"funcId = {head.func_id}",
        f"DIM = {head.dimension}",
        f"algId = {head.config_name}",
        f"runs = {len(logs)}",
        f"budget = {head.budget}",
        f"target = {_fmt(head.final_target)}",
        "seeds = " + ", ".join(str(log.seed) for log in logs),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


_RUN_FIELDS = ("run", "seed", "evaluations", "budget", "target", "hit")


def parse_runs(source, path=None) -> list[RunLog]:
    """Parse a batch data file (path, text stream or string with newlines)."""
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        path = path or source
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()

    header: dict[str, str] = {}
    runs: list[RunLog] = []
    pending = None  # (log, declared total, line of the run header)
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.startswith("%"):
            body = line[1:].strip()
            if body.startswith("run "):
                if len(header) < len(_HEADER_KEYS):
                    missing = [k for k in _HEADER_KEYS if k not in header]
                    raise ParseError(f"missing header field(s) {missing}", lineno, path)
                _close(pending, path)
                pending = _open_run(body, header, lineno, path)
                runs.append(pending[0])
            elif "=" in body and pending is None:
                key, _, value = body.partition("=")
                key = key.strip()
                if key in _HEADER_KEYS:
                    header[key] = value.strip()
            continue
        if pending is None:
            raise ParseError("data row before any run block", lineno, path)
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<evaluations> <best_f>', got {line!r}", lineno, path)
        try:
            e, f = int(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"malformed row {line!r}", lineno, path) from None
        try:
            pending[0].record(e, f)
        except LogError as exc:
            raise ParseError(str(exc), lineno, path) from None
    _close(pending, path)
    if not runs:
        if len(header) < len(_HEADER_KEYS):
            raise ParseError("missing header", None, path)
        raise ParseError("no run blocks", None, path)
    return runs


def parse_run(source, path=None) -> RunLog:
    runs = parse_runs(source, path)
    if len(runs) != 1:
        raise ParseError(f"expected exactly one run, found {len(runs)}", None, path)
    return runs[0]


def _open_run(body: str, header: dict, lineno: int, path):
    tokens = body.split()
    if len(tokens) != 2 * len(_RUN_FIELDS) or tuple(tokens[0::2]) != _RUN_FIELDS:
        raise ParseError(f"malformed run line '% {body}'", lineno, path)
    v = dict(zip(tokens[0::2], tokens[1::2]))
    try:
        log = RunLog(
            config_name=header["algId"],
            func_id=int(header["funcId"]),
            dimension=int(header["DIM"]),
            run_index=int(v["run"]),
            seed=int(v["seed"]),
            budget=int(v["budget"]),
            final_target=float(v["target"]),
            hit_final_target=v["hit"] == "1",
        )
        total = int(v["evaluations"])
    except ValueError:
        raise ParseError(f"malformed run line '% {body}'", lineno, path) from None
    if v["hit"] not in ("0", "1"):
        raise ParseError(f"hit flag must be 0 or 1, got {v['hit']!r}", lineno, path)
    return log, total, lineno


def _close(pending, path) -> None:
    if pending is None:
        return
    log, total, start = pending
    if not log.evaluations:
        raise ParseError("run block without records", start, path)
    if total < log.total_evaluations:
        raise ParseError(
            f"declared evaluations {total} below last record {log.total_evaluations}", start, path)
    log.total_evaluations = total
