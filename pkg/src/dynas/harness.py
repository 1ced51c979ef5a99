"""Experiment pipeline behind the command line.

Output layout of one experiment directory::

    manifest.json                 what was run, with which seeds and files
    data/F<id>_d<n>/<alg>.dat     run logs, one file per (algorithm, problem)
    data/F<id>_d<n>/<alg>.info    companion key = value header
    ert_table.csv                 ERT/ps per (algorithm, problem, target)
    report.csv                    best static vs best predicted switch policy
    policies.json                 ranked switch policies per problem
    validation.csv                measured vs predicted ERT of policies
    *.svg                         fixed-target ERT plots

Every run seed is derived from the master seed and the run's identity, so
outputs do not depend on portfolio order or on the number of workers.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import AlgorithmConfig, ConfigError, parse_config_name, portfolio
from .ert import ErtTable, build_ert_table, fixed_target_curve, fmt_value, load_batches
from .ga import Population, run_ga
from .plots import fixed_target_svg
from .prediction import (DEFAULT_PS_MIN, InsufficientData, NoFeasiblePolicy, PolicyPrediction,
                         ReportRow, best_static, generate_targets, rank_policies, write_report)
from .problems import make_problem, sample_leading_ones_level
from .runlog import write_info, write_runs
from .switching import SwitchPolicy, run_dyn_ga

DEFAULT_BUDGET = 5_000_000
DEFAULT_RUNS = 100
DEFAULT_SEGMENT_RUNS = 200
PC_GRID = tuple(i / 10 for i in range(10))


class DataError(RuntimeError):
    pass


def run_seed(master_seed: int, config_name: str, func_id: int, dim: int, run_index: int) -> int:
    """64-bit seed of one run, a hash of the run's identity."""
    key = f"{master_seed}|{config_name}|{func_id}|{dim}|{run_index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def file_stem(name: str) -> str:
    """Filesystem-safe, collision-free stem for an algorithm or policy name."""
    slug = re.sub(r"[^A-Za-z0-9.=-]+", "_", name).strip("_")[:80]
    return f"{slug}-{hashlib.blake2b(name.encode(), digest_size=4).hexdigest()}"


@dataclass(frozen=True)
class ProblemSpec:
    func_id: int
    dim: int
    final_target: float

    @classmethod
    def default(cls, func_id: int, dim: int, final_target: float | None = None) -> "ProblemSpec":
        p = make_problem(func_id, dim)
        return cls(func_id, dim, float(p.default_target if final_target is None else final_target))

    @property
    def label(self) -> str:
        return f"F{self.func_id}_d{self.dim}"


@dataclass
class ExperimentConfig:
    problems: list[ProblemSpec]
    runs: int = DEFAULT_RUNS
    budget: int = DEFAULT_BUDGET
    master_seed: int = 0
    output_dir: str = "out"
    ps_min: float = DEFAULT_PS_MIN
    top_k: int = 100
    per_alg_cap: int | None = None
    algorithms: list[str] | None = None
    jobs: int = 1
    configs: list[AlgorithmConfig] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.problems:
            raise ConfigError("no problems given")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if not 0.0 <= self.ps_min <= 1.0:
            raise ConfigError(f"ps_min must lie in [0, 1], got {self.ps_min}")
        if self.top_k < 1 or (self.per_alg_cap is not None and self.per_alg_cap < 1):
            raise ConfigError("top_k and per_alg_cap must be positive")
        self.configs = (portfolio() if self.algorithms is None
                        else [parse_config_name(a) for a in self.algorithms])
        max_mu = max(c.mu for c in self.configs)
        if self.budget < max_mu:
            raise ConfigError(f"budget {self.budget} below the largest population size {max_mu}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("configs")
        d["problems"] = [[p.func_id, p.dim, p.final_target] for p in self.problems]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        probs = []
        for p in d.pop("problems", []):
            if isinstance(p, dict):
                probs.append(ProblemSpec.default(p["func_id"], p["dim"], p.get("final_target")))
            else:
                probs.append(ProblemSpec.default(*p))
        unknown = set(d) - {f for f in cls.__dataclass_fields__ if f != "configs"}
        if unknown:
            raise ConfigError(f"unknown experiment keys {sorted(unknown)}")
        return cls(problems=probs, **d)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _json(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        return fmt_value(obj) if math.isinf(obj) else obj
    if isinstance(obj, dict):
        return {k: _json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json(v) for v in obj]
    return obj


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(_json(obj), indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _parallel(fn, tasks, jobs: int):
    if jobs == 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _write_batch(logs, directory: Path, root: Path) -> dict:
    directory.mkdir(parents=True, exist_ok=True)
    head = logs[0]
    stem = file_stem(head.config_name)
    dat, info = directory / f"{stem}.dat", directory / f"{stem}.info"
    write_runs(logs, dat)
    write_info(logs, info)
    return {
        "algId": head.config_name,
        "funcId": head.func_id,
        "DIM": head.dimension,
        "target": head.final_target,
        "runs": len(logs),
        "budget": head.budget,
        "data": dat.relative_to(root).as_posix(),
        "info": info.relative_to(root).as_posix(),
    }


# --- benchmark --------------------------------------------------------------


def cmd_benchmark(exp: ExperimentConfig) -> Path:
    """Run every configured algorithm ``exp.runs`` times on every problem.

    Returns the experiment directory.
    """
    root = Path(exp.output_dir)
    tasks = [(c, spec) for spec in exp.problems for c in exp.configs]

    def batch(task):
        cfg, spec = task
        problem = make_problem(spec.func_id, spec.dim)
        return [run_ga(cfg, problem, exp.budget, spec.final_target,
                       run_seed(exp.master_seed, cfg.name, spec.func_id, spec.dim, i), run_index=i)
                for i in range(exp.runs)]

    entries = []
    for (cfg, spec), logs in zip(tasks, _parallel(batch, tasks, exp.jobs)):
        entries.append(_write_batch(logs, root / "data" / spec.label, root))
    _dump(root / "manifest.json", {"command": "benchmark", "experiment": exp.to_dict(),
                                   "batches": entries})
    return root


# --- segment study ----------------------------------------------------------


def segment_config(pc: float, mu: int = 10, lam: int = 10) -> AlgorithmConfig:
    if pc == 0.0:
        return AlgorithmConfig(mu, lam)
    return AlgorithmConfig(mu, lam, "uniform", pc)


@dataclass(frozen=True)
class SegmentResult:
    s: int
    pc: float
    config: str
    runs: int
    mean_evals: float
    stderr: float
    ps: float


def segment_study(n: int = 100, segment: int = 5, pc_grid=PC_GRID, runs: int = DEFAULT_SEGMENT_RUNS,
                  master_seed: int = 0, budget: int = DEFAULT_BUDGET, jobs: int = 1,
                  mu: int = 10, lam: int = 10) -> list[SegmentResult]:
    """Cost of climbing one LeadingOnes segment, per start level and p_c.

    For every start level s = 0, segment, ..., n - segment and every p_c, a
    (mu+lam) GA with uniform crossover starts from ``mu`` random points of
    fitness exactly s and runs until fitness s + segment. Sampling the start
    population costs no evaluations.
    """
    if segment < 1 or n % segment:
        raise ConfigError(f"segment {segment} must divide n = {n}")
    pcs = [float(p) for p in pc_grid]
    if not pcs or any(not 0.0 <= p <= 1.0 for p in pcs):
        raise ConfigError(f"crossover probabilities must lie in [0, 1]: {pcs}")
    if any(p > 0 for p in pcs) and mu < 2:
        raise ConfigError("crossover needs mu >= 2")
    problem = make_problem(2, n)
    tasks = [(s, pc) for s in range(0, n, segment) for pc in pcs]

    def cell(task):
        s, pc = task
        cfg = segment_config(pc, mu, lam)
        evals = np.empty(runs)
        hits = 0
        for i in range(runs):
            seed = run_seed(master_seed, f"{cfg.name}@{s}", problem.func_id, n, i)
            init_rng = np.random.default_rng([seed, 1])
            init = Population.evaluated(problem, [sample_leading_ones_level(n, s, init_rng)
                                                  for _ in range(mu)])
            log = run_ga(cfg, problem, budget, s + segment, seed, run_index=i, init=init)
            evals[i] = log.total_evaluations
            hits += log.hit_final_target
        se = evals.std(ddof=1) / math.sqrt(runs) if runs > 1 else math.nan
        return SegmentResult(s, pc, cfg.name, runs, float(evals.mean()), float(se), hits / runs)

    return _parallel(cell, tasks, jobs)


def optimal_schedule(results: list[SegmentResult], mu: int = 10, lam: int = 10) -> SwitchPolicy:
    """Policy using, from each start level on, the p_c with the lowest mean cost.

    Consecutive levels with the same winner are merged into one entry.
    """
    best: dict[int, SegmentResult] = {}
    for r in results:
        if r.s not in best or r.mean_evals < best[r.s].mean_evals:
            best[r.s] = r
    entries = []
    for s in sorted(best):
        cfg = segment_config(best[s].pc, mu, lam)
        if entries and entries[-1][1] == cfg:
            continue
        entries.append((-math.inf if not entries else float(s), cfg))
    return SwitchPolicy(tuple(entries))


def cmd_segment_study(out_dir, n: int = 100, segment: int = 5, pc_grid=PC_GRID,
                      runs: int = DEFAULT_SEGMENT_RUNS, master_seed: int = 0,
                      budget: int = DEFAULT_BUDGET, jobs: int = 1) -> list[SegmentResult]:
    """Run :func:`segment_study` and write ``segment_study.csv``,
    ``optimal_policy.txt`` and a manifest to ``out_dir``."""
    results = segment_study(n, segment, pc_grid, runs, master_seed, budget, jobs)
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "segment_study.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "target", "pc", "config_name", "runs", "mean_evals", "stderr", "ps"])
        for r in results:
            w.writerow([r.s, r.s + segment, repr(r.pc), r.config, r.runs, repr(r.mean_evals),
                        repr(r.stderr), repr(r.ps)])
    optimal_schedule(results).write(root / "optimal_policy.txt")
    _dump(root / "manifest.json", {
        "command": "segment-study", "n": n, "segment": segment, "pc_grid": list(map(float, pc_grid)),
        "runs": runs, "master_seed": master_seed, "budget": budget,
        "files": ["segment_study.csv", "optimal_policy.txt"],
    })
    return results


# --- prediction -------------------------------------------------------------


def _targets_map(exp: ExperimentConfig):
    out = {}
    for spec in exp.problems:
        lo = make_problem(spec.func_id, spec.dim).min_fitness
        out[(spec.func_id, spec.dim)] = generate_targets(lo, spec.final_target)
    return out


def cmd_predict(data_dir, exp: ExperimentConfig, out_dir=None) -> dict:
    """ERT table, best static algorithm and ranked switch policies per problem.

    Writes ``ert_table.csv``, ``report.csv`` and ``policies.json``. Problems
    without usable data get an error row instead of aborting the command.
    """
    root = Path(out_dir or exp.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    if not Path(data_dir).is_dir():
        raise DataError(f"data directory {data_dir} does not exist")
    targets = _targets_map(exp)
    table = build_ert_table(data_dir, targets)
    table.write_csv(root / "ert_table.csv")

    rows, problems = [], []
    for spec in exp.problems:
        fid, dim, phi_f = spec.func_id, spec.dim, spec.final_target
        entry = {"func_id": fid, "dim": dim, "final_target": phi_f,
                 "targets": list(targets[(fid, dim)]), "error": None}
        try:
            bsa, sert = best_static(table, fid, dim, phi_f)
            ranked = rank_policies(table, fid, dim, targets[(fid, dim)], phi_f, exp.ps_min,
                                   exp.top_k, exp.per_alg_cap)
        except (InsufficientData, NoFeasiblePolicy) as exc:
            short = "insufficient data" if isinstance(exc, InsufficientData) else "no feasible policy"
            rows.append(ReportRow(fid, dim, phi_f, error=short))
            entry["error"] = str(exc)
            problems.append(entry)
            continue
        rows.append(ReportRow(fid, dim, phi_f, bsa, sert, ranked[0]))
        entry.update({
            "bsa": bsa,
            "sert": sert,
            "bsa_curve": [[t, table[(bsa, fid, dim, t)].ert] for t in targets[(fid, dim)]],
            "policies": [p.to_dict() for p in ranked],
        })
        problems.append(entry)
    write_report(rows, root / "report.csv")
    doc = {"ps_min": exp.ps_min, "top_k": exp.top_k, "per_alg_cap": exp.per_alg_cap,
           "problems": problems}
    _dump(root / "policies.json", doc)
    return doc


def load_policies(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        for entry in doc["problems"]:
            if entry.get("error"):
                continue
            entry["sert"] = float(entry["sert"])
            entry["bsa_curve"] = [[float(t), float(e)] for t, e in entry["bsa_curve"]]
            entry["policies"] = [PolicyPrediction.from_dict(p) for p in entry["policies"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: malformed policies file ({exc})") from None
    return doc


# --- validation -------------------------------------------------------------


@dataclass(frozen=True)
class ValidationResult:
    func_id: int
    dim: int
    final_target: float
    rank: int
    policy: str
    predicted_ert: float
    measured_ert: float
    ps: float
    sert: float

    @property
    def relative_deviation(self) -> float:
        """(measured - sERT) / sERT; negative when the policy beat the best static."""
        if not math.isfinite(self.sert):
            return math.nan
        return (self.measured_ert - self.sert) / self.sert


VALIDATION_COLUMNS = ["func_id", "dim", "final_target", "rank", "policy", "predicted_ert",
                      "measured_ert", "ps", "sERT", "relative_deviation"]


def _run_policy(policy: SwitchPolicy, spec: ProblemSpec, exp: ExperimentConfig):
    problem = make_problem(spec.func_id, spec.dim)
    return [run_dyn_ga(policy, problem, exp.budget, spec.final_target,
                       run_seed(exp.master_seed, policy.name, spec.func_id, spec.dim, i), run_index=i)
            for i in range(exp.runs)]


def cmd_validate(exp: ExperimentConfig, policies_path=None, policy_file=None,
                 out_dir=None) -> list[ValidationResult]:
    """Run switch policies for real and compare with predictions.

    Either ``policies_path`` (the JSON written by :func:`cmd_predict`) or a
    single schedule in ``policy_file`` is validated, in both cases on the
    problems of ``exp`` only. Run logs go to ``<out>/validate``; a summary to
    ``validation.csv`` and one SVG per problem comparing the best static
    algorithm with the best measured policy.
    """
    if (policies_path is None) == (policy_file is None):
        raise ConfigError("give exactly one of a policies file and a policy file")
    root = Path(out_dir or exp.output_dir)
    jobs = []  # (spec, rank, policy, predicted, sert, targets, bsa_curve)
    if policy_file is not None:
        policy = SwitchPolicy.read(policy_file)
        for spec in exp.problems:
            jobs.append((spec, 1, policy, math.nan, math.nan, None, None))
    else:
        doc = load_policies(policies_path)
        wanted = {(p.func_id, p.dim) for p in exp.problems}
        for entry in doc["problems"]:
            spec = ProblemSpec(int(entry["func_id"]), int(entry["dim"]), float(entry["final_target"]))
            if entry.get("error") or (spec.func_id, spec.dim) not in wanted:
                continue
            for rank, pred in enumerate(entry["policies"], start=1):
                jobs.append((spec, rank, pred.policy, pred.predicted_ert, entry["sert"],
                             entry["targets"], (entry["bsa"], entry["bsa_curve"])))
    if not jobs:
        raise DataError("no policies to validate")

    all_logs = _parallel(lambda j: _run_policy(j[2], j[0], exp), jobs, exp.jobs)
    results, best_by_problem, entries = [], {}, []
    for (spec, rank, policy, predicted, sert, targets, bsa), logs in zip(jobs, all_logs):
        entries.append(_write_batch(logs, root / "validate" / spec.label, root))
        measured, ps = fixed_target_curve(logs, [spec.final_target])[0][1:]
        res = ValidationResult(spec.func_id, spec.dim, spec.final_target, rank, policy.name,
                               predicted, measured, ps, sert)
        results.append(res)
        key = spec.label
        if targets is not None and (key not in best_by_problem or measured < best_by_problem[key][0]):
            best_by_problem[key] = (measured, policy.name, logs, targets, bsa)

    with open(root / "validation.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VALIDATION_COLUMNS)
        for r in results:
            w.writerow([r.func_id, r.dim, repr(r.final_target), r.rank, r.policy,
                        fmt_value(r.predicted_ert), fmt_value(r.measured_ert), repr(r.ps),
                        fmt_value(r.sert), repr(r.relative_deviation)])
    for key, (_, name, logs, targets, (bsa, bsa_curve)) in sorted(best_by_problem.items()):
        dyn = [(t, e) for t, e, _ in fixed_target_curve(logs, targets)]
        fixed_target_svg(root / f"validate_{key}.svg",
                         [(f"BSA {bsa}", bsa_curve), (f"dynGA {name}", dyn)], title=key)
    _dump(root / "validate_manifest.json", {"command": "validate", "experiment": exp.to_dict(),
                                            "batches": entries})
    return results


# --- report -----------------------------------------------------------------


def cmd_report(data_dir, exp: ExperimentConfig, out_dir=None, limit: int = 10) -> ErtTable:
    """ERT table over each problem's target grid plus one fixed-target SVG per
    problem showing the ``limit`` algorithms with the lowest final-target ERT."""
    root = Path(out_dir or exp.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    targets = _targets_map(exp)
    batches = load_batches(data_dir)
    table = ErtTable()
    for (name, fid, dim), logs in batches.items():
        if (fid, dim) in targets and (exp.algorithms is None or name in exp.algorithms):
            table.add_logs(logs, targets[(fid, dim)])
    if not len(table):
        raise DataError(f"no run data for the requested problems under {data_dir}")
    table.write_csv(root / "ert_table.csv")
    for spec in exp.problems:
        fid, dim = spec.func_id, spec.dim
        ts = list(targets[(fid, dim)])
        names = table.configs(fid, dim)
        names.sort(key=lambda c: (table[(c, fid, dim, spec.final_target)].ert, c))
        series = [(c, [(t, table[(c, fid, dim, t)].ert) for t in ts]) for c in names[:limit]]
        if series:
            fixed_target_svg(root / f"ert_{spec.label}.svg", series, title=spec.label)
    return table
