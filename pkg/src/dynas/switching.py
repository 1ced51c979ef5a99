"""Running switching policies as real GA runs.

A :class:`SwitchPolicy` is a schedule of (threshold, config) entries. The run
starts with the first config; after the first generation whose best-so-far
fitness reaches the next threshold, the parent population is resized for the
new config (see :func:`handoff_population`) and the new config takes over.
Several thresholds passed in one generation are applied in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernel as K
from .config import AlgorithmConfig, parse_config_name
from .ga import Population, RunError, run_schedule
from .problems import ProblemInstance


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class SwitchPolicy:
    schedule: tuple[tuple[float, AlgorithmConfig], ...]

    def __post_init__(self):
        sched = tuple((float(t), c) for t, c in self.schedule)
        if not sched:
            raise PolicyError("empty schedule")
        if sched[0][0] != -math.inf:
            raise PolicyError("the first threshold must be -inf")
        for (a, _), (b, _) in zip(sched, sched[1:]):
            if not b > a:
                raise PolicyError(f"thresholds must strictly increase ({a} then {b})")
        object.__setattr__(self, "schedule", sched)

    @classmethod
    def switch_once(cls, a1: AlgorithmConfig, a2: AlgorithmConfig, phi_s: float) -> "SwitchPolicy":
        return cls(((-math.inf, a1), (phi_s, a2)))

    @property
    def thresholds(self) -> list[float]:
        return [t for t, _ in self.schedule]

    @property
    def configs(self) -> list[AlgorithmConfig]:
        return [c for _, c in self.schedule]

    @property
    def name(self) -> str:
        """E.g. ``(1+1) EA_{>0} | 96.0 | (10+10)-uniform-GA``."""
        parts = [self.schedule[0][1].name]
        for t, c in self.schedule[1:]:
            parts += [repr(t), c.name]
        return " | ".join(parts)

    def to_text(self) -> str:
        return "".join(f"{_fmt_threshold(t)} {c.name}\n" for t, c in self.schedule)

    @classmethod
    def from_text(cls, text: str) -> "SwitchPolicy":
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            head, _, rest = line.strip().partition(" ")
            try:
                t = float(head)
                cfg = parse_config_name(rest.strip())
            except ValueError as exc:
                raise PolicyError(f"line {lineno}: {exc}") from None
            entries.append((t, cfg))
        return cls(tuple(entries))

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def read(cls, path) -> "SwitchPolicy":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _fmt_threshold(t: float) -> str:
    return "-inf" if t == -math.inf else repr(t)


@dataclass(frozen=True)
class HandoffReport:
    from_mu: int
    to_mu: int
    carried: int
    best_copies: int
    fresh: int


@dataclass
class EvaluationCounter:
    count: int = 0


def handoff_counts(mu1: int, mu2: int) -> tuple[int, int, int]:
    """(carried, best copies, fresh) for a resize from ``mu1`` to ``mu2`` parents."""
    if mu1 >= mu2:
        return mu2, 0, 0
    copies = max(mu2 // 2 - mu1, 0)
    return mu1, copies, mu2 - mu1 - copies


def handoff_population(pop: Population, mu1: int, mu2: int, problem: ProblemInstance,
                       rng: np.random.Generator, counter: EvaluationCounter | None = None):
    """Resize a parent population of ``mu1`` to ``mu2`` individuals.

    Shrinking keeps the best ``mu2`` (ties uniform). Growing keeps everyone,
    adds ``max(mu2 // 2 - mu1, 0)`` copies of a best individual and fills up
    with uniformly random individuals, each evaluated once and counted on
    ``counter``.

    Returns:
        The new :class:`Population` and a :class:`HandoffReport`.
    """
    if len(pop) == 0:
        raise PolicyError("cannot hand off an empty population")
    if len(pop) != mu1:
        raise PolicyError(f"population has {len(pop)} individuals, expected {mu1}")
    if mu2 < 1:
        raise PolicyError(f"target population size must be >= 1, got {mu2}")
    n = pop.genomes.shape[1]
    size = max(mu1, mu2)
    genomes = np.zeros((size, n), dtype=np.uint8)
    fit = np.zeros(size)
    genomes[:mu1] = pop.genomes
    fit[:mu1] = pop.fitness
    st = np.zeros(6, dtype=np.int64)
    best = np.array([pop.fitness.max()])
    cap = mu2 + 1
    report = np.zeros(3, dtype=np.int64)
    K.handoff(genomes, fit, mu1, mu2, np.empty_like(genomes), np.empty_like(fit), rng,
              problem.func_id, problem.active, st, best, np.zeros(cap, dtype=np.int64),
              np.zeros(cap), np.iinfo(np.int64).max, math.inf, report)
    if counter is not None:
        counter.count += int(st[K.EVALS])
    out = Population(genomes[:mu2].copy(), fit[:mu2].copy())
    return out, HandoffReport(mu1, mu2, *(int(v) for v in report))


def run_dyn_ga(policy: SwitchPolicy, problem: ProblemInstance, budget: int, final_target: float,
               seed: int, *, run_index: int = 0, init: Population | None = None,
               with_stats: bool = False):
    """One run of ``policy``; same stopping rule and log as a static run.

    With ``with_stats`` the :class:`~dynas.ga.RunStats` (switch evaluation
    counts and handoff sizes per stage) are returned as well.
    """
    try:
        log, stats = run_schedule(policy.configs, policy.thresholds, problem, budget,
                                  final_target, seed, init=init, run_index=run_index,
                                  name=policy.name)
    except RunError as exc:
        raise PolicyError(str(exc)) from None
    return (log, stats) if with_stats else log
