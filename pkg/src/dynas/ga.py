"""The (mu+lambda) GA family: variation operators, plus-selection and runs.

Each generation creates lambda offspring. An offspring is a crossover child
(probability p_c, parents drawn with replacement) or a mutant of one uniformly
chosen parent. Offspring identical to a parent take over the parent's fitness
without spending an evaluation. The best mu of parents and offspring survive,
ties broken uniformly at random.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernel as K
from .config import AlgorithmConfig
from .problems import ProblemInstance, as_genome, evaluate
from .runlog import RunLog

_XO_CODES = {"none": K.XO_NONE, "one_point": K.XO_ONE_POINT,
             "two_point": K.XO_TWO_POINT, "uniform": K.XO_UNIFORM}
_MUT_CODES = {"standard_bit": K.MUT_STANDARD, "fast": K.MUT_FAST}


class RunError(ValueError):
    pass


@dataclass
class Population:
    """Parent population as a (mu, n) bit matrix plus the matching fitness vector."""

    genomes: np.ndarray
    fitness: np.ndarray

    def __post_init__(self):
        self.genomes = np.ascontiguousarray(self.genomes, dtype=np.uint8)
        self.fitness = np.ascontiguousarray(self.fitness, dtype=np.float64)
        if self.genomes.ndim != 2 or self.genomes.shape[0] != self.fitness.size:
            raise ValueError("genomes must be (size, n) with one fitness per row")

    @classmethod
    def evaluated(cls, problem: ProblemInstance, genomes) -> "Population":
        genomes = np.atleast_2d(np.asarray(genomes, dtype=np.uint8))
        return cls(genomes, np.array([evaluate(problem, g) for g in genomes]))

    def __len__(self):
        return self.fitness.size

    @property
    def best_fitness(self) -> float:
        return float(self.fitness.max())


@dataclass(frozen=True)
class RunStats:
    crossovers: int
    mutations: int
    stage: int
    switches: np.ndarray  # per stage: evaluations at switch, carried, copies, fresh


@lru_cache(maxsize=64)
def power_law_cdf(n: int, beta: float) -> np.ndarray:
    """Cumulative distribution of P(l = i) ~ i^-beta over i = 1..n//2."""
    m = max(n // 2, 1)
    w = np.arange(1, m + 1, dtype=np.float64) ** -beta
    cdf = np.cumsum(w) / w.sum()
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


# --- operators --------------------------------------------------------------


def standard_bit_mutation(x, p: float, rng: np.random.Generator):
    """Flip l ~ Bin_{>0}(n, p) distinct random bits of a copy of ``x``.

    Returns the mutant and l.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"mutation rate {p} outside (0, 1]")
    y = as_genome(x).copy()
    ell = K.sbm_count(y.size, p, rng)
    K.flip_distinct(y, ell, np.arange(y.size), rng)
    return y, int(ell)


def fast_mutation(x, beta: float, rng: np.random.Generator):
    """Flip l distinct bits with P(l = i) ~ i^-beta on {1, ..., n//2}."""
    y = as_genome(x).copy()
    if beta <= 1.0:
        raise ValueError(f"power-law exponent must exceed 1, got {beta}")
    if y.size < 2:
        raise ValueError("fast mutation needs n >= 2")
    ell = K.power_law_count(power_law_cdf(y.size, float(beta)), rng)
    K.flip_distinct(y, ell, np.arange(y.size), rng)
    return y, int(ell)


def crossover(kind: str, x, y, rng: np.random.Generator) -> np.ndarray:
    """One child of ``x`` and ``y`` by one-point, two-point or uniform crossover."""
    x, y = as_genome(x), as_genome(y)
    if x.size != y.size:
        raise ValueError(f"parent lengths differ: {x.size} != {y.size}")
    if kind not in ("one_point", "two_point", "uniform"):
        raise ValueError(f"unknown crossover {kind!r}")
    if kind == "one_point" and x.size < 2 or kind == "two_point" and x.size < 3:
        raise ValueError(f"{kind} crossover needs more bits than {x.size}")
    child = np.empty_like(x)
    K.crossover_into(_XO_CODES[kind], x, y, child, rng)
    return child


def select_mu_best(pool: Population, mu: int, rng: np.random.Generator) -> Population:
    if mu > len(pool):
        raise ValueError(f"cannot select {mu} from a pool of {len(pool)}")
    keep = K.select_best(pool.fitness, mu, rng)
    return Population(pool.genomes[keep], pool.fitness[keep])


# --- runs -------------------------------------------------------------------


def _stage_arrays(configs, n):
    m = max(n // 2, 1)
    cdfs = np.empty((len(configs), m))
    for i, c in enumerate(configs):
        cdfs[i] = power_law_cdf(n, float(c.beta))
    return (
        np.array([c.mu for c in configs], dtype=np.int64),
        np.array([c.lam for c in configs], dtype=np.int64),
        np.array([_XO_CODES[c.crossover] for c in configs], dtype=np.int64),
        np.array([c.pc for c in configs], dtype=np.float64),
        np.array([_MUT_CODES[c.mutation] for c in configs], dtype=np.int64),
        np.array([c.mutation_rate(n) for c in configs], dtype=np.float64),
        cdfs,
    )


def run_schedule(configs, thresholds, problem: ProblemInstance, budget: int, target: float,
                 seed: int, *, init: Population | None = None, run_index: int = 0,
                 name: str | None = None):
    """Run a GA that activates ``configs[k]`` once ``thresholds[k]`` is reached.

    ``thresholds[0]`` is ignored (the first config is active from the start).
    Returns the :class:`RunLog` and the :class:`RunStats` of the run.
    """
    configs = list(configs)
    n = problem.dimension
    if len(configs) != len(thresholds) or not configs:
        raise RunError("need one threshold per config")
    if budget < configs[0].mu:
        raise RunError(f"budget {budget} smaller than the initial population {configs[0].mu}")
    for c in configs:
        if c.crossover == "two_point" and n < 3:
            raise RunError(f"{c.name} needs dimension >= 3")

    if init is None:
        init_pop = np.empty((0, n), dtype=np.uint8)
        init_fit = np.empty(0)
    else:
        if init.genomes.shape != (configs[0].mu, n):
            raise RunError(f"initial population must be {(configs[0].mu, n)}, got {init.genomes.shape}")
        init_pop, init_fit = init.genomes, init.fitness

    cap = problem.max_levels + 1
    rec_e = np.zeros(cap, dtype=np.int64)
    rec_f = np.zeros(cap)
    switches = np.full((len(configs), 4), -1, dtype=np.int64)
    st = np.zeros(6, dtype=np.int64)
    best = np.array([-np.inf])
    rng = np.random.default_rng(seed)

    K.evolve(problem.func_id, problem.active, np.asarray(thresholds, dtype=np.float64),
             *_stage_arrays(configs, n), init_pop, init_fit, int(budget), float(target),
             rng, rec_e, rec_f, switches, st, best)

    nrec = int(st[K.NREC])
    log = RunLog(
        config_name=name or configs[0].name,
        func_id=problem.func_id,
        dimension=n,
        run_index=run_index,
        seed=int(seed),
        budget=int(budget),
        final_target=float(target),
        evaluations=rec_e[:nrec].tolist(),
        best_f=rec_f[:nrec].tolist(),
        total_evaluations=int(st[K.EVALS]),
        hit_final_target=bool(best[0] >= target - K.TOL),
    )
    stats = RunStats(int(st[K.NXO]), int(st[K.NMUT]), int(st[K.STAGE]), switches)
    return log, stats


def run_ga(config: AlgorithmConfig, problem: ProblemInstance, budget: int, final_target: float,
           seed: int, *, run_index: int = 0, init: Population | None = None) -> RunLog:
    """One run of a static GA; stops at ``final_target`` or after ``budget`` evaluations."""
    log, _ = run_schedule([config], [-np.inf], problem, budget, final_target, seed,
                          init=init, run_index=run_index)
    return log
