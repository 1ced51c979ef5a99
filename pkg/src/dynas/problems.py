"""Pseudo-Boolean benchmark functions (OneMax and its W-model variants).

All functions are maximised. A genome is a 1-d ``uint8`` array of 0/1 values.
Evaluation is done by a numba kernel so the GA loop can call it without
leaving compiled code; :func:`evaluate` is the Python-facing entry point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

SUPPORTED_FUNCTIONS = (1, 2, 3, 4, 5, 6, 7, 8, 24)

EPISTASIS_BLOCK = 4  # F7 block length
NEUTRALITY_BLOCK = 3  # F6 majority block length
TRAP_SIZE = 5  # F24 segment length

DUMMY_FRACTION = {4: 0.5, 5: 0.1}

# Final targets used for d=100 (the benchmark data's reference table).
DEFAULT_FINAL_TARGETS = {
    1: 100.0,
    2: 100.0,
    3: 5050.0,
    4: 50.0,
    5: 90.0,
    6: 33.0,
    7: 100.0,
    8: 51.0,
    24: 17.2,
}

NAMES = {
    1: "OneMax",
    2: "LeadingOnes",
    3: "Linear (harmonic weights)",
    4: "OneMax + dummy variables (50%)",
    5: "OneMax + dummy variables (10%)",
    6: "OneMax + neutrality",
    7: "OneMax + epistasis",
    8: "OneMax + ruggedness",
    24: "Concatenated Trap",
}


class ProblemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """A benchmark function instance.

    ``active`` holds the indices of the bits that contribute to the fitness;
    it differs from ``range(dimension)`` only for the dummy-variable
    functions F4/F5.
    """

    func_id: int
    dimension: int
    instance_seed: int
    active: np.ndarray = field(repr=False)
    optimum: float
    min_fitness: float

    @property
    def name(self) -> str:
        return NAMES[self.func_id]

    @property
    def dummies(self) -> np.ndarray:
        mask = np.ones(self.dimension, dtype=bool)
        mask[self.active] = False
        return np.flatnonzero(mask)

    @property
    def default_target(self) -> float:
        if self.dimension == 100:
            return DEFAULT_FINAL_TARGETS[self.func_id]
        return self.optimum

    @property
    def max_levels(self) -> int:
        """Upper bound on the number of distinct fitness values."""
        n = self.dimension
        if self.func_id == 3:
            return n * (n + 1) // 2 + 1
        return n + 2

    def evaluate(self, x) -> float:
        return evaluate(self, x)

    def __eq__(self, other):
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self.func_id == other.func_id
            and self.dimension == other.dimension
            and self.instance_seed == other.instance_seed
            and np.array_equal(self.active, other.active)
        )

    def __hash__(self):
        return hash((self.func_id, self.dimension, self.instance_seed))


def make_problem(func_id: int, dimension: int, instance_seed: int = 1) -> ProblemInstance:
    if func_id not in SUPPORTED_FUNCTIONS:
        raise ProblemError(f"unsupported function: F{func_id}")
    if dimension < 4:
        raise ProblemError(f"dimension too small: {dimension} < 4")
    n = dimension
    if func_id == 24 and n % TRAP_SIZE:
        raise ProblemError(f"F24 needs a dimension divisible by {TRAP_SIZE}, got {n}")

    active = np.arange(n, dtype=np.int64)
    if func_id in DUMMY_FRACTION:
        n_dummy = math.ceil(DUMMY_FRACTION[func_id] * n)
        # dedicated stream so the dummy set depends on the instance seed only
        rng = np.random.default_rng([func_id, n, instance_seed])
        dummies = rng.choice(n, size=n_dummy, replace=False)
        mask = np.ones(n, dtype=bool)
        mask[dummies] = False
        active = np.flatnonzero(mask).astype(np.int64)

    if func_id in (1, 2, 7):
        optimum = float(n)
    elif func_id == 3:
        optimum = float(n * (n + 1) // 2)
    elif func_id in (4, 5):
        optimum = float(active.size)
    elif func_id == 6:
        optimum = float(n // NEUTRALITY_BLOCK)
    elif func_id == 8:
        optimum = float(ruggedness_r(n, n))
    else:
        optimum = float(n // TRAP_SIZE)

    min_fitness = 1.0 if func_id == 8 else 0.0
    active.setflags(write=False)
    return ProblemInstance(func_id, n, int(instance_seed), active, optimum, min_fitness)


def as_genome(x, n: int | None = None) -> np.ndarray:
    g = np.ascontiguousarray(x, dtype=np.uint8)
    if g.ndim != 1:
        raise ProblemError("a genome must be one-dimensional")
    if n is not None and g.size != n:
        raise ProblemError(f"dimension mismatch: genome has {g.size} bits, problem has {n}")
    return g


def evaluate(p: ProblemInstance, x) -> float:
    g = as_genome(x, p.dimension)
    return _fitness(p.func_id, g, p.active)


def ruggedness_r(i: int, d: int) -> int:
    """Ruggedness map applied to the OneMax value ``i`` of a ``d``-bit string."""
    if not 0 <= i <= d:
        raise ProblemError(f"ruggedness argument {i} outside [0, {d}]")
    return int(_ruggedness(i, d))


def epistasis_transform(block, nu: int = EPISTASIS_BLOCK) -> np.ndarray:
    """Epistasis map of one block: output bit i is the XOR of every input bit
    except ``block[nu - 1 - i]``.

    For even ``nu`` this is a bijection, and input blocks at Hamming distance
    one are mapped to blocks at distance ``nu - 1``.
    """
    b = as_genome(block)
    if b.size != nu:
        raise ProblemError(f"block length {b.size} != {nu}")
    out = np.empty(nu, dtype=np.uint8)
    _epistasis_block(b, 0, nu, out)
    return out


def sample_leading_ones_level(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample from the LeadingOnes level set ``{x : LO(x) = s}``."""
    if s < 0 or s > n:
        raise ProblemError(f"level {s} outside [0, {n}]")
    x = np.ones(n, dtype=np.uint8)
    if s == n:
        return x
    x[s] = 0
    x[s + 1 :] = rng.integers(0, 2, size=n - s - 1, dtype=np.uint8)
    return x


# --- compiled kernels -------------------------------------------------------


@nb.njit(cache=True, nogil=True)
def _ruggedness(i, d):
    if i == d:
        return (d + 1) // 2 + 1
    if d % 2 == 0:
        return i // 2 + 1
    return (i + 1) // 2 + 1


@nb.njit(cache=True, nogil=True)
def _epistasis_block(x, h, nu, out):
    parity = 0
    for j in range(nu):
        parity ^= x[h + j]
    for i in range(nu):
        out[h + i] = parity ^ x[h + nu - 1 - i]


@nb.njit(cache=True, nogil=True)
def _fitness(func_id, x, active):
    n = x.size
    if func_id == 1:
        s = 0
        for i in range(n):
            s += x[i]
        return float(s)
    if func_id == 2:
        s = 0
        while s < n and x[s] == 1:
            s += 1
        return float(s)
    if func_id == 3:
        s = 0
        for i in range(n):
            s += (i + 1) * x[i]
        return float(s)
    if func_id == 4 or func_id == 5:
        s = 0
        for i in active:
            s += x[i]
        return float(s)
    if func_id == 6:
        s = 0
        for b in range(n // 3):
            if x[3 * b] + x[3 * b + 1] + x[3 * b + 2] >= 2:
                s += 1
        return float(s)
    if func_id == 7:
        nu = 4
        s = 0
        h = 0
        while h + nu <= n:
            parity = 0
            for j in range(nu):
                parity ^= x[h + j]
            for i in range(nu):
                s += parity ^ x[h + nu - 1 - i]
            h += nu
        for i in range(h, n):
            s += x[i]
        return float(s)
    if func_id == 8:
        s = 0
        for i in range(n):
            s += x[i]
        return float(_ruggedness(s, n))
    if func_id == 24:
        k = 5
        num = 0
        for h in range(0, n - n % k, k):
            u = 0
            for j in range(k):
                u += x[h + j]
            if u == k:
                num += k
            else:
                num += k - 1 - u
        # one division of an integer numerator keeps equal values bit-identical
        return num / k
    return np.nan
