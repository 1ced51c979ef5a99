"""GA configurations, their canonical names and the 80-member portfolio.

Canonical names follow the benchmark-table convention::

    (1+1) EA_{>0}              mutation only, standard bit mutation
    (50+50) fast GA            mutation only, fast (power-law) mutation
    (10+10)-uniform-GA         crossover with p_c = 0.5, standard bit mutation
    (100+100)-two-point-fGA    crossover with p_c = 0.5, fast mutation

Parameters that differ from those defaults are appended in brackets, e.g.
``(10+10)-uniform-GA[pc=0.2]`` or ``(1+1) EA_{>0}[p=0.02]``, so every
config has exactly one name and every name parses back to the same config.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

CROSSOVERS = ("none", "one_point", "two_point", "uniform")
MUTATIONS = ("standard_bit", "fast")

DEFAULT_PC = 0.5
DEFAULT_BETA = 1.5

_XO_LABEL = {"one_point": "one-point", "two_point": "two-point", "uniform": "uniform"}
_LABEL_XO = {v: k for k, v in _XO_LABEL.items()}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmConfig:
    """One member of the (mu+lambda) GA family.

    ``p`` is the standard-bit mutation rate; ``None`` means 1/n for the
    problem at hand.
    """

    mu: int
    lam: int
    crossover: str = "none"
    pc: float = 0.0
    mutation: str = "standard_bit"
    p: float | None = None
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise ConfigError(f"population sizes must be positive: mu={self.mu}, lambda={self.lam}")
        if self.crossover not in CROSSOVERS:
            raise ConfigError(f"unknown crossover {self.crossover!r}")
        if self.mutation not in MUTATIONS:
            raise ConfigError(f"unknown mutation {self.mutation!r}")
        if not 0.0 <= self.pc <= 1.0:
            raise ConfigError(f"crossover probability {self.pc} outside [0, 1]")
        if (self.crossover == "none") != (self.pc == 0.0):
            raise ConfigError("crossover must be 'none' exactly when pc == 0")
        if self.crossover != "none" and self.mu < 2:
            raise ConfigError("crossover needs mu >= 2")
        if self.p is not None and not 0.0 < self.p <= 1.0:
            raise ConfigError(f"mutation rate {self.p} outside (0, 1]")
        if self.beta <= 1.0:
            raise ConfigError(f"power-law exponent must exceed 1, got {self.beta}")

    @property
    def name(self) -> str:
        scheme = f"({self.mu}+{self.lam})"
        extras = []
        if self.crossover == "none":
            base = f"{scheme} EA_{{>0}}" if self.mutation == "standard_bit" else f"{scheme} fast GA"
        else:
            suffix = "GA" if self.mutation == "standard_bit" else "fGA"
            base = f"{scheme}-{_XO_LABEL[self.crossover]}-{suffix}"
            if self.pc != DEFAULT_PC:
                extras.append(f"pc={self.pc!r}")
        if self.mutation == "standard_bit" and self.p is not None:
            extras.append(f"p={self.p!r}")
        if self.mutation == "fast" and self.beta != DEFAULT_BETA:
            extras.append(f"beta={self.beta!r}")
        return base + (f"[{','.join(extras)}]" if extras else "")

    def mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.p is None else self.p

    def __str__(self):
        return self.name


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, what: str):
        raise ConfigError(f"cannot parse config name {self.text!r}: expected {what} at position {self.pos}")

    def take(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str):
        if not self.take(literal):
            self.fail(repr(literal))

    def integer(self) -> int:
        m = re.compile(r"[1-9]\d*").match(self.text, self.pos)
        if m is None:
            self.fail("a positive integer")
        self.pos = m.end()
        return int(m.group())


def parse_config_name(name: str) -> AlgorithmConfig:
    cur = _Cursor(name)
    cur.expect("(")
    mu = cur.integer()
    cur.expect("+")
    lam = cur.integer()
    cur.expect(")")
    if cur.take(" EA_{>0}"):
        kwargs = dict(mutation="standard_bit")
    elif cur.take(" fast GA"):
        kwargs = dict(mutation="fast")
    elif cur.take("-"):
        for label, kind in _LABEL_XO.items():
            if cur.take(label):
                break
        else:
            cur.fail("one of 'one-point', 'two-point', 'uniform'")
        cur.expect("-")
        if cur.take("fGA"):
            mutation = "fast"
        elif cur.take("GA"):
            mutation = "standard_bit"
        else:
            cur.fail("'GA' or 'fGA'")
        kwargs = dict(crossover=kind, pc=DEFAULT_PC, mutation=mutation)
    else:
        cur.fail("' EA_{>0}', ' fast GA' or '-<crossover>-'")

    allowed = {"pc": "crossover" in kwargs, "p": kwargs["mutation"] == "standard_bit",
               "beta": kwargs["mutation"] == "fast"}
    if cur.take("["):
        close = name.find("]", cur.pos)
        if close < 0:
            cur.fail("']'")
        for item in name[cur.pos:close].split(","):
            key, _, value = item.partition("=")
            if not allowed.get(key):
                cur.fail(f"one of {sorted(k for k, ok in allowed.items() if ok)}")
            try:
                kwargs[key] = float(value)
            except ValueError:
                cur.fail(f"a number for {key}")
            cur.pos += len(item) + 1
        cur.pos = close + 1
    if cur.pos != len(name):
        cur.fail("end of name")
    cfg = AlgorithmConfig(mu, lam, **kwargs)
    if cfg.name != name:
        # e.g. an explicit default such as "[pc=0.5]"
        raise ConfigError(f"{name!r} is not canonical; use {cfg.name!r}")
    return cfg


def population_schemes() -> list[tuple[int, int]]:
    schemes = []
    for lam in (10, 50, 100):
        schemes += [(lam, 1), (lam, lam // 2), (lam, lam)]
    schemes += [(1, lam) for lam in (1, 10, 50, 100)]
    return schemes


def portfolio() -> list[AlgorithmConfig]:
    """The 80 static GAs: 13 population schemes x 2 mutation operators
    mutation-only, plus 3 crossovers (p_c = 0.5) for the 9 schemes with mu > 1.
    """
    configs = []
    for mu, lam in population_schemes():
        for mut in MUTATIONS:
            configs.append(AlgorithmConfig(mu, lam, mutation=mut))
        if mu == 1:
            continue
        for xo in CROSSOVERS[1:]:
            for mut in MUTATIONS:
                configs.append(AlgorithmConfig(mu, lam, crossover=xo, pc=DEFAULT_PC, mutation=mut))
    return configs
