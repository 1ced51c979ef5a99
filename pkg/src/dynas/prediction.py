"""Switch-once policy prediction from an ERT table.

A policy (A1, A2, phi_s) runs A1 until fitness phi_s is first reached and A2
afterwards. Its predicted cost to reach phi_f is::

    T = ERT(A1, phi_s) + ERT(A2, phi_f) - ERT(A2, phi_s)

Policies are only admitted when A1 reaches phi_s and A2 reaches phi_f with a
success rate of at least ``ps_min``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .config import parse_config_name
from .ert import INF, ErtTable, fmt_value
from .switching import SwitchPolicy

DEFAULT_PS_MIN = 0.8
TARGET_TOL = 1e-9


class InsufficientData(LookupError):
    pass


class NoFeasiblePolicy(LookupError):
    pass


@dataclass(frozen=True)
class TargetSet:
    """Ascending fitness targets in [phi_min, phi_final], ending at phi_final."""

    values: tuple[float, ...]
    phi_min: float
    phi_final: float

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def generate_targets(phi_min: float, phi_final: float, points_per_scale: int = 19) -> TargetSet:
    """Interior points of an evenly spaced partition of [phi_min, phi_final] on
    a linear and on a log scale, plus both endpoints, ascending and deduplicated.

    For phi_min <= 0 the log scale is taken on the interval shifted by
    ``1 - phi_min``.
    """
    if not phi_final - phi_min > TARGET_TOL:
        raise ValueError(f"need phi_min < phi_final, got [{phi_min}, {phi_final}]")
    parts = points_per_scale + 1
    span = phi_final - phi_min
    values = [float(phi_min), float(phi_final)]
    values += [phi_min + span * k / parts for k in range(1, parts)]
    shift = 1.0 - phi_min if phi_min <= 0 else 0.0
    lo, hi = math.log(phi_min + shift), math.log(phi_final + shift)
    values += [math.exp(lo + (hi - lo) * k / parts) - shift for k in range(1, parts)]
    out: list[float] = []
    for v in sorted(values):
        if out and v - out[-1] <= TARGET_TOL:
            continue
        out.append(v)
    out[-1] = float(phi_final)
    return TargetSet(tuple(out), float(phi_min), float(phi_final))


@dataclass(frozen=True)
class PolicyPrediction:
    a1: str
    a2: str
    phi_s: float
    phi_f: float
    ert_a1_s: float
    ert_a2_f: float
    ert_a2_s: float
    feasible: bool

    @property
    def predicted_ert(self) -> float:
        if not self.feasible:
            return INF
        return _combine(self.ert_a1_s, self.ert_a2_f, self.ert_a2_s)

    @property
    def policy(self) -> SwitchPolicy:
        return SwitchPolicy.switch_once(parse_config_name(self.a1), parse_config_name(self.a2), self.phi_s)

    @property
    def key(self) -> tuple[str, str, float]:
        return self.a1, self.a2, self.phi_s

    def to_dict(self) -> dict:
        return {
            "A1": self.a1,
            "A2": self.a2,
            "phi_s": self.phi_s,
            "phi_f": self.phi_f,
            "predicted_ert": self.predicted_ert,
            "terms": [self.ert_a1_s, self.ert_a2_f, self.ert_a2_s],
            "feasible": self.feasible,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyPrediction":
        e1, e2, e3 = (float(x) for x in d["terms"])
        return cls(d["A1"], d["A2"], float(d["phi_s"]), float(d["phi_f"]), e1, e2, e3,
                   bool(d["feasible"]))


def _combine(e1, e2, e3):
    # (e1 - e3) + e2 rather than e1 + e2 - e3: with A1 == A2 the first two
    # terms cancel exactly, so T == ERT(A2, phi_f) bit for bit.
    return (e1 - e3) + e2


def _entry(table: ErtTable, config: str, func_id: int, dim: int, target: float):
    try:
        return table[(config, func_id, dim, float(target))]
    except KeyError:
        raise InsufficientData(
            f"insufficient data: no ERT for ({config}, F{func_id}/d{dim}, target {target})") from None


def predicted_ert(table: ErtTable, a1: str, a2: str, phi_s: float, phi_f: float,
                  func_id: int, dim: int, ps_min: float = DEFAULT_PS_MIN) -> PolicyPrediction:
    s1 = _entry(table, a1, func_id, dim, phi_s)
    f2 = _entry(table, a2, func_id, dim, phi_f)
    s2 = _entry(table, a2, func_id, dim, phi_s)
    finite = all(math.isfinite(e.ert) for e in (s1, f2, s2))
    feasible = finite and s1.ps >= ps_min and f2.ps >= ps_min
    return PolicyPrediction(a1, a2, float(phi_s), float(phi_f), s1.ert, f2.ert, s2.ert, feasible)


def best_static(table: ErtTable, func_id: int, dim: int, phi_f: float) -> tuple[str, float]:
    """Config with the smallest ERT at ``phi_f``; ties go to the smaller name."""
    best = None
    for c in table.configs(func_id, dim):
        key = (c, func_id, dim, float(phi_f))
        if key not in table:
            continue
        e = table[key].ert
        if best is None or e < best[1]:
            best = (c, e)
    if best is None:
        raise InsufficientData(f"insufficient data: no ERT at target {phi_f} for F{func_id}/d{dim}")
    if math.isinf(best[1]):
        raise NoFeasiblePolicy(f"no successful algorithm on F{func_id}/d{dim} at target {phi_f}")
    return best


def _grid(table: ErtTable, func_id: int, dim: int, targets, phi_f: float, configs=None):
    configs = sorted(configs) if configs is not None else table.configs(func_id, dim)
    targets = sorted({float(t) for t in targets} | {float(phi_f)})
    if not configs:
        raise InsufficientData(f"insufficient data: no algorithms for F{func_id}/d{dim}")
    E = np.empty((len(configs), len(targets)))
    P = np.empty_like(E)
    for i, c in enumerate(configs):
        for j, t in enumerate(targets):
            e = _entry(table, c, func_id, dim, t)
            E[i, j] = e.ert
            P[i, j] = e.ps
    return configs, targets, E, P, targets.index(float(phi_f))


def enumerate_policies(table: ErtTable, func_id: int, dim: int, targets, phi_f: float,
                       ps_min: float = DEFAULT_PS_MIN, configs=None) -> list[PolicyPrediction]:
    """All feasible switch-once policies, best first.

    Order: predicted ERT, then A1 name, A2 name and phi_s ascending.
    """
    configs, targets, E, P, f = _grid(table, func_id, dim, targets, phi_f, configs)
    e1 = E[:, None, :]          # A1 at phi_s
    e3 = E[None, :, :]          # A2 at phi_s
    e2 = E[None, :, f, None]    # A2 at phi_f
    with np.errstate(invalid="ignore"):
        T = _combine(e1, e2, e3)
    feasible = (np.isfinite(e1) & np.isfinite(e2) & np.isfinite(e3)
                & (P[:, None, :] >= ps_min) & (P[None, :, f, None] >= ps_min))
    T = np.where(feasible, T, INF)
    flat = T.ravel()
    order = np.argsort(flat, kind="stable")
    n_ok = int(feasible.sum())
    nc, nt = len(configs), len(targets)
    out = []
    for idx in order[:n_ok]:
        i, rem = divmod(int(idx), nc * nt)
        j, s = divmod(rem, nt)
        out.append(PolicyPrediction(configs[i], configs[j], targets[s], float(phi_f),
                                    float(E[i, s]), float(E[j, f]), float(E[j, s]), True))
    return out


def best_dynamic(table: ErtTable, func_id: int, dim: int, targets, phi_f: float,
                 ps_min: float = DEFAULT_PS_MIN, configs=None) -> PolicyPrediction:
    ranked = enumerate_policies(table, func_id, dim, targets, phi_f, ps_min, configs)
    if not ranked:
        raise NoFeasiblePolicy(f"no feasible policy for F{func_id}/d{dim} at ps >= {ps_min}")
    return ranked[0]


def rank_policies(table: ErtTable, func_id: int, dim: int, targets, phi_f: float,
                  ps_min: float = DEFAULT_PS_MIN, top_k: int = 100,
                  per_alg_cap: int | None = None, configs=None) -> list[PolicyPrediction]:
    """The ``top_k`` best feasible policies.

    With ``per_alg_cap`` a policy is skipped once its A1 has been used as A1
    (or its A2 as A2) that many times among the policies already kept.
    """
    ranked = enumerate_policies(table, func_id, dim, targets, phi_f, ps_min, configs)
    if not ranked:
        raise NoFeasiblePolicy(f"no feasible policy for F{func_id}/d{dim} at ps >= {ps_min}")
    if per_alg_cap is None:
        return ranked[:top_k]
    as_a1: dict[str, int] = {}
    as_a2: dict[str, int] = {}
    kept = []
    for pred in ranked:
        if len(kept) == top_k:
            break
        if as_a1.get(pred.a1, 0) >= per_alg_cap or as_a2.get(pred.a2, 0) >= per_alg_cap:
            continue
        kept.append(pred)
        as_a1[pred.a1] = as_a1.get(pred.a1, 0) + 1
        as_a2[pred.a2] = as_a2.get(pred.a2, 0) + 1
    return kept


REPORT_COLUMNS = ["funcId", "fTarget", "BSA", "sERT", "A1", "A2", "sTarget", "dERT", "ratio"]


@dataclass(frozen=True)
class ReportRow:
    func_id: int
    dim: int
    phi_f: float
    bsa: str | None = None
    sert: float = INF
    best: PolicyPrediction | None = None
    error: str | None = None

    @property
    def ratio(self) -> float:
        if self.best is None or not math.isfinite(self.sert):
            return math.nan
        return (self.sert - self.best.predicted_ert) / self.sert

    def cells(self) -> list[str]:
        if self.error:
            return [str(self.func_id), repr(self.phi_f), self.error, "", "", "", "", "", ""]
        b = self.best
        return [str(self.func_id), repr(self.phi_f), self.bsa, fmt_value(self.sert),
                b.a1, b.a2, repr(b.phi_s), fmt_value(b.predicted_ert), repr(self.ratio)]


def write_report(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for row in rows:
            w.writerow(row.cells())
