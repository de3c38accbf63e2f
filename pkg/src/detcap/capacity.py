"""Sweeps over the number of detectors that classify scheme families by
whether they reach the detection capacity ``1/p_av``.

A family reaches capacity when, for a round length ``r(n)`` growing with
``n``, almost every configuration has ``S(p) > 1 - eps`` and
``T(p) < 1/p_av + delta``. The verdict is read off two curves: the exact
(or estimated) configuration mean of ``T(p)`` and its configuration
variance, the latter compared against a floor built from ``b_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .alphabet import ConfigAlphabet, p_average
from .ensemble import (
    DEFAULT_SLACK,
    EnsembleReport,
    e_constant,
    ensemble_alphas,
    mean_and_se,
    report_from_alphas,
    time_and_success,
    vanishing,
)
from .schemes import FamilySpec, SchemeFamily, pairwise_disjointness, prefix_distinctness

ACHIEVES = "ACHIEVES_CAPACITY"
FAILS_A1 = "FAILS_A1"
FAILS_A2 = "FAILS_A2"
FAILS_BOTH = "FAILS_BOTH"
INCONCLUSIVE = "INCONCLUSIVE"

CONVERSE_FACTORS = (0.7, 0.8, 0.9)
SWEEP_HEADER = ("n", "r", "mean_T", "se_mean", "var_T", "se_var", "mean_S", "b_mass", "se_mass")


@dataclass(frozen=True)
class AchievabilityTarget:
    s: float
    epsilon: float = 0.05
    delta: float = 0.05

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"target time s must be positive, got {self.s}")
        for name in ("epsilon", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")

    @classmethod
    def at_capacity(cls, alphabet: ConfigAlphabet, epsilon: float = 0.05, delta: float = 0.05):
        return cls(1.0 / p_average(alphabet), epsilon, delta)


@dataclass(frozen=True)
class RoundSchedule:
    """``r(n)``: ``sqrt`` gives floor(sqrt n), ``log`` gives ceil(c ln n),
    ``fixed`` gives ``r0``. With ``cap`` set, ``r`` never exceeds ``n``."""

    rule: str = "sqrt"
    c: float = 1.0
    r0: int = 1
    cap: bool = True

    def __post_init__(self):
        if self.rule not in ("sqrt", "log", "fixed"):
            raise ValueError(f"unknown schedule rule {self.rule!r}")
        if self.rule == "log" and not self.c > 0:
            raise ValueError("log schedule needs c > 0")
        if self.rule == "fixed" and self.r0 < 1:
            raise ValueError("fixed schedule needs r0 >= 1")

    def __call__(self, n: int) -> int:
        if self.rule == "sqrt":
            r = math.isqrt(n)
        elif self.rule == "log":
            r = math.ceil(self.c * math.log(n))
        else:
            r = self.r0
        r = max(1, r)
        return min(r, n) if self.cap else r

    @property
    def grows(self) -> bool:
        return self.rule != "fixed"

    @classmethod
    def from_dict(cls, d: dict) -> "RoundSchedule":
        return cls(d.get("rule", "sqrt"), float(d.get("c", 1.0)), int(d.get("r0", 1)), bool(d.get("cap", True)))

    def to_dict(self) -> dict:
        return {"rule": self.rule, "c": self.c, "r0": self.r0, "cap": self.cap}


def mass_from_alphas(A: np.ndarray, target: AchievabilityTarget) -> tuple[float, float]:
    T, S = time_and_success(A)
    hit = (S > 1.0 - target.epsilon) & (T < target.s + target.delta)
    return mean_and_se(hit.astype(float))


def b_mass(family: SchemeFamily, alphabet: ConfigAlphabet, target: AchievabilityTarget, replicates: int,
           seed: int, key: Sequence[int] = ()) -> tuple[float, float]:
    """Fraction of configurations in the achievability set, with its standard error."""
    return mass_from_alphas(ensemble_alphas(family, alphabet, replicates, seed, key), target)


def variance_floor(family: SchemeFamily, alphabet: ConfigAlphabet, k: int = 3,
                   slack: float = DEFAULT_SLACK) -> tuple[float, dict[int, float]]:
    """``sum_{j<=k} e(j,j)(1-b_j) - slack`` and the ``b_j`` used."""
    k = min(k, family.r)
    b = {j: pairwise_disjointness(family, j).b_k for j in range(1, k + 1)}
    return sum(e_constant(j, j, alphabet) * (1 - b[j]) for j in b) - slack, b


@dataclass
class SweepRow:
    n: int
    r: int
    report: EnsembleReport
    b_mass: float
    se_mass: float
    gap: float
    var_floor: float
    a: dict[int, float]
    b: dict[int, float]
    converse: dict[float, tuple[float, float]]
    a_eps_mass: float
    se_a_eps: float

    def csv_values(self) -> list:
        rep = self.report
        return [self.n, self.r, rep.mean_T, rep.se_mean, rep.var_T, rep.se_var, rep.mean_S,
                self.b_mass, self.se_mass]


@dataclass
class CapacityVerdict:
    label: str
    target: AchievabilityTarget
    rows: list[SweepRow]
    verdict: str
    predicted: str
    mean_fail: bool
    var_fail: bool
    converse_holds: bool
    a_eps_holds: bool
    notes: list[str] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.verdict == self.predicted

    @property
    def grid(self) -> list[int]:
        return [row.n for row in self.rows]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "verdict": self.verdict,
            "predicted": self.predicted,
            "consistent": self.consistent,
            "mean_fail": self.mean_fail,
            "var_fail": self.var_fail,
            "converse_holds": self.converse_holds,
            "a_eps_holds": self.a_eps_holds,
            "target": {"s": self.target.s, "epsilon": self.target.epsilon, "delta": self.target.delta},
            "grid": self.grid,
            "rounds": [row.r for row in self.rows],
            "b_mass": [row.b_mass for row in self.rows],
            "mean_gap": [row.gap for row in self.rows],
            "exact_mean_T": [row.report.exact_mean_T for row in self.rows],
            "var_T": [row.report.var_T for row in self.rows],
            "var_floor": [row.var_floor for row in self.rows],
            "a_k": {str(k): [row.a[k] for row in self.rows] for k in self.rows[0].a},
            "b_k": {str(k): [row.b[k] for row in self.rows] for k in self.rows[0].b},
            "converse_mass": {repr(f): [row.converse[f][0] for row in self.rows] for f in self.rows[0].converse},
            "a_eps_mass": [row.a_eps_mass for row in self.rows],
            "notes": list(self.notes),
        }


def predict_verdict(a_limits: dict[int, list[float]], b_limits: dict[int, list[float]],
                    tol: float = 0.05) -> str:
    """Verdict implied by whether ``1 - a_k`` and ``1 - b_k`` vanish along the grid."""
    a1 = all(vanishing([1 - x for x in v], tol) for v in a_limits.values())
    a2 = all(vanishing([1 - x for x in v], tol) for v in b_limits.values())
    if a1 and a2:
        return ACHIEVES
    if not a1 and not a2:
        return FAILS_BOTH
    return FAILS_A2 if a1 else FAILS_A1


def classify(rows: Sequence[SweepRow], target: AchievabilityTarget) -> tuple[str, bool, bool]:
    mean_fail = all(row.gap > target.delta for row in rows)
    var_fail = all(row.var_floor > 0 and row.report.var_T >= row.var_floor for row in rows)
    top = rows[-1]
    if mean_fail and var_fail:
        verdict = FAILS_BOTH
    elif mean_fail:
        verdict = FAILS_A1
    elif var_fail:
        verdict = FAILS_A2
    elif top.b_mass > 1 - target.epsilon and top.gap <= target.delta:
        verdict = ACHIEVES
    else:
        verdict = INCONCLUSIVE
    return verdict, mean_fail, var_fail


def capacity_sweep(spec: FamilySpec, alphabet: ConfigAlphabet, grid: Sequence[int], schedule: RoundSchedule,
                   target: AchievabilityTarget | None = None, replicates: int = 10_000, seed: int = 0,
                   k_check: int = 3, converse_factors: Sequence[float] = CONVERSE_FACTORS,
                   key: Sequence[int] = ()) -> CapacityVerdict:
    grid = [int(n) for n in grid]
    if not grid:
        raise ValueError("empty n-grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n-grid must be strictly ascending")
    capacity = 1.0 / p_average(alphabet)
    target = AchievabilityTarget.at_capacity(alphabet) if target is None else target
    rows: list[SweepRow] = []
    for idx, n in enumerate(grid):
        r = schedule(n)
        fam = spec.build(n, r)
        A = ensemble_alphas(fam, alphabet, replicates, seed, (*key, idx))
        rep = report_from_alphas(fam, alphabet, A)
        mass, se_mass = mass_from_alphas(A, target)
        mean = rep.exact_mean_T if rep.exact_mean_T is not None else rep.mean_T
        floor, b = variance_floor(fam, alphabet, k_check)
        a = {k: prefix_distinctness(fam, k, rng=np.random.default_rng(seed)).a_k for k in b}
        converse = {}
        for f in converse_factors:
            below = AchievabilityTarget(f * capacity, target.epsilon, target.delta)
            converse[f] = mass_from_alphas(A, below)
        _, S = time_and_success(A)
        a_eps, se_a_eps = mean_and_se((S > 1.0 - target.epsilon).astype(float))
        rows.append(SweepRow(n, r, rep, mass, se_mass, abs(mean - capacity), floor, a, b,
                             converse, a_eps, se_a_eps))

    verdict, mean_fail, var_fail = classify(rows, target)
    predicted = predict_verdict({k: [row.a[k] for row in rows] for k in rows[0].a},
                                {k: [row.b[k] for row in rows] for k in rows[0].b})
    top = rows[-1]
    converse_holds = all(m <= 1 - target.epsilon for m, _ in top.converse.values())
    a_eps_holds = top.a_eps_mass >= 1 - 2 * target.epsilon - 4 * top.se_a_eps
    notes = []
    if not schedule.grows:
        notes.append("fixed round length: r does not grow with n")
    return CapacityVerdict(spec.name, target, rows, verdict, predicted, mean_fail, var_fail,
                           converse_holds, a_eps_holds, notes)


@dataclass
class SConvergenceRow:
    n: int
    r: int
    mean_S: float
    se_S: float
    moment_bound: float
    worst_bound: float

    @property
    def holds(self) -> bool:
        return self.mean_S >= self.moment_bound - 4 * self.se_S


@dataclass
class SConvergenceReport:
    rows: list[SConvergenceRow]
    schedule_grows: bool
    min_S: np.ndarray | None = field(default=None, repr=False)

    @property
    def bound_holds(self) -> bool:
        return all(row.holds for row in self.rows)

    @property
    def converges(self) -> bool:
        """``E S`` is nondecreasing within noise and its gap to 1 at the top
        of the grid is under 1e-3."""
        vals = [row.mean_S for row in self.rows]
        ses = [row.se_S for row in self.rows]
        steady = all(b >= a - 4 * (sa + sb) for a, b, sa, sb in zip(vals, vals[1:], ses, ses[1:]))
        return self.schedule_grows and steady and 1.0 - vals[-1] < 1e-3

    def to_dict(self) -> dict:
        return {
            "schedule_grows": self.schedule_grows,
            "bound_holds": self.bound_holds,
            "converges": self.converges,
            "rows": [{"n": r.n, "r": r.r, "mean_S": r.mean_S, "se_S": r.se_S,
                      "moment_bound": r.moment_bound, "worst_bound": r.worst_bound} for r in self.rows],
        }


def s_convergence_check(spec: FamilySpec, alphabet: ConfigAlphabet, grid: Sequence[int], schedule: RoundSchedule,
                        replicates: int = 10_000, seed: int = 0, key: Sequence[int] = ()) -> SConvergenceReport:
    """Compare ``E_conf S(p)`` with ``1 - E(1-p)^r`` along the grid.

    Every configuration also obeys ``S(p) >= 1 - (1-p_min)^r``; the smallest
    observed ``S(p)`` per grid point is kept in ``min_S`` for that check.
    """
    rows = []
    mins = []
    for idx, n in enumerate(grid):
        r = schedule(n)
        fam = spec.build(n, r)
        A = ensemble_alphas(fam, alphabet, replicates, seed, (*key, idx))
        _, S = time_and_success(A)
        mean_S, se_S = mean_and_se(S)
        mins.append(float(S.min()))
        rows.append(SConvergenceRow(n, r, mean_S, se_S, 1.0 - alphabet.moment(r),
                                    1.0 - (1.0 - alphabet.p_min) ** r))
    return SConvergenceReport(rows, schedule.grows, np.array(mins))
