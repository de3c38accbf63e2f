"""Brute-force reference computations.

Everything here works by exhaustive enumeration: of detector decision
strings, of configurations, or of scheme prefixes. None of it calls the
kernels, the closed-form detection law or the ensemble formulas, so
agreement with those paths is meaningful. Budgets are hard limits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_outcome_enum: int = 12          # largest r for 2^r decision strings
    max_config_enum: int = 1_000_000    # |alphabet|^n
    max_tuple_enum: int = 10_000_000    # number of prefix tuples

    def __post_init__(self):
        if min(self.max_outcome_enum, self.max_config_enum, self.max_tuple_enum) <= 0:
            raise ValueError("oracle budgets must be positive")


DEFAULT_BUDGET = OracleBudget()


@dataclass(frozen=True)
class OracleLaw:
    pmf: tuple[float, ...]
    mass_at_infinity: float

    @property
    def mean_truncated(self) -> float:
        return math.fsum(k * p for k, p in enumerate(self.pmf, start=1))


def oracle_pmf(assignment: Sequence[int], probs: Sequence[float],
               budget: OracleBudget = DEFAULT_BUDGET) -> OracleLaw:
    """Law of the first detecting slot by summing over all ``2^r`` decision strings.

    ``assignment`` holds 1-based detector labels.
    """
    r = len(assignment)
    if r > budget.max_outcome_enum:
        raise OracleBudgetExceeded(f"r={r} exceeds outcome budget {budget.max_outcome_enum}")
    p = np.array([float(probs[i - 1]) for i in assignment])
    bits = ((np.arange(2 ** r)[:, None] >> np.arange(r)[None, :]) & 1).astype(bool)
    weight = np.where(bits, p[None, :], 1.0 - p[None, :]).prod(axis=1)
    first = np.where(bits.any(axis=1), bits.argmax(axis=1), r)
    bins = [math.fsum(weight[first == k]) for k in range(r + 1)]
    return OracleLaw(tuple(bins[:r]), bins[r])


def enumerate_configurations(values: Sequence[float], weights: Sequence[float], n: int,
                             budget: OracleBudget = DEFAULT_BUDGET):
    """Yield ``(probs, probability)`` over every configuration of ``n`` detectors."""
    count = len(values) ** n
    if count > budget.max_config_enum:
        raise OracleBudgetExceeded(f"{count} configurations exceed budget {budget.max_config_enum}")
    for letters in itertools.product(range(len(values)), repeat=n):
        yield tuple(values[l] for l in letters), math.prod(weights[l] for l in letters)


def _tuple_law(family, j: int, budget: OracleBudget) -> dict:
    count = family.prefix_count(j)
    if count > budget.max_tuple_enum:
        raise OracleBudgetExceeded(f"{count} prefix tuples exceed budget {budget.max_tuple_enum}")
    return family.prefix_law(j, budget.max_tuple_enum)


def oracle_time(law_r: dict, probs: Sequence[float]) -> tuple[float, float]:
    """Scheme-averaged truncated time and success probability for one configuration,
    from the law of full-length scheme prefixes."""
    terms_T, terms_S = [], []
    for tup, beta in law_r.items():
        running = 1.0
        acc = 0.0
        for i in tup:
            acc += running
            running *= 1.0 - probs[i - 1]
        terms_T.append(beta * (acc - len(tup) * running))
        terms_S.append(beta * (1.0 - running))
    return math.fsum(terms_T), math.fsum(terms_S)


@dataclass(frozen=True)
class ConfMoments:
    mean_T: float
    var_T: float
    mean_S: float
    configurations: int


def oracle_conf_moments(family, values: Sequence[float], weights: Sequence[float] | None = None,
                        budget: OracleBudget = DEFAULT_BUDGET) -> ConfMoments:
    """Exact configuration mean and variance of ``T(p)`` and mean of ``S(p)``."""
    weights = [1.0 / len(values)] * len(values) if weights is None else list(weights)
    law = _tuple_law(family, family.r, budget)
    rows = [(w, *oracle_time(law, probs)) for probs, w in
            enumerate_configurations(values, weights, family.n, budget)]
    mean_T = math.fsum(w * t for w, t, _ in rows)
    mean_S = math.fsum(w * s for w, _, s in rows)
    var_T = math.fsum(w * (t - mean_T) ** 2 for w, t, _ in rows)
    return ConfMoments(mean_T, var_T, mean_S, len(rows))


def oracle_q_moments(i1: Sequence[int], i2: Sequence[int], n: int, values: Sequence[float],
                     weights: Sequence[float] | None = None, budget: OracleBudget = DEFAULT_BUDGET):
    """``(E Q(i1), E Q(i2), E Q(i1)Q(i2))`` by enumerating configurations."""
    weights = [1.0 / len(values)] * len(values) if weights is None else list(weights)
    e1, e2, e12 = [], [], []
    for probs, w in enumerate_configurations(values, weights, n, budget):
        q1 = math.prod(1.0 - probs[i - 1] for i in i1)
        q2 = math.prod(1.0 - probs[i - 1] for i in i2)
        e1.append(w * q1)
        e2.append(w * q2)
        e12.append(w * q1 * q2)
    return math.fsum(e1), math.fsum(e2), math.fsum(e12)


def oracle_delta(i1, i2, n, values, weights=None, budget: OracleBudget = DEFAULT_BUDGET) -> float:
    a, b, ab = oracle_q_moments(i1, i2, n, values, weights, budget)
    return ab - a * b


def oracle_prefix_stats(family, k: int, budget: OracleBudget = DEFAULT_BUDGET) -> tuple[float, float]:
    """``(a_k, b_k)`` by enumerating the prefix law and all pairs of prefixes."""
    law = _tuple_law(family, k, budget)
    items = list(law.items())
    if len(items) ** 2 > budget.max_tuple_enum:
        raise OracleBudgetExceeded(f"{len(items)}^2 prefix pairs exceed budget {budget.max_tuple_enum}")
    a = math.fsum(beta for tup, beta in items if len(set(tup)) == len(tup))
    sets = [(frozenset(tup), beta) for tup, beta in items]
    b = math.fsum(b1 * b2 for s1, b1 in sets for s2, b2 in sets if not (s1 & s2))
    return a, b


def oracle_mean_alpha(family, j: int, values, weights=None, budget: OracleBudget = DEFAULT_BUDGET) -> float:
    """``E_conf E_sch alpha_j`` by enumerating configurations and prefixes."""
    weights = [1.0 / len(values)] * len(values) if weights is None else list(weights)
    law = _tuple_law(family, j, budget)
    terms = []
    for probs, w in enumerate_configurations(values, weights, family.n, budget):
        for tup, beta in law.items():
            terms.append(w * beta * math.prod(1.0 - probs[i - 1] for i in tup))
    return math.fsum(terms)
