"""Scheme- and configuration-averaged statistics and the constants that bound them.

For a configuration ``p`` and a family, ``T_j(p) = E_sch alpha_j`` and

    T(p) = sum_{j<r} T_j(p) - r T_r(p),      S(p) = 1 - T_r(p).

Configuration averages come from sampling configurations and evaluating
``T_j(p)`` exactly per replicate, or, where the multiplicity profile of a
family's prefixes is known, directly from alphabet moments.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .alphabet import ConfigAlphabet, Configuration, p_average, sample_batch
from .schemes import NoClosedForm, SchemeFamily, pairwise_disjointness

DEFAULT_SLACK = 1e-3


@dataclass(frozen=True)
class QuenchedStats:
    t_of_p: float
    s_of_p: float
    method: str
    samples: int = 0
    se_t: float = 0.0
    se_s: float = 0.0


@dataclass(frozen=True)
class TjTerm:
    j: int
    value: float
    stderr: float = 0.0


@dataclass(frozen=True)
class LemmaConstants:
    c: dict[int, float]
    d: dict[int, float]
    e_table: dict[tuple[int, int], float]
    degenerate: bool = False


@dataclass
class EnsembleReport:
    n: int
    r: int
    replicates: int
    mean_T: float
    se_mean: float
    var_T: float
    se_var: float
    mean_S: float
    se_S: float
    exact_mean_T: float | None = None
    exact_mean_S: float | None = None
    alphas: np.ndarray | None = field(default=None, repr=False)

    def row(self) -> dict:
        return {
            "n": self.n, "r": self.r, "mean_T": self.mean_T, "se_mean": self.se_mean,
            "var_T": self.var_T, "se_var": self.se_var, "mean_S": self.mean_S,
            "exact_mean_T": self.exact_mean_T,
        }


def time_and_success(alphas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``T`` and ``S`` from a ``(..., r+1)`` array of ``T_j`` values."""
    r = alphas.shape[-1] - 1
    T = alphas[..., :r].sum(axis=-1) - r * alphas[..., r]
    return T, 1.0 - alphas[..., r]


def mean_and_se(x: np.ndarray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return float(x.mean()), float("nan")
    return float(x.mean()), float((x - x[0]).std(ddof=1) / math.sqrt(x.size))


def var_and_se(x: np.ndarray) -> tuple[float, float]:
    """Unbiased sample variance with its large-sample standard error."""
    x = np.asarray(x, dtype=float)
    R = x.size
    x = x - x[0]  # shifting keeps identical samples at exactly zero spread
    s2 = float(x.var(ddof=1))
    dev = x - x.mean()
    m4 = float(np.mean(dev ** 4))
    v = (m4 - (R - 3) / (R - 1) * s2 * s2) / R
    return s2, math.sqrt(max(v, 0.0))


# -- single configuration ----------------------------------------------------


def _enumerated_alphas(family: SchemeFamily, config: Configuration, jmax: int, budget: int) -> np.ndarray:
    q = config.q
    out = np.zeros(jmax + 1)
    for j in range(jmax + 1):
        law = family.prefix_law(j, budget)
        out[j] = math.fsum(beta * math.prod(q[i - 1] for i in tup) for tup, beta in law.items())
    return out


def quenched_alphas(family: SchemeFamily, config: Configuration, method: str = "exact",
                    samples: int = 100_000, rng: np.random.Generator | None = None,
                    budget: int = 10_000_000):
    """``(T_0..T_r, stderr)`` for one configuration."""
    if config.n != family.n:
        raise ValueError(f"configuration has {config.n} detectors, family expects {family.n}")
    if method == "exact":
        try:
            return family.exact_alphas(config.batch())[0], np.zeros(family.r + 1)
        except NoClosedForm:
            return _enumerated_alphas(family, config, family.r, budget), np.zeros(family.r + 1)
    if method != "mc":
        raise ValueError("method must be 'exact' or 'mc'")
    rng = np.random.default_rng() if rng is None else rng
    schemes = family.sample_batch(rng, samples)
    prods = np.cumprod(config.q[schemes], axis=1)
    alphas = np.concatenate([np.ones((samples, 1)), prods], axis=1)
    se = alphas.std(axis=0, ddof=1) / math.sqrt(samples)
    return alphas.mean(axis=0), se, alphas


def quenched_stats(family: SchemeFamily, config: Configuration, method: str = "exact",
                   samples: int = 100_000, rng: np.random.Generator | None = None) -> QuenchedStats:
    if method == "exact":
        A, _ = quenched_alphas(family, config, "exact")
        T, S = time_and_success(A)
        return QuenchedStats(float(T), float(S), "exact")
    _, _, per_scheme = quenched_alphas(family, config, "mc", samples, rng)
    T, S = time_and_success(per_scheme)
    t, se_t = mean_and_se(T)
    s, se_s = mean_and_se(S)
    return QuenchedStats(t, s, "monte_carlo", samples, se_t, se_s)


def tj_terms(family: SchemeFamily, config: Configuration, k: int, method: str = "exact",
             samples: int = 100_000, rng: np.random.Generator | None = None) -> list[TjTerm]:
    if not (1 <= k <= family.r):
        raise ValueError(f"k={k} outside 1..{family.r}")
    res = quenched_alphas(family, config, method, samples, rng)
    A, se = res[0], res[1]
    return [TjTerm(j, float(A[j]), float(se[j])) for j in range(1, k + 1)]


# -- Q-term covariances --------------------------------------------------------


def delta_cross_moment(i1: Sequence[int], i2: Sequence[int], alphabet: ConfigAlphabet) -> float:
    """``E Q(i1)Q(i2) - E Q(i1) E Q(i2)`` from alphabet moments.

    Factorizes over detectors: only detectors present in both tuples
    contribute a covariance, so disjoint tuples give exactly 0.
    """
    a, b = Counter(i1), Counter(i2)
    m = alphabet.moment
    only1 = math.prod(m(c) for v, c in a.items() if v not in b)
    only2 = math.prod(m(c) for v, c in b.items() if v not in a)
    shared = [v for v in a if v in b]
    if not shared:
        return 0.0
    joint = math.prod(m(a[v] + b[v]) for v in shared)
    apart = math.prod(m(a[v]) * m(b[v]) for v in shared)
    return only1 * only2 * (joint - apart)


def joint_profiles(j1: int, j2: int):
    """Multisets of per-detector multiplicity pairs ``(a, b)`` with
    ``sum a = j1`` and ``sum b = j2`` (each pair nonzero)."""
    pairs = [(a, b) for a in range(j1 + 1) for b in range(j2 + 1) if (a, b) != (0, 0)]

    def rec(start, ra, rb, acc):
        if ra == 0 and rb == 0:
            yield tuple(acc)
            return
        for idx in range(start, len(pairs)):
            a, b = pairs[idx]
            if a <= ra and b <= rb:
                acc.append((a, b))
                yield from rec(idx, ra - a, rb - b, acc)
                acc.pop()

    yield from rec(0, j1, j2, [])


def profile_delta(profile, alphabet: ConfigAlphabet) -> float:
    m = alphabet.moment
    only1 = math.prod(m(a) for a, b in profile if b == 0)
    only2 = math.prod(m(b) for a, b in profile if a == 0)
    shared = [(a, b) for a, b in profile if a and b]
    if not shared:
        return 0.0
    joint = math.prod(m(a + b) for a, b in shared)
    apart = math.prod(m(a) * m(b) for a, b in shared)
    return only1 * only2 * (joint - apart)


def e_constant(j1: int, j2: int, alphabet: ConfigAlphabet) -> float:
    """Smallest covariance over all overlapping tuple pairs of these lengths."""
    vals = [profile_delta(p, alphabet) for p in joint_profiles(j1, j2) if any(a and b for a, b in p)]
    return min(vals)


def lemma_constants(alphabet: ConfigAlphabet, j_max: int = 4, pair_max: int = 4) -> LemmaConstants:
    m1 = 1.0 - p_average(alphabet)
    q_hi = 1.0 - alphabet.p_min
    degenerate = alphabet.is_degenerate
    c: dict[int, float] = {}
    for j in range(2, j_max + 1):
        if degenerate:
            c[j] = float("nan")
        else:
            c[j] = min((alphabet.moment(i) - m1 ** i) / m1 ** i for i in range(2, j + 1))
    d = {j: q_hi ** j - m1 ** j for j in range(1, j_max + 1)}
    e = {(j1, j2): e_constant(j1, j2, alphabet)
         for j1 in range(1, pair_max + 1) for j2 in range(1, pair_max + 1)}
    return LemmaConstants(c, d, e, degenerate)


def repeat_gap_bounds(alphabet: ConfigAlphabet, j: int) -> tuple[float, float]:
    """Range of ``E_conf Q(i) - (1-p_av)^j`` over length-``j`` tuples with a repeat.

    The lower end is ``c_j (1-p_av)^j``: the moment ratio of a repeated
    detector exceeds ``1 + c_j``, and that ratio multiplies ``(1-p_av)^j``.
    Distinct tuples sit at exactly zero.
    """
    if j < 2:
        raise ValueError("a repeat needs j >= 2")
    m1 = 1.0 - p_average(alphabet)
    lc = lemma_constants(alphabet, j_max=j, pair_max=1)
    return lc.c[j] * m1 ** j, lc.d[j]


# -- configuration ensembles ---------------------------------------------------


def ensemble_alphas(family: SchemeFamily, alphabet: ConfigAlphabet, replicates: int, seed: int,
                    key: Sequence[int] = (), mc_samples: int = 10_000) -> np.ndarray:
    """``(replicates, r+1)`` array of exact ``T_j(p)`` over sampled configurations.

    Families without a closed form fall back to a Monte Carlo average over
    ``mc_samples`` schemes per chunk.
    """
    sizes = rngmod.chunk_sizes(replicates)

    def work(i: int, size: int) -> np.ndarray:
        batch = sample_batch(alphabet, family.n, size, rngmod.stream(seed, "configurations", *key, i))
        try:
            return family.exact_alphas(batch)
        except NoClosedForm:
            return family.mc_alphas(batch, rngmod.stream(seed, "schemes", *key, i), mc_samples)

    return np.concatenate(rngmod.map_chunks(work, sizes), axis=0)


def exact_mean_alphas(family: SchemeFamily, alphabet: ConfigAlphabet) -> np.ndarray | None:
    try:
        return family.mean_alphas(alphabet)
    except NoClosedForm:
        return None


def exact_mean_time(family: SchemeFamily, alphabet: ConfigAlphabet) -> float | None:
    A = exact_mean_alphas(family, alphabet)
    if A is None:
        return None
    return float(time_and_success(A)[0])


def report_from_alphas(family: SchemeFamily, alphabet: ConfigAlphabet, A: np.ndarray,
                       keep: bool = False) -> EnsembleReport:
    T, S = time_and_success(A)
    mean_T, se_mean = mean_and_se(T)
    var_T, se_var = var_and_se(T)
    mean_S, se_S = mean_and_se(S)
    exact = exact_mean_alphas(family, alphabet)
    exact_T = exact_S = None
    if exact is not None:
        et, es = time_and_success(exact)
        exact_T, exact_S = float(et), float(es)
    return EnsembleReport(family.n, family.r, A.shape[0], mean_T, se_mean, var_T, se_var,
                          mean_S, se_S, exact_T, exact_S, A if keep else None)


def ensemble_report(family: SchemeFamily, alphabet: ConfigAlphabet, replicates: int, seed: int,
                    key: Sequence[int] = (), keep_alphas: bool = False) -> EnsembleReport:
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    A = ensemble_alphas(family, alphabet, replicates, seed, key)
    return report_from_alphas(family, alphabet, A, keep_alphas)


@dataclass
class SandwichReport:
    k: int
    var_T: float
    se_var: float
    lower: float
    upper: float
    slack: float
    b: dict[int, float]
    term_vars: dict[int, tuple[float, float]]
    term_bounds: dict[int, tuple[float, float]]

    @property
    def holds(self) -> bool:
        return self.lower - self.slack <= self.var_T <= self.upper + self.slack

    @property
    def terms_hold(self) -> bool:
        return all(lo - 4 * se - DEFAULT_SLACK <= v <= hi + 4 * se + DEFAULT_SLACK
                   for (v, se), (lo, hi) in ((self.term_vars[j], self.term_bounds[j]) for j in self.term_vars))

    def to_dict(self) -> dict:
        return {
            "k": self.k, "var_T": self.var_T, "se_var": self.se_var, "lower": self.lower,
            "upper": self.upper, "slack": self.slack, "holds": self.holds, "terms_hold": self.terms_hold,
            "b": {str(j): v for j, v in self.b.items()},
            "term_vars": {str(j): v[0] for j, v in self.term_vars.items()},
        }


def variance_sandwich_check(family: SchemeFamily, alphabet: ConfigAlphabet, k: int, replicates: int,
                            seed: int, slack: float = DEFAULT_SLACK, alphas: np.ndarray | None = None,
                            key: Sequence[int] = ()) -> SandwichReport:
    """Compare the empirical ``var_conf T(p)`` with
    ``[sum_j e(j,j)(1-b_j), (k+1) sum_j (1-b_j)]`` for ``j <= k``."""
    if not (1 <= k <= family.r):
        raise ValueError(f"k={k} outside 1..{family.r}")
    A = ensemble_alphas(family, alphabet, replicates, seed, key) if alphas is None else alphas
    T, _ = time_and_success(A)
    var_T, se_var = var_and_se(T)
    b = {j: pairwise_disjointness(family, j).b_k for j in range(1, k + 1)}
    e = {j: e_constant(j, j, alphabet) for j in range(1, k + 1)}
    lower = sum(e[j] * (1 - b[j]) for j in b)
    upper = (k + 1) * sum(1 - b[j] for j in b)
    term_vars = {j: var_and_se(A[:, j]) for j in range(1, k + 1)}
    term_bounds = {j: (e[j] * (1 - b[j]), 1 - b[j]) for j in range(1, k + 1)}
    return SandwichReport(k, var_T, se_var, lower, upper, slack + 4 * se_var, b, term_vars, term_bounds)


@dataclass
class ConvergenceVerdict:
    verdict: str
    predicted: str
    grid: list[int]
    rounds: list[int]
    means: list[float]
    gaps: list[float]
    one_minus_a: dict[int, list[float]]

    @property
    def consistent(self) -> bool:
        return self.verdict == self.predicted


def vanishing(values: Sequence[float], tol: float) -> bool:
    """Judge ``x_n -> 0`` along a finite ascending grid."""
    vals = list(values)
    if vals[-1] <= 1e-12:
        return True
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    return nonincreasing and vals[-1] <= tol


def mean_convergence_check(spec, alphabet: ConfigAlphabet, n_grid: Sequence[int], schedule, tol: float = 0.02,
                           k_check: int = 3, replicates: int = 2000, seed: int = 0,
                           limit_tol: float = 0.05) -> ConvergenceVerdict:
    """Does ``E_conf T(p)`` approach ``1/p_av`` along the grid, and does that
    match what the ``a_k`` limits predict?"""
    target = 1.0 / p_average(alphabet)
    means, gaps, rounds = [], [], []
    one_minus_a: dict[int, list[float]] = {k: [] for k in range(1, k_check + 1)}
    for idx, n in enumerate(n_grid):
        r = schedule(n)
        fam = spec.build(n, r)
        mean = exact_mean_time(fam, alphabet)
        if mean is None:
            mean = ensemble_report(fam, alphabet, replicates, seed, key=(idx,)).mean_T
        means.append(mean)
        gaps.append(abs(mean - target))
        rounds.append(r)
        for k in one_minus_a:
            one_minus_a[k].append(1.0 - fam.a_exact(min(k, r)))
    monotone = all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
    verdict = "ACHIEVES" if gaps[-1] <= tol and monotone else "FAILS"
    predicted = "ACHIEVES" if all(vanishing(v, limit_tol) for v in one_minus_a.values()) else "FAILS"
    return ConvergenceVerdict(verdict, predicted, list(n_grid), rounds, means, gaps, one_minus_a)
