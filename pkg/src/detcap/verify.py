"""Self-checks of the invariants, runnable from the command line.

Each check compares a fast path with a brute-force oracle or a known
closed form. ``fast=True`` shrinks instance counts so the suite finishes in
a few seconds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels, oracles
from .alphabet import ConfigAlphabet, Configuration, p_average, sample_batch
from .detection import detection_pmf, expected_truncated_time
from .ensemble import delta_cross_moment, e_constant, time_and_success
from .schemes import CATALOG, InfeasibleScheme, Scheme, pairwise_disjointness, prefix_distinctness

TOL = 1e-12
TWO_LETTER = ConfigAlphabet((0.2, 0.8))


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail}"


def _catalog(n: int, r: int):
    for spec in CATALOG:
        try:
            yield spec, spec.build(n, r)
        except InfeasibleScheme:
            continue


def check_pmf_oracle(instances: int, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 7))
        r = int(rng.integers(1, 11))
        probs = rng.uniform(0.01, 0.99, n)
        values = tuple(sorted(set(probs.tolist())))
        config = Configuration.from_probs(ConfigAlphabet(values), probs)
        scheme = Scheme(tuple(rng.integers(1, n + 1, r)))
        law = detection_pmf(scheme, config)
        ref = oracles.oracle_pmf(scheme.assignment, probs)
        worst = max(worst, max(abs(a - b) for a, b in zip(law.pmf, ref.pmf)),
                    abs(law.mass_at_infinity - ref.mass_at_infinity),
                    abs(expected_truncated_time(scheme, config) - ref.mean_truncated))
    return CheckResult("detection law vs outcome enumeration", worst <= TOL,
                       f"{instances} instances, max error {worst:.2e}")


def check_exact_alphas(n: int = 5, r: int = 3, seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for spec, fam in _catalog(n, r):
        batch = sample_batch(TWO_LETTER, n, 4, rng)
        A = fam.exact_alphas(batch)
        law = fam.prefix_law(r)
        for i in range(batch.replicates):
            probs = batch.row(i).probs
            T_ref, S_ref = oracles.oracle_time(law, probs)
            T, S = time_and_success(A[i])
            worst = max(worst, abs(T - T_ref), abs(S - S_ref))
    return CheckResult("scheme-averaged T(p), S(p) vs prefix enumeration", worst <= TOL,
                       f"n={n}, r={r}, max error {worst:.2e}")


def check_mean_alphas(n: int = 4, r: int = 3) -> CheckResult:
    worst = 0.0
    for spec, fam in _catalog(n, r):
        A = fam.mean_alphas(TWO_LETTER)
        for j in range(r + 1):
            worst = max(worst, abs(A[j] - oracles.oracle_mean_alpha(fam, j, TWO_LETTER.values)))
    return CheckResult("configuration means of alpha_j vs full enumeration", worst <= TOL,
                       f"n={n}, r={r}, max error {worst:.2e}")


def check_prefix_stats(n: int = 5, k_max: int = 2) -> CheckResult:
    worst = 0.0
    for spec, fam in _catalog(n, 2 * k_max):
        for k in range(1, k_max + 1):
            a, b = oracles.oracle_prefix_stats(fam, k)
            worst = max(worst, abs(prefix_distinctness(fam, k).a_k - a),
                        abs(pairwise_disjointness(fam, k).b_k - b))
    return CheckResult("a_k, b_k vs prefix enumeration", worst <= TOL, f"n={n}, k<={k_max}, max error {worst:.2e}")


def check_delta(n: int = 4, j_max: int = 2) -> CheckResult:
    bad = []
    count = 0
    vals = TWO_LETTER.values
    tuples = [t for j in range(1, j_max + 1) for t in itertools.product(range(1, n + 1), repeat=j)]
    for t1 in tuples:
        for t2 in tuples:
            count += 1
            d = delta_cross_moment(t1, t2, TWO_LETTER)
            ref = oracles.oracle_delta(t1, t2, n, vals)
            disjoint = not set(t1) & set(t2)
            ok = abs(d - ref) <= TOL and ((d == 0.0) if disjoint else d >= e_constant(len(t1), len(t2), TWO_LETTER) - TOL)
            if not ok:
                bad.append((t1, t2))
    return CheckResult("covariance of Q-terms vs enumeration and e-table", not bad,
                       f"{count} tuple pairs, {len(bad)} failures")


def check_mean_sandwich(n: int = 30, r: int = 10) -> CheckResult:
    m1 = 1.0 - p_average(TWO_LETTER)
    hi = 1.0 - TWO_LETTER.p_min
    bad = []
    for spec, fam in _catalog(n, r):
        A = fam.mean_alphas(TWO_LETTER)
        for j in range(r + 1):
            if not (m1 ** j - TOL <= A[j] <= hi ** j + TOL):
                bad.append((spec.name, j))
    return CheckResult("E alpha_j within [(1-p_av)^j, (1-p_min)^j]", not bad, f"n={n}, r={r}, failures {bad}")


def check_backends(seed: int = 3) -> CheckResult:
    names = kernels.available_backends()
    if len(names) < 2:
        return CheckResult("compiled and fallback kernels agree", True, f"only {names} available")
    rng = np.random.default_rng(seed)
    counts = rng.integers(0, 40, (20, 3))
    vals = rng.uniform(0.05, 0.95, (20, 3))
    outs = [kernels.grouped_esm(vals, counts, 25, backend=b) for b in names]
    err = max(float(np.max(np.abs(outs[0][i] - outs[1][i]))) for i in range(2))
    schemes = rng.integers(0, 10, (50, 8))
    w = np.full(50, 1 / 50)
    q = rng.uniform(0.1, 0.9, (7, 10))
    a0, a1 = (kernels.weighted_alpha_means(schemes, w, q, backend=b) for b in names)
    err = max(err, float(np.max(np.abs(a0 - a1))))
    return CheckResult("compiled and fallback kernels agree", err <= 1e-12, f"max difference {err:.2e}")


def check_capacity_value() -> CheckResult:
    fam = CATALOG[0].build(10_000, 100)
    T = float(time_and_success(fam.mean_alphas(TWO_LETTER))[0])
    target = 1.0 / p_average(TWO_LETTER)
    return CheckResult("uniform-injective exact mean equals 1/p_av", abs(T - target) <= 1e-12,
                       f"mean {T!r}, capacity {target!r}")


def run_checks(fast: bool = True, log: Callable[[str], None] | None = None) -> list[CheckResult]:
    checks = [
        lambda: check_pmf_oracle(200 if fast else 1000),
        check_exact_alphas,
        check_mean_alphas,
        check_prefix_stats,
        lambda: check_delta(4 if fast else 5, 2 if fast else 3),
        check_mean_sandwich,
        check_backends,
        check_capacity_value,
    ]
    results = []
    for fn in checks:
        try:
            res = fn()
        except Exception as exc:  # report, do not abort the suite
            res = CheckResult(getattr(fn, "__name__", "check"), False, f"raised {exc!r}")
        results.append(res)
        if log is not None:
            log(res.line())
    return results
