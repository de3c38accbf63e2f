"""Detection schemes and distributions over them.

A scheme maps slots ``1..r`` to detectors ``1..n``. Public objects use
1-based detector labels; batch arrays returned by ``sample_batch`` and
``support`` are 0-based so they can index NumPy arrays directly.

Every family knows how to sample itself, its closed-form ``a_k``/``b_k``
where those exist, its prefix law for small ``j``, and the scheme-averaged
survival products ``E_sch alpha_j`` for a batch of configurations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .alphabet import ConfigAlphabet, ConfigBatch

DEFAULT_TUPLE_BUDGET = 10_000_000
DEFAULT_MC_SAMPLES = 100_000


class InfeasibleScheme(ValueError):
    """The requested family cannot exist for these (n, r)."""


class PrefixBudgetExceeded(RuntimeError):
    """Exact enumeration would exceed the tuple budget; use Monte Carlo instead."""


class NoClosedForm(NotImplementedError):
    """The family has no exact formula for this quantity."""


@dataclass(frozen=True)
class Scheme:
    assignment: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) for x in self.assignment)
        if not a:
            raise ValueError("a scheme needs r >= 1 slots")
        if min(a) < 1:
            raise ValueError("detector labels start at 1")
        object.__setattr__(self, "assignment", a)

    @property
    def r(self) -> int:
        return len(self.assignment)

    @property
    def index0(self) -> np.ndarray:
        return np.array(self.assignment, dtype=np.int64) - 1

    def check(self, n: int) -> None:
        if max(self.assignment) > n:
            raise IndexError(f"scheme uses detector {max(self.assignment)} but n = {n}")


@dataclass(frozen=True)
class PrefixDistinctness:
    k: int
    a_k: float
    method: str
    samples: int = 0
    stderr: float = 0.0


@dataclass(frozen=True)
class PairwiseDisjointness:
    k: int
    b_k: float
    method: str
    samples: int = 0
    stderr: float = 0.0


def _profile_alphas(schemes: np.ndarray, weights: np.ndarray, moments: np.ndarray) -> np.ndarray:
    """``sum_s w_s prod_v m_{mult_v}`` over prefixes of each scheme."""
    S, r = schemes.shape
    out = np.zeros(r + 1)
    for s in range(S):
        w = weights[s]
        if w == 0:
            continue
        seen: dict[int, int] = {}
        prod = 1.0
        out[0] += w
        for t in range(r):
            v = int(schemes[s, t])
            c = seen.get(v, 0)
            prod *= moments[c + 1] / moments[c]
            seen[v] = c + 1
            out[t + 1] += w * prod
    return out


def _distinct_rows(rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] <= 1:
        return np.ones(rows.shape[0], dtype=bool)
    s = np.sort(rows, axis=1)
    return np.all(np.diff(s, axis=1) != 0, axis=1)


def _disjoint_rows(a: np.ndarray, b: np.ndarray, chunk: int = 20_000) -> np.ndarray:
    out = np.empty(a.shape[0], dtype=bool)
    for lo in range(0, a.shape[0], chunk):
        x = a[lo:lo + chunk]
        y = b[lo:lo + chunk]
        out[lo:lo + chunk] = ~np.any(x[:, :, None] == y[:, None, :], axis=(1, 2))
    return out


def _falling(n: int, j: int) -> int:
    return math.perm(n, j) if j <= n else 0


def _per_pick(m: np.ndarray, n: int, idx: np.ndarray) -> np.ndarray:
    """``m / n^idx`` without overflowing ``n^idx``."""
    return m * np.exp(-np.asarray(idx, dtype=float) * math.log(n))


def _egf_power(g: np.ndarray, N: int, kmax: int) -> np.ndarray:
    """``U_k = k! [y^k] (sum_i g_i y^i / i!)^N`` with ``g_0 = 1``, k = 0..kmax.

    J.C.P. Miller's recurrence for powers of a power series, rewritten for
    exponential coefficients. All terms are nonnegative while ``k <= N``.
    """
    U = np.zeros(kmax + 1)
    U[0] = 1.0
    for k in range(1, kmax + 1):
        acc = 0.0
        for i in range(1, min(k, len(g) - 1) + 1):
            if g[i] == 0.0:
                continue
            acc += ((N + 1) * i - k) / k * math.comb(k, i) * g[i] * U[k - i]
        U[k] = acc
    return U


class SchemeFamily:
    """Base class; subclasses set ``n``, ``r`` and ``kind``."""

    kind = "abstract"
    n: int
    r: int

    def _check_k(self, k: int) -> None:
        if not (1 <= k <= self.r):
            raise ValueError(f"prefix length k={k} outside 1..{self.r}")

    # -- sampling ---------------------------------------------------------
    def sample_batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator) -> Scheme:
        return Scheme(tuple(self.sample_batch(rng, 1)[0] + 1))

    # -- finite support ---------------------------------------------------
    def support(self) -> tuple[np.ndarray, np.ndarray] | None:
        return None

    # -- closed forms -----------------------------------------------------
    def a_exact(self, k: int) -> float:
        self._check_k(k)
        sup = self.support()
        if sup is None:
            raise NoClosedForm(self.kind)
        schemes, weights = sup
        return float(np.dot(weights, _distinct_rows(schemes[:, :k])))

    def b_exact(self, k: int) -> float:
        self._check_k(k)
        sup = self.support()
        if sup is None:
            raise NoClosedForm(self.kind)
        schemes, weights = sup
        sets = [set(row[:k].tolist()) for row in schemes]
        total = 0.0
        for i, si in enumerate(sets):
            for j, sj in enumerate(sets):
                if si.isdisjoint(sj):
                    total += weights[i] * weights[j]
        return float(total)

    # -- prefix law -------------------------------------------------------
    def prefix_count(self, j: int) -> int:
        sup = self.support()
        if sup is None:
            raise NoClosedForm(self.kind)
        return sup[0].shape[0]

    def prefix_law(self, j: int, budget: int = DEFAULT_TUPLE_BUDGET) -> dict[tuple[int, ...], float]:
        """``P_sch(Pi(1..j) = i)`` for every tuple in the support (1-based)."""
        if not (0 <= j <= self.r):
            raise ValueError(f"prefix length {j} outside 0..{self.r}")
        count = self.prefix_count(j)
        if count > budget:
            raise PrefixBudgetExceeded(
                f"{self.kind}: {count} prefix tuples exceed budget {budget}; use Monte Carlo"
            )
        return self._enumerate_prefix(j)

    def _enumerate_prefix(self, j: int) -> dict[tuple[int, ...], float]:
        schemes, weights = self.support()
        law: dict[tuple[int, ...], float] = {}
        for row, w in zip(schemes, weights):
            if w == 0:
                continue
            key = tuple(int(x) + 1 for x in row[:j])
            law[key] = law.get(key, 0.0) + float(w)
        return law

    # -- scheme-averaged survival products --------------------------------
    def exact_alphas(self, batch: ConfigBatch) -> np.ndarray:
        """``E_sch alpha_j`` for j = 0..r, one row per configuration."""
        sup = self.support()
        if sup is None:
            raise NoClosedForm(self.kind)
        schemes, weights = sup
        return kernels.weighted_alpha_means(schemes, weights, batch.q())

    def mean_alphas(self, alphabet: ConfigAlphabet) -> np.ndarray:
        """``E_conf E_sch alpha_j`` for j = 0..r."""
        sup = self.support()
        if sup is None:
            raise NoClosedForm(self.kind)
        schemes, weights = sup
        return _profile_alphas(schemes, weights, alphabet.moments(self.r + 1))

    def mc_alphas(self, batch: ConfigBatch, rng: np.random.Generator, samples: int) -> np.ndarray:
        schemes = self.sample_batch(rng, samples)
        weights = np.full(samples, 1.0 / samples)
        return kernels.weighted_alpha_means(schemes, weights, batch.q())

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "r": self.r}

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.describe().items() if k != "kind")
        return f"{type(self).__name__}({params})"


class Fixed(SchemeFamily):
    kind = "fixed"

    def __init__(self, scheme: Scheme | Sequence[int], n: int):
        if not isinstance(scheme, Scheme):
            scheme = Scheme(tuple(scheme))
        scheme.check(n)
        self.scheme = scheme
        self.n = n
        self.r = scheme.r

    def support(self):
        return self.scheme.index0[None, :], np.ones(1)

    def sample_batch(self, rng, size):
        return np.tile(self.scheme.index0, (size, 1))

    def b_exact(self, k):
        self._check_k(k)
        return 0.0

    def describe(self):
        return {"kind": self.kind, "n": self.n, "r": self.r, "assignment": list(self.scheme.assignment)}


class CustomWeighted(SchemeFamily):
    kind = "custom"

    def __init__(self, n: int, schemes: Sequence[Sequence[int]], weights: Sequence[float]):
        rows = [Scheme(tuple(s)) for s in schemes]
        if not rows:
            raise ValueError("custom family needs at least one scheme")
        r = rows[0].r
        if any(s.r != r for s in rows):
            raise ValueError("all schemes in a custom family need the same length")
        for s in rows:
            s.check(n)
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(rows),) or np.any(w < 0):
            raise ValueError("need one nonnegative weight per scheme")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"custom weights sum to {math.fsum(w)!r}, not 1")
        self.n = n
        self.r = r
        self.schemes = np.array([s.index0 for s in rows])
        self.weights = w

    def support(self):
        return self.schemes, self.weights

    def sample_batch(self, rng, size):
        pick = rng.choice(len(self.weights), size=size, p=self.weights)
        return self.schemes[pick]

    def describe(self):
        return {"kind": self.kind, "n": self.n, "r": self.r,
                "schemes": (self.schemes + 1).tolist(), "weights": self.weights.tolist()}


class RoundRobin(SchemeFamily):
    """Slots visit detectors cyclically from a random starting offset."""

    kind = "round-robin"

    def __init__(self, n: int, r: int, offset_weights: Sequence[float] | None = None):
        if n < 1 or r < 1:
            raise ValueError("need n >= 1 and r >= 1")
        self.n = n
        self.r = r
        if offset_weights is None:
            self.offset_weights = None
        else:
            w = np.asarray(offset_weights, dtype=float)
            if w.shape != (n,) or np.any(w < 0) or abs(math.fsum(w) - 1.0) > 1e-12:
                raise ValueError("offset weights must be a pmf over n offsets")
            self.offset_weights = w

    @property
    def _weights(self) -> np.ndarray:
        if self.offset_weights is None:
            return np.full(self.n, 1.0 / self.n)
        return self.offset_weights

    def support(self):
        offs = np.arange(self.n)
        return (offs[:, None] + np.arange(self.r)[None, :]) % self.n, self._weights

    def sample_batch(self, rng, size):
        if self.offset_weights is None:
            offs = rng.integers(0, self.n, size)
        else:
            offs = rng.choice(self.n, size=size, p=self.offset_weights)
        return (offs[:, None] + np.arange(self.r)[None, :]) % self.n

    def a_exact(self, k):
        self._check_k(k)
        return 1.0 if k <= self.n else 0.0

    def b_exact(self, k):
        self._check_k(k)
        n = self.n
        if 2 * k > n:
            return 0.0
        if self.offset_weights is None:
            return (n - 2 * k + 1) / n
        w = self.offset_weights
        lag = np.array([np.dot(w, np.roll(w, -d)) for d in range(n)])
        return float(lag[k:n - k + 1].sum())

    def mean_alphas(self, alphabet):
        # every offset has the same multiplicity profile
        row = (np.arange(self.r) % self.n)[None, :]
        return _profile_alphas(row, np.ones(1), alphabet.moments(self.r // self.n + 2))

    def describe(self):
        d = {"kind": self.kind, "n": self.n, "r": self.r}
        if self.offset_weights is not None:
            d["offset_weights"] = self.offset_weights.tolist()
        return d


class UniformInjective(SchemeFamily):
    """Uniform sampling of ``r`` distinct detectors in random order."""

    kind = "uniform-injective"

    def __init__(self, n: int, r: int):
        if r < 1:
            raise ValueError("need r >= 1")
        if r > n:
            raise InfeasibleScheme(f"uniform-injective needs r <= n (r={r}, n={n})")
        self.n = n
        self.r = r

    def sample_batch(self, rng, size):
        n, r = self.n, self.r
        if size * n <= 20_000_000 or 4 * r > n:
            keys = rng.random((size, n))
            if r < n:
                part = np.argpartition(keys, r - 1, axis=1)[:, :r]
                order = np.argsort(np.take_along_axis(keys, part, axis=1), axis=1)
                return np.take_along_axis(part, order, axis=1).astype(np.int64)
            return np.argsort(keys, axis=1).astype(np.int64)
        out = np.empty((size, r), dtype=np.int64)
        for t in range(r):
            todo = np.arange(size)
            while todo.size:
                cand = rng.integers(0, n, todo.size)
                clash = np.any(out[todo, :t] == cand[:, None], axis=1) if t else np.zeros(todo.size, bool)
                out[todo[~clash], t] = cand[~clash]
                todo = todo[clash]
        return out

    def a_exact(self, k):
        self._check_k(k)
        return 1.0

    def b_exact(self, k):
        self._check_k(k)
        n = self.n
        if 2 * k > n:
            return 0.0
        return math.prod((n - k - i) / (n - i) for i in range(k))

    def prefix_count(self, j):
        return _falling(self.n, j)

    def _enumerate_prefix(self, j):
        p = 1.0 / _falling(self.n, j)
        return {tuple(x + 1 for x in t): p for t in itertools.permutations(range(self.n), j)}

    def exact_alphas(self, batch):
        counts = batch.counts()
        g = np.broadcast_to(batch.alphabet.q, counts.shape)
        E, _ = kernels.grouped_esm(g, counts, self.r)
        return E

    def mean_alphas(self, alphabet):
        m1 = alphabet.moment(1)
        return m1 ** np.arange(self.r + 1)


class IidUniform(SchemeFamily):
    """Each slot picks a detector uniformly and independently."""

    kind = "iid-uniform"

    def __init__(self, n: int, r: int):
        if n < 1 or r < 1:
            raise ValueError("need n >= 1 and r >= 1")
        self.n = n
        self.r = r

    def sample_batch(self, rng, size):
        return rng.integers(0, self.n, (size, self.r))

    def a_exact(self, k):
        self._check_k(k)
        return math.prod((self.n - i) / self.n for i in range(k))

    def distinct_count_pmf(self, k: int) -> np.ndarray:
        """Law of the number of distinct detectors among ``k`` iid picks."""
        n = self.n
        P = np.zeros(k + 1)
        P[0] = 1.0
        for _ in range(k):
            nxt = np.zeros(k + 1)
            d = np.arange(k + 1)
            nxt += P * d / n
            nxt[1:] += P[:-1] * (n - d[:-1]) / n
            P = nxt
        return P

    def b_exact(self, k):
        self._check_k(k)
        P = self.distinct_count_pmf(k)
        d = np.arange(k + 1)
        return float(np.dot(P, np.clip((self.n - d) / self.n, 0.0, None) ** k))

    def prefix_count(self, j):
        return self.n ** j

    def _enumerate_prefix(self, j):
        p = float(self.n) ** -j
        return {tuple(x + 1 for x in t): p for t in itertools.product(range(self.n), repeat=j)}

    def exact_alphas(self, batch):
        counts = batch.counts()
        qbar = counts @ batch.alphabet.q / batch.n
        return qbar[:, None] ** np.arange(self.r + 1)[None, :]

    def mean_alphas(self, alphabet):
        m = alphabet.moments(self.r)
        g = _per_pick(m, self.n, np.arange(self.r + 1))
        return _egf_power(g, self.n, self.r)


class BlockRepeat(SchemeFamily):
    """Each pick of a base family is held for ``m`` consecutive slots."""

    kind = "block-repeat"

    def __init__(self, n: int, r: int, m: int, base: SchemeFamily, allow_pad: bool = False):
        if m < 1:
            raise ValueError("block length m must be >= 1")
        if r % m and not allow_pad:
            raise ValueError(f"block length {m} does not divide r={r}; pass allow_pad to truncate")
        nb = -(-r // m)
        if base.n != n or base.r != nb:
            raise ValueError(f"base family must be ({n}, {nb}), got ({base.n}, {base.r})")
        self.n = n
        self.r = r
        self.m = m
        self.base = base
        self.allow_pad = allow_pad

    def _expand(self, rows: np.ndarray, width: int | None = None) -> np.ndarray:
        width = self.r if width is None else width
        return np.repeat(rows, self.m, axis=1)[:, :width]

    def sample_batch(self, rng, size):
        return self._expand(self.base.sample_batch(rng, size))

    def support(self):
        sup = self.base.support()
        if sup is None:
            return None
        return self._expand(sup[0]), sup[1]

    def a_exact(self, k):
        self._check_k(k)
        if self.m == 1:
            return self.base.a_exact(k)
        return 1.0 if k == 1 else 0.0

    def b_exact(self, k):
        self._check_k(k)
        return self.base.b_exact(-(-k // self.m))

    def prefix_count(self, j):
        return self.base.prefix_count(-(-j // self.m))

    def _enumerate_prefix(self, j):
        law: dict[tuple[int, ...], float] = {}
        for t, p in self.base._enumerate_prefix(-(-j // self.m)).items():
            key = tuple(x for x in t for _ in range(self.m))[:j]
            law[key] = law.get(key, 0.0) + p
        return law

    def exact_alphas(self, batch):
        if self.base.support() is not None:
            return super().exact_alphas(batch)
        m, r = self.m, self.r
        q = batch.alphabet.q
        counts = batch.counts()
        R = batch.replicates
        A = np.empty((R, r + 1))
        bmax = r // m
        if isinstance(self.base, UniformInjective):
            g = np.broadcast_to(q ** m, counts.shape)
            E, _ = kernels.grouped_esm(g, counts, bmax)
            A[:, 0::m] = E[:, : len(range(0, r + 1, m))]
            for s in range(1, m):
                cols = range(s, r + 1, m)
                if not len(cols):
                    continue
                _, D = kernels.grouped_esm(g, counts, len(cols), hvals=np.broadcast_to(q ** s, counts.shape))
                A[:, s::m] = D[:, 1:len(cols) + 1]
            return A
        if isinstance(self.base, IidUniform):
            n = batch.n
            for j in range(r + 1):
                b, s = divmod(j, m)
                A[:, j] = (counts @ q ** m / n) ** b * (counts @ q ** s / n)
            return A
        raise NoClosedForm(f"block-repeat over {self.base.kind}")

    def mean_alphas(self, alphabet):
        if self.base.support() is not None:
            return super().mean_alphas(alphabet)
        m, r, n = self.m, self.r, self.n
        mom = alphabet.moments(m * (r // m + 1) + m)
        A = np.empty(r + 1)
        if isinstance(self.base, UniformInjective):
            for j in range(r + 1):
                b, s = divmod(j, m)
                A[j] = mom[m] ** b * mom[s]
            return A
        if isinstance(self.base, IidUniform):
            bmax = r // m + 1
            idx = np.arange(bmax + 1)
            g = _per_pick(mom[m * idx], n, idx)
            U_full = _egf_power(g, n, bmax)
            U_rest = _egf_power(g, n - 1, bmax)
            for j in range(r + 1):
                b, s = divmod(j, m)
                if s == 0:
                    A[j] = U_full[b]
                else:
                    V = _per_pick(mom[m * np.arange(b + 1) + s], n, np.arange(b + 1))
                    A[j] = sum(math.comb(b, k) * U_rest[b - k] * V[k] for k in range(b + 1))
            return A
        raise NoClosedForm(f"block-repeat over {self.base.kind}")

    def describe(self):
        return {"kind": self.kind, "n": self.n, "r": self.r, "m": self.m,
                "base": self.base.kind, "allow_pad": self.allow_pad}


class HotStart(SchemeFamily):
    """Slot 1 always uses detector ``pin``; later slots follow a base family
    over the remaining ``n - 1`` detectors."""

    kind = "hot-start"

    def __init__(self, n: int, r: int, pin: int, base: SchemeFamily):
        if not (1 <= pin <= n):
            raise ValueError(f"pin {pin} outside 1..{n}")
        if r < 2:
            raise ValueError("hot-start needs r >= 2")
        if base.n != n - 1 or base.r != r - 1:
            raise ValueError(f"base family must be ({n - 1}, {r - 1}), got ({base.n}, {base.r})")
        self.n = n
        self.r = r
        self.pin = pin
        self.base = base

    def _lift(self, rows: np.ndarray) -> np.ndarray:
        p0 = self.pin - 1
        lifted = rows + (rows >= p0)
        return np.concatenate([np.full((rows.shape[0], 1), p0, dtype=np.int64), lifted], axis=1)

    def sample_batch(self, rng, size):
        return self._lift(self.base.sample_batch(rng, size))

    def support(self):
        sup = self.base.support()
        if sup is None:
            return None
        return self._lift(sup[0]), sup[1]

    def a_exact(self, k):
        self._check_k(k)
        return 1.0 if k == 1 else self.base.a_exact(k - 1)

    def b_exact(self, k):
        self._check_k(k)
        return 0.0

    def prefix_count(self, j):
        return 1 if j == 0 else self.base.prefix_count(j - 1)

    def _enumerate_prefix(self, j):
        if j == 0:
            return {(): 1.0}
        return {
            (self.pin,) + tuple(x if x < self.pin else x + 1 for x in t): p
            for t, p in self.base._enumerate_prefix(j - 1).items()
        }

    def exact_alphas(self, batch):
        q_pin = batch.alphabet.q[batch.column(self.pin - 1)]
        rest = self.base.exact_alphas(batch.drop(self.pin - 1))
        A = np.empty((batch.replicates, self.r + 1))
        A[:, 0] = 1.0
        A[:, 1:] = q_pin[:, None] * rest
        return A

    def mean_alphas(self, alphabet):
        rest = self.base.mean_alphas(alphabet)
        return np.concatenate([[1.0], alphabet.moment(1) * rest])

    def describe(self):
        return {"kind": self.kind, "n": self.n, "r": self.r, "pin": self.pin, "base": self.base.kind}


# -- quantities of interest -------------------------------------------------


def sample_scheme(family: SchemeFamily, rng: np.random.Generator) -> Scheme:
    return family.sample(rng)


def prefix_distinctness(family: SchemeFamily, k: int, method: str = "auto",
                        samples: int = DEFAULT_MC_SAMPLES, rng: np.random.Generator | None = None
                        ) -> PrefixDistinctness:
    family._check_k(k)
    if method in ("auto", "exact"):
        try:
            return PrefixDistinctness(k, family.a_exact(k), "exact")
        except NoClosedForm:
            if method == "exact":
                raise
    rng = np.random.default_rng() if rng is None else rng
    hits = _distinct_rows(family.sample_batch(rng, samples)[:, :k])
    a = float(hits.mean())
    return PrefixDistinctness(k, a, "monte_carlo", samples, math.sqrt(max(a * (1 - a), 0.0) / samples))


def pairwise_disjointness(family: SchemeFamily, k: int, method: str = "auto",
                          samples: int = DEFAULT_MC_SAMPLES, rng: np.random.Generator | None = None
                          ) -> PairwiseDisjointness:
    family._check_k(k)
    if method in ("auto", "exact"):
        try:
            return PairwiseDisjointness(k, family.b_exact(k), "exact")
        except NoClosedForm:
            if method == "exact":
                raise
    rng = np.random.default_rng() if rng is None else rng
    first = family.sample_batch(rng, samples)[:, :k]
    second = family.sample_batch(rng, samples)[:, :k]
    hits = _disjoint_rows(first, second)
    b = float(hits.mean())
    return PairwiseDisjointness(k, b, "monte_carlo", samples, math.sqrt(max(b * (1 - b), 0.0) / samples))


def prefix_law(family: SchemeFamily, j: int, budget: int = DEFAULT_TUPLE_BUDGET):
    return family.prefix_law(j, budget)


# -- family descriptors -------------------------------------------------------

_SIMPLE = {"uniform-injective": UniformInjective, "iid-uniform": IidUniform}
KINDS = ("uniform-injective", "iid-uniform", "round-robin", "block-repeat", "hot-start", "fixed", "custom")


@dataclass(frozen=True)
class FamilySpec:
    """A family description that can be instantiated for any ``(n, r)``."""

    kind: str
    params: tuple[tuple[str, object], ...] = ()
    label: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; choose from {', '.join(KINDS)}")

    @property
    def name(self) -> str:
        return self.label or self.kind.replace("-", "_")

    def get(self, key, default=None):
        return dict(self.params).get(key, default)

    @classmethod
    def from_dict(cls, d: dict) -> "FamilySpec":
        d = dict(d)
        kind = d.pop("kind")
        label = d.pop("label", None)
        params = []
        for k, v in sorted(d.items()):
            if isinstance(v, list):
                v = tuple(tuple(x) if isinstance(x, list) else x for x in v)
            params.append((k, v))
        return cls(kind, tuple(params), label)

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """``kind[:key=value,...]``; list values use ``/`` as separator,
        e.g. ``block-repeat:m=2,base=iid-uniform`` or ``fixed:assignment=1/2/3``."""
        kind, _, rest = text.partition(":")
        d: dict = {"kind": kind.strip()}
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, _, val = item.partition("=")
            d[key.strip()] = _coerce(val.strip())
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for k, v in self.params:
            d[k] = [list(x) if isinstance(x, tuple) else x for x in v] if isinstance(v, tuple) else v
        if self.label:
            d["label"] = self.label
        return d

    def build(self, n: int, r: int) -> SchemeFamily:
        kind = self.kind
        if kind in _SIMPLE:
            return _SIMPLE[kind](n, r)
        if kind == "round-robin":
            offs = self.get("offsets", "uniform")
            if offs == "uniform":
                return RoundRobin(n, r)
            if offs == "point":
                w = np.zeros(n)
                w[0] = 1.0
                return RoundRobin(n, r, w)
            return RoundRobin(n, r, offs)
        if kind == "block-repeat":
            m = int(self.get("m", 2))
            base = FamilySpec(self.get("base", "uniform-injective")).build(n, -(-r // m))
            return BlockRepeat(n, r, m, base, allow_pad=bool(self.get("allow_pad", False)))
        if kind == "hot-start":
            base = FamilySpec(self.get("base", "uniform-injective")).build(n - 1, r - 1)
            return HotStart(n, r, int(self.get("pin", 1)), base)
        if kind == "fixed":
            assignment = self.get("assignment", "identity")
            if assignment == "identity":
                if r > n:
                    raise InfeasibleScheme(f"identity scheme needs r <= n (r={r}, n={n})")
                assignment = tuple(range(1, r + 1))
            if len(assignment) != r:
                raise ValueError(f"fixed assignment has length {len(assignment)}, expected r={r}")
            return Fixed(Scheme(tuple(assignment)), n)
        if kind == "custom":
            pattern = self.get("pattern")
            if pattern == "two-blocks":
                if 2 * r > n:
                    raise InfeasibleScheme(f"two-blocks pattern needs 2r <= n (r={r}, n={n})")
                schemes = [tuple(range(1, r + 1)), tuple(range(r + 1, 2 * r + 1))]
                return CustomWeighted(n, schemes, [0.5, 0.5])
            schemes = self.get("schemes")
            if schemes is None:
                raise ValueError("custom family needs 'schemes' (and 'weights') or pattern='two-blocks'")
            weights = self.get("weights") or [1.0 / len(schemes)] * len(schemes)
            fam = CustomWeighted(n, schemes, weights)
            if fam.r != r:
                raise ValueError(f"custom schemes have length {fam.r}, expected r={r}")
            return fam
        raise ValueError(kind)


def _coerce(val: str):
    if "/" in val:
        return tuple(_coerce(v) for v in val.split("/"))
    low = val.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            pass
    return val


CATALOG = (
    FamilySpec("uniform-injective"),
    FamilySpec("iid-uniform"),
    FamilySpec("round-robin"),
    FamilySpec("block-repeat", (("allow_pad", True), ("base", "uniform-injective"), ("m", 2))),
    FamilySpec("hot-start", (("base", "uniform-injective"), ("pin", 1))),
    FamilySpec("fixed"),
    FamilySpec("custom", (("pattern", "two-blocks"),)),
)
