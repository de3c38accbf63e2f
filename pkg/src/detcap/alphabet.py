"""Configuration alphabets, sampled configurations and the geometric front-end."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

P_FLOOR = 1e-9


class ModelError(ValueError):
    """A model input violates its physical constraints."""


@dataclass(frozen=True)
class ConfigAlphabet:
    """Finite set of admissible detection probabilities with a pmf.

    ``weights`` defaults to uniform, which reproduces the plain arithmetic
    average for ``p_average``.
    """

    values: tuple[float, ...]
    weights: tuple[float, ...] = None  # type: ignore[assignment]
    _moments: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("alphabet needs at least one value")
        if len(set(values)) != len(values):
            raise ValueError("alphabet values must be distinct")
        for v in values:
            if not (P_FLOOR < v < 1.0 - P_FLOOR):
                raise ValueError(f"alphabet value {v} must lie strictly inside (0, 1)")
        if self.weights is None:
            weights = tuple(1.0 / len(values) for _ in values)
        else:
            weights = tuple(float(w) for w in self.weights)
        if len(weights) != len(values):
            raise ValueError("weights and values differ in length")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {math.fsum(weights)!r}, not 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def p(self) -> np.ndarray:
        return np.array(self.values)

    @property
    def q(self) -> np.ndarray:
        return 1.0 - np.array(self.values)

    @property
    def w(self) -> np.ndarray:
        return np.array(self.weights)

    @property
    def p_min(self) -> float:
        return min(v for v, w in zip(self.values, self.weights) if w > 0)

    @property
    def is_degenerate(self) -> bool:
        return sum(1 for w in self.weights if w > 0) == 1

    def moment(self, w: int) -> float:
        """``E(1 - p)^w``; ``w = 0`` gives 1 for use in products."""
        if w == 0:
            return 1.0
        return alphabet_moment(self, w)

    def moments(self, wmax: int) -> np.ndarray:
        """Array ``[m_0, m_1, ..., m_wmax]`` with ``m_0 = 1``."""
        return np.array([1.0] + [alphabet_moment(self, w) for w in range(1, wmax + 1)])

    @classmethod
    def parse(cls, text: str) -> "ConfigAlphabet":
        """Parse ``"0.2,0.8"`` or ``"0.2:0.25,0.8:0.75"`` (value:weight)."""
        values, weights = [], []
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            if ":" in item:
                v, w = item.split(":", 1)
                values.append(float(v))
                weights.append(float(w))
            else:
                values.append(float(item))
        if weights and len(weights) != len(values):
            raise ValueError("give a weight for every value or for none")
        return cls(tuple(values), tuple(weights) if weights else None)

    def to_dict(self) -> dict:
        return {"values": list(self.values), "weights": list(self.weights)}


def alphabet_moment(alphabet: ConfigAlphabet, w: int) -> float:
    if isinstance(w, bool) or int(w) != w or w < 1:
        raise ValueError(f"moment order must be a positive integer, got {w!r}")
    w = int(w)
    cache = alphabet._moments
    if w not in cache:
        cache[w] = math.fsum(wt * (1.0 - v) ** w for v, wt in zip(alphabet.values, alphabet.weights))
    return cache[w]


def p_average(alphabet: ConfigAlphabet) -> float:
    return math.fsum(v * w for v, w in zip(alphabet.values, alphabet.weights))


@dataclass(frozen=True)
class Configuration:
    """A realized detection-probability vector, stored as alphabet letters."""

    alphabet: ConfigAlphabet
    letters: tuple[int, ...]

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if not letters:
            raise ValueError("a configuration needs at least one detector")
        if min(letters) < 0 or max(letters) >= self.alphabet.size:
            raise ValueError("letter outside the alphabet")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_probs(cls, alphabet: ConfigAlphabet, probs: Sequence[float]) -> "Configuration":
        lookup = {v: i for i, v in enumerate(alphabet.values)}
        letters = []
        for p in probs:
            for v, i in lookup.items():
                if abs(v - p) <= 1e-12:
                    letters.append(i)
                    break
            else:
                raise ValueError(f"probability {p} is not an alphabet member")
        return cls(alphabet, tuple(letters))

    @classmethod
    def of(cls, probs: Sequence[float]) -> "Configuration":
        """Configuration over the alphabet of its own distinct values (uniform weights)."""
        distinct = tuple(sorted(set(float(p) for p in probs)))
        return cls.from_probs(ConfigAlphabet(distinct), probs)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def probs(self) -> np.ndarray:
        return self.alphabet.p[list(self.letters)]

    @property
    def q(self) -> np.ndarray:
        return self.alphabet.q[list(self.letters)]

    def batch(self) -> "ConfigBatch":
        return ConfigBatch(self.alphabet, np.array([self.letters], dtype=np.int16))


class ConfigBatch:
    """``R`` configurations of ``n`` detectors as an ``(R, n)`` letter array."""

    def __init__(self, alphabet: ConfigAlphabet, letters: np.ndarray):
        letters = np.asarray(letters)
        if letters.ndim != 2:
            raise ValueError("letters must be 2-d (replicates, detectors)")
        self.alphabet = alphabet
        self.letters = letters

    @property
    def replicates(self) -> int:
        return self.letters.shape[0]

    @property
    def n(self) -> int:
        return self.letters.shape[1]

    def q(self) -> np.ndarray:
        return self.alphabet.q[self.letters]

    def counts(self) -> np.ndarray:
        L = self.alphabet.size
        out = np.empty((self.replicates, L), dtype=np.int64)
        for l in range(L):
            out[:, l] = np.count_nonzero(self.letters == l, axis=1)
        return out

    def column(self, index: int) -> np.ndarray:
        return self.letters[:, index]

    def drop(self, index: int) -> "ConfigBatch":
        return ConfigBatch(self.alphabet, np.delete(self.letters, index, axis=1))

    def row(self, i: int) -> Configuration:
        return Configuration(self.alphabet, tuple(self.letters[i]))


def sample_letters(alphabet: ConfigAlphabet, shape, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(alphabet.w)
    cdf[-1] = 1.0
    u = rng.random(shape)
    return np.searchsorted(cdf, u, side="right").astype(np.int16)


def sample_configuration(alphabet: ConfigAlphabet, n: int, rng: np.random.Generator) -> Configuration:
    if n < 1:
        raise ValueError("n must be at least 1")
    return Configuration(alphabet, tuple(sample_letters(alphabet, n, rng)))


def sample_batch(alphabet: ConfigAlphabet, n: int, replicates: int, rng: np.random.Generator) -> ConfigBatch:
    if n < 1:
        raise ValueError("n must be at least 1")
    return ConfigBatch(alphabet, sample_letters(alphabet, (replicates, n), rng))


def linear_attenuation(floor: float = 0.1) -> Callable[[float], float]:
    """``d -> max(floor, 1 - d)``."""
    return lambda d: max(floor, 1.0 - d)


def nearest_quantizer(alphabet: ConfigAlphabet) -> Callable[[float], int]:
    values = alphabet.p

    def quantize(p: float) -> int:
        return int(np.argmin(np.abs(values - p)))

    return quantize


@dataclass(frozen=True)
class GeometricPlacement:
    """Detectors in the unit square around a source at the origin.

    The attenuation maps distance to a raw probability in [0, 1]; the
    quantizer snaps it to the nearest alphabet value.
    """

    positions: tuple[tuple[float, float], ...]
    alphabet: ConfigAlphabet
    attenuation: Callable[[float], float] = field(default_factory=linear_attenuation)

    def __post_init__(self):
        pos = tuple((float(x), float(y)) for x, y in self.positions)
        if not pos:
            raise ValueError("no detector positions")
        for x, y in pos:
            if abs(x) > 0.5 or abs(y) > 0.5:
                raise ModelError(f"position ({x}, {y}) outside the unit square")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def random(cls, n: int, alphabet: ConfigAlphabet, rng: np.random.Generator, **kw) -> "GeometricPlacement":
        pts = rng.uniform(-0.5, 0.5, size=(n, 2))
        return cls(tuple(map(tuple, pts)), alphabet, **kw)


def place_and_quantize(placement: GeometricPlacement) -> Configuration:
    quantize = nearest_quantizer(placement.alphabet)
    letters = []
    for x, y in placement.positions:
        raw = placement.attenuation(math.hypot(x, y))
        if not (0.0 <= raw <= 1.0):
            raise ModelError(f"attenuation produced {raw}, outside [0, 1]")
        letters.append(quantize(raw))
    return Configuration(placement.alphabet, tuple(letters))
