"""Exact detection law for a fixed (scheme, configuration) pair, and its simulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alphabet import Configuration
from .schemes import Scheme

UNDERFLOW = 1e-300

# Detection did not happen within the round.
NOT_DETECTED = None


@dataclass(frozen=True)
class AlphaSequence:
    """Running products ``alpha_k = q_pi(1) ... q_pi(k)``, ``alpha_0 = 1``."""

    alphas: tuple[float, ...]
    underflow: bool = False

    @property
    def r(self) -> int:
        return len(self.alphas) - 1


@dataclass(frozen=True)
class DetectionDistribution:
    pmf: tuple[float, ...]
    mass_at_infinity: float

    @property
    def success_probability(self) -> float:
        return 1.0 - self.mass_at_infinity

    @property
    def expected_truncated_time(self) -> float:
        return float(sum(k * p for k, p in enumerate(self.pmf, start=1)))

    def to_dict(self) -> dict:
        return {
            "pmf": list(self.pmf),
            "mass_at_infinity": self.mass_at_infinity,
            "expected_truncated_time": self.expected_truncated_time,
            "success_probability": self.success_probability,
        }


@dataclass(frozen=True)
class DecisionTrace:
    decisions: tuple[int, ...]
    detection_time: int | None

    @property
    def detected(self) -> bool:
        return self.detection_time is not NOT_DETECTED


def _slot_q(scheme: Scheme, config: Configuration) -> np.ndarray:
    scheme.check(config.n)
    return config.q[scheme.index0]


def alpha_sequence(scheme: Scheme, config: Configuration) -> AlphaSequence:
    q = _slot_q(scheme, config)
    alphas = [1.0]
    underflow = False
    for qk in q:
        a = alphas[-1] * float(qk)
        if a < UNDERFLOW:
            a = 0.0
            underflow = True
        alphas.append(a)
    return AlphaSequence(tuple(alphas), underflow)


def detection_pmf(scheme: Scheme, config: Configuration) -> DetectionDistribution:
    a = alpha_sequence(scheme, config).alphas
    pmf = tuple(a[k - 1] - a[k] for k in range(1, len(a)))
    return DetectionDistribution(pmf, a[-1])


def expected_truncated_time(scheme: Scheme, config: Configuration) -> float:
    """``E[T 1(T < inf)] = sum_{j<r} alpha_j - r alpha_r``."""
    a = alpha_sequence(scheme, config).alphas
    r = len(a) - 1
    return float(sum(a[:r]) - r * a[r])


def success_probability(scheme: Scheme, config: Configuration) -> float:
    return 1.0 - alpha_sequence(scheme, config).alphas[-1]


def conditional_expected_time(scheme: Scheme, config: Configuration) -> float:
    """``E[T | T < inf]``; not the quantity the capacity results use."""
    return expected_truncated_time(scheme, config) / success_probability(scheme, config)


def simulate_round(scheme: Scheme, config: Configuration, rng: np.random.Generator) -> DecisionTrace:
    scheme.check(config.n)
    p = config.probs[scheme.index0]
    decisions = tuple(int(x) for x in rng.random(scheme.r) < p)
    time = next((t for t, d in enumerate(decisions, start=1) if d), NOT_DETECTED)
    return DecisionTrace(decisions, time)


def empirical_law(scheme: Scheme, config: Configuration, replicates: int,
                  rng: np.random.Generator) -> DetectionDistribution:
    """Frequencies of each detection slot over many simulated rounds."""
    scheme.check(config.n)
    p = config.probs[scheme.index0]
    r = scheme.r
    counts = np.zeros(r + 1, dtype=np.int64)
    chunk = max(1, 4_000_000 // r)
    for lo in range(0, replicates, chunk):
        size = min(chunk, replicates - lo)
        hit = rng.random((size, r)) < p
        first = np.where(hit.any(axis=1), hit.argmax(axis=1), r)
        counts += np.bincount(first, minlength=r + 1)
    freq = counts / replicates
    return DetectionDistribution(tuple(freq[:r].tolist()), float(freq[r]))
