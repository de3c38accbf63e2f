import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detcap import kernels

BACKENDS = kernels.available_backends()


def brute_esm(values, counts, jmax):
    """Mean of products over ordered draws without replacement, by enumeration."""
    pool = [v for v, c in zip(values, counts) for _ in range(c)]
    out = []
    for j in range(jmax + 1):
        if j > len(pool):
            out.append(0.0)
            continue
        perms = list(itertools.permutations(range(len(pool)), j))
        out.append(sum(math.prod(pool[i] for i in p) for p in perms) / len(perms))
    return np.array(out)


def brute_derivative(values, hvals, counts, jmax):
    """Same, with one uniformly chosen factor swapped for its h-value."""
    pool = [(v, h) for v, h, c in zip(values, hvals, counts) for _ in range(c)]
    out = [0.0]
    for j in range(1, jmax + 1):
        if j > len(pool):
            out.append(0.0)
            continue
        perms = list(itertools.permutations(range(len(pool)), j))
        total = 0.0
        for p in perms:
            for swap in range(j):
                total += math.prod(pool[i][1] if t == swap else pool[i][0] for t, i in enumerate(p)) / j
        out.append(total / len(perms))
    return np.array(out)


def test_fallback_always_available():
    assert "fallback" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
def test_grouped_esm_matches_enumeration(backend):
    values = np.array([[0.8, 0.2]])
    counts = np.array([[2, 3]])
    E, D = kernels.grouped_esm(values, counts, 4, backend=backend)
    assert np.allclose(E[0], brute_esm([0.8, 0.2], [2, 3], 4), atol=1e-14)
    hv = np.array([[0.5, 0.9]])
    _, D = kernels.grouped_esm(values, counts, 4, hvals=hv, backend=backend)
    assert np.allclose(D[0], brute_derivative([0.8, 0.2], [0.5, 0.9], [2, 3], 4), atol=1e-14)


@pytest.mark.parametrize("backend", BACKENDS)
def test_weighted_alpha_means_small(backend):
    schemes = np.array([[0, 1, 0], [1, 1, 0]])
    w = np.array([0.25, 0.75])
    q = np.array([[0.5, 0.2]])
    out = kernels.weighted_alpha_means(schemes, w, q, backend=backend)
    ref = [1.0, 0.25 * 0.5 + 0.75 * 0.2, 0.25 * 0.1 + 0.75 * 0.04, 0.25 * 0.05 + 0.75 * 0.02]
    assert np.allclose(out[0], ref)


@pytest.mark.parametrize("backend", BACKENDS)
def test_weighted_alpha_means_rejects_bad_index(backend):
    with pytest.raises(IndexError):
        kernels.weighted_alpha_means(np.array([[0, 3]]), np.ones(1), np.ones((1, 2)) * 0.5, backend=backend)


@settings(max_examples=40, deadline=None)
@given(
    counts=st.lists(st.integers(0, 4), min_size=1, max_size=3),
    seed=st.integers(0, 2**32 - 1),
    jmax=st.integers(0, 6),
)
def test_backends_agree_with_enumeration(counts, seed, jmax):
    if sum(counts) > 7:
        counts = [min(c, 2) for c in counts]
    rng = np.random.default_rng(seed)
    values = rng.uniform(0.05, 0.95, len(counts))
    ref = brute_esm(values.tolist(), counts, jmax)
    for backend in BACKENDS:
        E, _ = kernels.grouped_esm(values[None, :], np.array([counts]), jmax, backend=backend)
        assert np.allclose(E[0], ref, atol=1e-13)


def test_backends_agree_at_scale():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(0)
    counts = rng.multinomial(10_000, [0.5, 0.5], size=50)
    values = np.broadcast_to(np.array([0.8, 0.2]), counts.shape)
    a = kernels.grouped_esm(values, counts, 100, backend="compiled")
    b = kernels.grouped_esm(values, counts, 100, backend="fallback")
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-10, atol=1e-300)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("gpu")


def test_pure_python_switch_selects_fallback():
    import os
    import subprocess
    import sys

    code = "import detcap; print(detcap.BACKEND)"
    env = dict(os.environ, DETCAP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "fallback"
