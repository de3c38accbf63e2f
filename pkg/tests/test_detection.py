import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detcap import (
    ConfigAlphabet,
    Configuration,
    Scheme,
    alpha_sequence,
    detection_pmf,
    expected_truncated_time,
    simulate_round,
    success_probability,
)
from detcap.detection import NOT_DETECTED, conditional_expected_time, empirical_law
from detcap.oracles import oracle_pmf


def test_two_detector_example():
    config = Configuration.of([0.5, 0.5])
    scheme = Scheme((1, 2))
    assert alpha_sequence(scheme, config).alphas == (1.0, 0.5, 0.25)
    law = detection_pmf(scheme, config)
    assert law.pmf == (0.5, 0.25)
    assert law.mass_at_infinity == 0.25
    assert expected_truncated_time(scheme, config) == pytest.approx(1.0)


def test_hand_product():
    config = Configuration.of([0.2, 0.8])
    a = alpha_sequence(Scheme((2, 1, 2)), config).alphas
    assert np.allclose(a, (1, 0.2, 0.16, 0.032))


def test_three_detector_outcome_oracle():
    config = Configuration.of([0.2, 0.5, 0.8])
    law = detection_pmf(Scheme((3, 1, 2)), config)
    assert np.allclose(law.pmf, (0.8, 0.04, 0.08))
    assert law.mass_at_infinity == pytest.approx(0.08)
    ref = oracle_pmf((3, 1, 2), config.probs)
    assert np.allclose(law.pmf, ref.pmf, atol=1e-15)


def test_homogeneous_is_truncated_geometric():
    config = Configuration.of([0.5] * 4)
    scheme = Scheme(tuple([1, 2, 3, 4] * 12 + [1, 2]))
    expected = sum(0.5 ** j for j in range(50)) - 50 * 0.5 ** 50
    assert abs(expected_truncated_time(scheme, config) - expected) <= 1e-12


def test_index_out_of_range():
    with pytest.raises(IndexError):
        detection_pmf(Scheme((3,)), Configuration.of([0.5, 0.4]))


def test_underflow_flag():
    config = Configuration.of([0.99])
    seq = alpha_sequence(Scheme((1,) * 200), config)
    assert seq.underflow
    assert seq.alphas[-1] == 0.0


def test_conditional_time_differs_from_truncated():
    config = Configuration.of([0.2, 0.5])
    scheme = Scheme((1, 2))
    t = expected_truncated_time(scheme, config)
    assert conditional_expected_time(scheme, config) == pytest.approx(t / success_probability(scheme, config))


def test_exhaustive_small_instances_against_oracle():
    """Every scheme over n <= 3, r <= 4 and every two-letter configuration."""
    al = ConfigAlphabet((0.2, 0.8))
    for n in (1, 2, 3):
        for letters in itertools.product((0, 1), repeat=n):
            config = Configuration(al, letters)
            for r in range(1, 5):
                for assignment in itertools.product(range(1, n + 1), repeat=r):
                    law = detection_pmf(Scheme(assignment), config)
                    ref = oracle_pmf(assignment, config.probs)
                    assert max(abs(a - b) for a, b in zip(law.pmf, ref.pmf)) <= 1e-12
                    assert abs(sum(law.pmf) + law.mass_at_infinity - 1) <= 1e-12
                    assert abs(law.expected_truncated_time - expected_truncated_time(Scheme(assignment), config)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=5), st.data())
def test_raising_a_probability_never_lowers_success(probs, data):
    n = len(probs)
    assignment = data.draw(st.lists(st.integers(1, n), min_size=1, max_size=8))
    k = data.draw(st.integers(0, n - 1))
    bumped = list(probs)
    bumped[k] = min(0.995, probs[k] + 0.1)
    s0 = success_probability(Scheme(tuple(assignment)), Configuration.of(probs))
    s1 = success_probability(Scheme(tuple(assignment)), Configuration.of(bumped))
    assert s1 >= s0 - 1e-15


def test_simulated_trace_is_consistent_and_reproducible():
    config = Configuration.of([0.3, 0.6])
    scheme = Scheme((1, 2, 1, 2))
    a = simulate_round(scheme, config, np.random.default_rng(7))
    b = simulate_round(scheme, config, np.random.default_rng(7))
    assert a == b
    if a.detection_time is NOT_DETECTED:
        assert not any(a.decisions)
    else:
        assert a.decisions[a.detection_time - 1] == 1
        assert not any(a.decisions[: a.detection_time - 1])


def test_empirical_law_matches_exact():
    config = Configuration.of([0.5, 0.5])
    emp = empirical_law(Scheme((1, 2)), config, 1_000_000, np.random.default_rng(3))
    tol = 4 * (0.25 / 1_000_000) ** 0.5
    assert abs(emp.pmf[0] - 0.5) <= tol
    assert abs(emp.pmf[1] - 0.25) <= tol
    assert abs(emp.mass_at_infinity - 0.25) <= tol
