import math

import numpy as np
import pytest

from detcap import (
    CATALOG,
    BlockRepeat,
    ConfigAlphabet,
    CustomWeighted,
    FamilySpec,
    Fixed,
    HotStart,
    IidUniform,
    InfeasibleScheme,
    PrefixBudgetExceeded,
    RoundRobin,
    Scheme,
    UniformInjective,
    pairwise_disjointness,
    prefix_distinctness,
    prefix_law,
    sample_batch,
    sample_scheme,
)
from detcap.oracles import oracle_mean_alpha, oracle_prefix_stats, oracle_time


def feasible_catalog(n, r):
    for spec in CATALOG:
        try:
            yield spec.build(n, r)
        except InfeasibleScheme:
            pass


def test_scheme_validation():
    with pytest.raises(ValueError):
        Scheme(())
    with pytest.raises(ValueError):
        Scheme((0, 1))
    with pytest.raises(IndexError):
        Scheme((1, 4)).check(3)


def test_injective_needs_r_le_n():
    with pytest.raises(InfeasibleScheme):
        UniformInjective(3, 4)


def test_injective_samples_are_distinct_and_uniform():
    fam = UniformInjective(5, 3)
    rows = fam.sample_batch(np.random.default_rng(0), 60_000)
    assert all(len(set(r)) == 3 for r in rows[:1000])
    first = np.bincount(rows[:, 0], minlength=5) / 60_000
    assert np.all(np.abs(first - 0.2) < 4 * math.sqrt(0.16 / 60_000))


def test_injective_rejection_sampler_path():
    fam = UniformInjective(100_000, 5)
    rows = fam.sample_batch(np.random.default_rng(1), 300)
    assert rows.shape == (300, 5)
    assert all(len(set(r)) == 5 for r in rows)


@pytest.mark.parametrize("fam, a2, b2", [
    (UniformInjective(6, 4), 1.0, (4 / 6) * (3 / 5)),
    (IidUniform(6, 4), 5 / 6, None),
    (RoundRobin(6, 4), 1.0, 3 / 6),
    (Fixed((1, 2, 3, 4), 6), 1.0, 0.0),
])
def test_closed_forms(fam, a2, b2):
    assert prefix_distinctness(fam, 2).a_k == pytest.approx(a2)
    if b2 is not None:
        assert pairwise_disjointness(fam, 2).b_k == pytest.approx(b2)


def test_block_repeat_and_hot_start_limits():
    br = BlockRepeat(10, 4, 2, UniformInjective(10, 2))
    assert br.a_exact(1) == 1.0 and br.a_exact(2) == 0.0
    assert br.b_exact(3) == pytest.approx(UniformInjective(10, 2).b_exact(2))
    hs = HotStart(10, 4, 1, UniformInjective(9, 3))
    assert hs.a_exact(3) == 1.0
    assert hs.b_exact(1) == 0.0
    with pytest.raises(ValueError):
        BlockRepeat(10, 5, 2, UniformInjective(10, 3))


@pytest.mark.parametrize("n, k", [(4, 1), (4, 2), (5, 2), (6, 3)])
def test_closed_forms_match_prefix_enumeration(n, k):
    for fam in feasible_catalog(n, max(k, 2 * k if 2 * k <= n else k)):
        a, b = oracle_prefix_stats(fam, k)
        assert prefix_distinctness(fam, k).a_k == pytest.approx(a, abs=1e-12)
        assert pairwise_disjointness(fam, k).b_k == pytest.approx(b, abs=1e-12)


def test_monte_carlo_distinctness_agrees():
    fam = IidUniform(20, 5)
    est = prefix_distinctness(fam, 4, method="mc", samples=200_000, rng=np.random.default_rng(2))
    assert est.method == "monte_carlo"
    assert abs(est.a_k - fam.a_exact(4)) <= 4 * est.stderr
    est = pairwise_disjointness(fam, 3, method="mc", samples=200_000, rng=np.random.default_rng(3))
    assert abs(est.b_k - fam.b_exact(3)) <= 4 * est.stderr


def test_prefix_law_sums_to_one_and_respects_budget():
    law = prefix_law(UniformInjective(4, 3), 3)
    assert len(law) == 24
    assert math.fsum(law.values()) == pytest.approx(1.0)
    with pytest.raises(PrefixBudgetExceeded):
        prefix_law(IidUniform(100, 5), 5, budget=1000)


def test_sampled_schemes_lie_in_support():
    fam = HotStart(5, 3, 2, UniformInjective(4, 2))
    law = prefix_law(fam, 3)
    rng = np.random.default_rng(4)
    for _ in range(50):
        assert sample_scheme(fam, rng).assignment in law


@pytest.mark.parametrize("n, r", [(4, 2), (5, 3), (6, 3)])
def test_exact_alphas_match_enumeration(n, r):
    al = ConfigAlphabet((0.2, 0.8))
    batch = sample_batch(al, n, 6, np.random.default_rng(n * 10 + r))
    for fam in list(feasible_catalog(n, r)) + [
        BlockRepeat(n, r, 2, IidUniform(n, -(-r // 2)), allow_pad=True),
        HotStart(n, r, n, IidUniform(n - 1, r - 1)),
    ]:
        A = fam.exact_alphas(batch)
        law = fam.prefix_law(r)
        for i in range(batch.replicates):
            T = A[i, :r].sum() - r * A[i, r]
            T_ref, S_ref = oracle_time(law, batch.row(i).probs)
            assert T == pytest.approx(T_ref, abs=1e-12)
            assert 1 - A[i, r] == pytest.approx(S_ref, abs=1e-12)


def test_mean_alphas_match_enumeration():
    al = ConfigAlphabet((0.1, 0.6, 0.9), (0.3, 0.3, 0.4))
    n, r = 4, 3
    fams = list(feasible_catalog(n, r)) + [BlockRepeat(n, 4, 2, IidUniform(n, 2)), HotStart(n, r, 2, IidUniform(3, 2))]
    for fam in fams:
        A = fam.mean_alphas(al)
        for j in range(fam.r + 1):
            assert A[j] == pytest.approx(oracle_mean_alpha(fam, j, al.values, al.weights), abs=1e-12)


def test_injective_mean_is_geometric():
    al = ConfigAlphabet((0.2, 0.8))
    A = UniformInjective(100, 50).mean_alphas(al)
    T = A[:50].sum() - 50 * A[50]
    assert abs(T - (2 * (1 - 0.5 ** 50) - 50 * 0.5 ** 50)) <= 1e-12


def test_custom_family_validation():
    with pytest.raises(ValueError):
        CustomWeighted(4, [(1, 2), (3, 4)], [0.5, 0.6])
    with pytest.raises(ValueError):
        CustomWeighted(4, [(1, 2), (3,)], [0.5, 0.5])


def test_family_spec_parse_and_round_trip():
    spec = FamilySpec.parse("block-repeat:m=2,base=iid-uniform,allow_pad=true")
    fam = spec.build(20, 5)
    assert isinstance(fam, BlockRepeat) and isinstance(fam.base, IidUniform)
    assert FamilySpec.from_dict(spec.to_dict()) == spec
    fixed = FamilySpec.parse("fixed:assignment=3/1/2").build(3, 3)
    assert fixed.scheme.assignment == (3, 1, 2)
    with pytest.raises(ValueError):
        FamilySpec.parse("nonsense")


def test_round_robin_point_offsets_have_no_disjointness():
    fam = FamilySpec.parse("round-robin:offsets=point").build(8, 3)
    assert fam.b_exact(2) == 0.0
