import numpy as np
import pytest

from detcap import (
    CATALOG,
    BlockRepeat,
    ConfigAlphabet,
    Configuration,
    FamilySpec,
    Fixed,
    HotStart,
    IidUniform,
    RoundSchedule,
    Scheme,
    UniformInjective,
    delta_cross_moment,
    ensemble_report,
    expected_truncated_time,
    lemma_constants,
    mean_convergence_check,
    quenched_stats,
    success_probability,
    tj_terms,
    variance_sandwich_check,
)
from detcap.ensemble import e_constant, ensemble_alphas, joint_profiles, quenched_alphas, var_and_se
from detcap.oracles import oracle_delta, oracle_time


def test_fixed_family_reproduces_detection_core():
    config = Configuration.of([0.2, 0.5, 0.8])
    scheme = Scheme((3, 1, 2))
    q = quenched_stats(Fixed(scheme, 3), config)
    assert q.t_of_p == pytest.approx(expected_truncated_time(scheme, config), abs=1e-12)
    assert q.s_of_p == pytest.approx(success_probability(scheme, config), abs=1e-12)


def test_homogeneous_configuration_is_scheme_invariant():
    config = Configuration.of([0.4] * 6)
    values = {spec.name: quenched_stats(spec.build(6, 3), config).t_of_p for spec in CATALOG}
    target = sum(0.6 ** j for j in range(3)) - 3 * 0.6 ** 3
    assert all(abs(v - target) <= 1e-12 for v in values.values())


def test_quenched_exact_vs_monte_carlo(two_letter):
    config = Configuration(two_letter, (0, 1, 1, 0))
    fam = UniformInjective(4, 3)
    exact = quenched_stats(fam, config)
    ref, _ = oracle_time(fam.prefix_law(3), config.probs)
    assert exact.t_of_p == pytest.approx(ref, abs=1e-12)
    mc = quenched_stats(fam, config, "mc", samples=1_000_000, rng=np.random.default_rng(0))
    assert abs(mc.t_of_p - exact.t_of_p) <= 4 * mc.se_t


def test_dimension_mismatch(two_letter):
    with pytest.raises(ValueError):
        quenched_stats(UniformInjective(5, 2), Configuration(two_letter, (0, 1)))


def test_tj_terms():
    config = Configuration.of([0.1, 0.3, 0.6, 0.9])
    q = 1 - config.probs
    terms = tj_terms(UniformInjective(4, 3), config, 2)
    assert terms[0].value == pytest.approx(q.mean())
    pairs = [q[i] * q[j] for i in range(4) for j in range(4) if i != j]
    assert terms[1].value == pytest.approx(np.mean(pairs))
    hs = tj_terms(HotStart(4, 3, 1, UniformInjective(3, 2)), config, 1)
    assert hs[0].value == pytest.approx(q[0])


def test_decomposition_identity():
    config = Configuration.of([0.15, 0.35, 0.7, 0.9, 0.5])
    fam = IidUniform(5, 4)
    A, _ = quenched_alphas(fam, config)
    T = 1 + sum(A[1:4]) - 4 * A[4]
    assert T == pytest.approx(quenched_stats(fam, config).t_of_p, abs=1e-12)


def test_delta_examples(two_letter):
    assert delta_cross_moment((1, 2), (3, 4), two_letter) == 0.0
    assert delta_cross_moment((1,), (1,), two_letter) == pytest.approx(0.09)
    assert delta_cross_moment((1, 2), (2, 3), two_letter) == pytest.approx(0.0225)
    assert delta_cross_moment((1, 1, 2), (2, 1), two_letter) == pytest.approx(
        oracle_delta((1, 1, 2), (2, 1), 2, two_letter.values), abs=1e-15)


def test_lemma_constants(two_letter):
    lc = lemma_constants(two_letter)
    assert lc.d[2] == pytest.approx(0.39)
    assert lc.c[2] == pytest.approx(0.36)
    assert lc.c[3] == pytest.approx(0.36)
    assert lc.e_table[(1, 1)] == pytest.approx(0.09)
    assert all(v > 0 for v in lc.e_table.values())
    assert all(v > 0 for v in lc.c.values()) and all(v > 0 for v in lc.d.values())


def test_single_point_alphabet_constants():
    lc = lemma_constants(ConfigAlphabet((0.3,)))
    assert lc.degenerate
    assert all(np.isnan(v) for v in lc.c.values())
    assert all(v == pytest.approx(0.0, abs=1e-15) for v in lc.e_table.values())


def test_joint_profiles_cover_sizes():
    for prof in joint_profiles(2, 3):
        assert sum(a for a, _ in prof) == 2 and sum(b for _, b in prof) == 3
    assert e_constant(2, 1, ConfigAlphabet((0.2, 0.8))) > 0


def test_injective_exact_mean(two_letter):
    rep = ensemble_report(UniformInjective(200, 50), two_letter, 2000, seed=1)
    assert abs(rep.exact_mean_T - (2 * (1 - 0.5 ** 50) - 50 * 0.5 ** 50)) <= 1e-12
    assert abs(rep.mean_T - rep.exact_mean_T) <= 4 * rep.se_mean


def test_block_repeat_exact_formula(two_letter):
    fam = BlockRepeat(400, 20, 2, UniformInjective(400, 10))
    rep = ensemble_report(fam, two_letter, 4000, seed=2)
    m1, m2 = 0.5, 0.34
    formula = (1 + m1) * (1 - m2 ** 10) / (1 - m2) - 20 * m2 ** 10
    assert rep.exact_mean_T == pytest.approx(formula, abs=1e-12)
    assert abs(rep.mean_T - formula) <= 4 * rep.se_mean


def test_single_point_alphabet_has_zero_variance():
    rep = ensemble_report(IidUniform(30, 5), ConfigAlphabet((0.4,)), 100, seed=0)
    assert rep.var_T == 0.0


def test_replicates_validation(two_letter):
    with pytest.raises(ValueError):
        ensemble_report(UniformInjective(10, 3), two_letter, 1, seed=0)


def test_results_do_not_depend_on_worker_count(two_letter, monkeypatch):
    fam = UniformInjective(300, 17)
    monkeypatch.setenv("DETCAP_THREADS", "1")
    a = ensemble_alphas(fam, two_letter, 3500, seed=5)
    monkeypatch.setenv("DETCAP_THREADS", "4")
    b = ensemble_alphas(fam, two_letter, 3500, seed=5)
    assert np.array_equal(a, b)


def test_sandwich_for_injective_and_fixed(two_letter):
    rep = variance_sandwich_check(UniformInjective(10_000, 100), two_letter, 3, 2000, seed=3)
    assert rep.holds and rep.upper < 0.01
    fixed = variance_sandwich_check(Fixed(tuple(range(1, 11)), 50), two_letter, 3, 20_000, seed=4)
    assert fixed.holds and fixed.lower > 0.1
    assert fixed.terms_hold


def test_term_covariances_are_nonnegative(two_letter):
    for idx, spec in enumerate(CATALOG):
        A = ensemble_alphas(spec.build(100, 10), two_letter, 20_000, seed=6, key=(idx,))
        for j1, j2 in [(1, 2), (1, 3), (2, 3)]:
            x, y = A[:, j1], A[:, j2]
            prod = (x - x.mean()) * (y - y.mean())
            cov = prod.mean()
            se = prod.std(ddof=1) / np.sqrt(len(prod))
            assert cov >= -4 * se


def test_mean_convergence_verdicts(two_letter):
    grid = (100, 1000, 10_000)
    sched = RoundSchedule("sqrt")
    inj = mean_convergence_check(FamilySpec("uniform-injective"), two_letter, grid, sched)
    assert inj.verdict == "ACHIEVES" and inj.consistent
    block = mean_convergence_check(
        FamilySpec("block-repeat", (("allow_pad", True), ("m", 2))), two_letter, grid, sched)
    assert block.verdict == "FAILS" and block.consistent
    assert block.gaps[-1] == pytest.approx(1.5 / 0.66 - 2, abs=1e-3)
    iid = mean_convergence_check(FamilySpec("iid-uniform"), two_letter, grid, sched)
    assert iid.verdict == "ACHIEVES" and iid.consistent
    assert iid.gaps[1] < 0.02


def test_var_and_se_of_constant():
    v, se = var_and_se(np.ones(10))
    assert v == 0.0 and se == 0.0


def test_repeat_gap_bounds_hold_over_all_tuples():
    from itertools import product

    from detcap.ensemble import repeat_gap_bounds
    from detcap.oracles import oracle_q_moments

    for al in (ConfigAlphabet((0.2, 0.8)), ConfigAlphabet((0.1, 0.5, 0.9), (0.2, 0.3, 0.5))):
        m1 = 1 - sum(v * w for v, w in zip(al.values, al.weights))
        for j in (2, 3, 4):
            lo, hi = repeat_gap_bounds(al, j)
            for t in product(range(1, 5), repeat=j):
                gap = oracle_q_moments(t, (), 4, al.values, al.weights)[0] - m1 ** j
                if len(set(t)) == j:
                    assert abs(gap) <= 1e-12
                else:
                    assert lo - 1e-12 <= gap <= hi + 1e-12


def test_repeat_gap_is_not_bounded_below_by_bare_c(two_letter):
    # the ratio constant alone overstates the gap: a repeated pair gains m2 - m1^2 = 0.09 < c_2 = 0.36
    lc = lemma_constants(two_letter)
    assert two_letter.moment(2) - 0.25 < lc.c[2]
