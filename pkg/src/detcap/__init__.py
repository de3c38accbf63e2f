"""Exact and Monte Carlo analysis of randomized multidetector search schemes."""

from .alphabet import (
    ConfigAlphabet,
    ConfigBatch,
    Configuration,
    GeometricPlacement,
    ModelError,
    alphabet_moment,
    p_average,
    place_and_quantize,
    sample_batch,
    sample_configuration,
)
from .capacity import AchievabilityTarget, CapacityVerdict, RoundSchedule, b_mass, capacity_sweep, s_convergence_check
from .detection import (
    AlphaSequence,
    DecisionTrace,
    DetectionDistribution,
    alpha_sequence,
    detection_pmf,
    expected_truncated_time,
    simulate_round,
    success_probability,
)
from .ensemble import (
    EnsembleReport,
    LemmaConstants,
    QuenchedStats,
    TjTerm,
    delta_cross_moment,
    ensemble_report,
    lemma_constants,
    mean_convergence_check,
    quenched_stats,
    tj_terms,
    variance_sandwich_check,
)
from .kernels import BACKEND
from .schemes import (
    CATALOG,
    BlockRepeat,
    CustomWeighted,
    FamilySpec,
    Fixed,
    HotStart,
    IidUniform,
    InfeasibleScheme,
    NoClosedForm,
    PrefixBudgetExceeded,
    RoundRobin,
    Scheme,
    SchemeFamily,
    UniformInjective,
    pairwise_disjointness,
    prefix_distinctness,
    prefix_law,
    sample_scheme,
)

__all__ = [name for name in dir() if not name.startswith("_")]
