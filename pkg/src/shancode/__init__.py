"""Exact and asymptotic average redundancy of the Shannon code for Markov sources."""

from .asymptotics import (
    Example2Sum,
    LogRatioMatrix,
    MemorylessPrediction,
    ModeClassification,
    Prediction,
    absorbing_pair_formula,
    anchor_log_ratios,
    ceil_defect,
    classify_mode,
    memoryless_formula,
    oscillation_argument,
    predict,
    predicted_redundancy,
    predicted_redundancy_periodic,
)
from .exact import ZERO, ExactProb, Log2Value, approximate_rational, parse_prob_spec
from .oracle import (
    Limits,
    RedundancyValue,
    TransitionCounts,
    exact_redundancy,
    kraft_sum,
    monte_carlo_redundancy,
    neg_log_mu,
    shannon_lengths,
    transition_count_classes,
)
from .sources import (
    ChainStructure,
    MarkovSource,
    ValidationReport,
    classify_structure,
    is_dyadic,
    log2_prob,
    stationary_distribution,
    validate,
)
from .spectral import (
    OscillationSearch,
    SpectralReport,
    char_fn,
    eigen,
    find_oscillation_order,
    initial_phase_vector,
    phase_matrix,
    spectral_radius,
    verify_similarity,
)

__version__ = "0.1.0"
