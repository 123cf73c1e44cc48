"""SLK Bell functional for pure two-qudit states.

Under the Fourier-type settings with offsets (0, 1/2, 1/4, -1/4) the Bell
value of a Schmidt state equals ``2 sqrt2 (d - 1)`` times its concurrence,
so a Bell test doubles as an entanglement measurement.
"""

from .errors import SLKError
from .functional import (
    BellResult,
    BellWeights,
    bell_weights,
    evaluate,
    lr_bound,
    predicted_value,
    slk_from_correlations,
    slk_from_probabilities,
    violation_threshold,
)
from .measurement import (
    CANONICAL_OFFSETS,
    CorrelationSpectrum,
    JointProbabilityTable,
    PhaseOffsets,
    correlation_spectrum,
    difference_distribution,
    eigenvector,
    joint_probability,
    probability_table,
)
from .optimizer import OptimizationResult, evaluate_objective, optimize
from .sampling import (
    BellEstimate,
    CountTable,
    ExperimentPlan,
    estimate_concurrence,
    estimate_slk,
    simulate_counts,
)
from .state import (
    SchmidtState,
    concurrence,
    maximally_entangled,
    new_schmidt,
    product_state,
    random_schmidt,
)

__version__ = "0.1.0"
