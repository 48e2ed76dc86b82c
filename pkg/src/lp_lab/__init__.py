"""Littlewood-Paley laboratory: thin closed sets, their thickness, and numerical LP probes."""

from .combinatorics import (
    APSpec,
    SplittingCertificate,
    chain_split_shift,
    feasible_shifts,
    find_chain,
    is_chain,
    lemma2_shift,
    max_splitting_subset,
    splits,
)
from .exceptions import AliasingError, InfeasibleShiftError, LPLabError, ReliabilityError, ValidationError
from .fitting import ExponentFit, loglog_fit
from .fourier import (
    GridSignal,
    ProbeReport,
    TrigPolynomial,
    chain_ratio,
    dirichlet_norm,
    dirichlet_scaling,
    frame_probe,
    khintchine_ratio,
    lemma4_growth,
    lp_norm,
    rademacher_experiment,
    square_function,
)
from .sets import (
    Chain,
    GapSequence,
    GapSet,
    PsiSpec,
    cantor_triadic,
    dyadic_set,
    from_gaps,
    from_points,
    generated_set,
    lemma5_sequence,
    sum_set,
    theorem3_set,
)
from .thickness import (
    DimensionFit,
    box_counting,
    gap_lower_bound,
    neighborhood_measure,
    porosity_estimate,
    portion_neighborhood,
    theorem2_fit,
)

__version__ = "0.1.0"
