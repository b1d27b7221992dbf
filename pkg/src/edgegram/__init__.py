"""Gramian-based edge centrality and modification analysis for linear networks.

Quantifies how much each directed edge (present or absent) matters for
the controllability of a discrete-time network system, via gradients of
Gramian performance metrics, closed-form results for stem-bud
topologies, trace/log-det/trace-inverse bounds under single-edge
modification, stability-preserving weight intervals, and search
pipelines comparing centrality-guided edge selection to exhaustive
search.
"""

from .errors import (
    AlphaUndefined,
    AsymmetricP,
    DegenerateGraph,
    DimensionMismatch,
    EdgegramError,
    EmptyCandidateSet,
    FileFormatError,
    FitDegenerate,
    IndexOutOfRange,
    InvalidInput,
    InvalidJunction,
    LambdaTildeTooSmall,
    NonFinite,
    NotPD,
    PreconditionViolated,
    RepeatedEigenvalue,
    SingularGramian,
    UnstableAbsSystem,
    UnstableSystem,
    ZeroVector,
    ZeroWeight,
)
from .netmodel import (
    LAMBDA_MIN,
    LOGDET,
    NEG_TRACE_INV,
    TRACE,
    GramianResult,
    Horizon,
    MetricId,
    NetworkSystem,
    build_system,
    control_energy,
    evaluate_metric,
    finite_gramian,
    infinite_gramian,
    lambda_metric,
    stability_info,
)
from .gradient import (
    GradientMatrix,
    ThetaResult,
    fd_gradient_oracle,
    lyapunov_gradient,
    metric_gradient,
    theta_matrix,
    theta_matrix_literal,
)
from .ecm import EcmReport, RankedEdge, SparsityPattern, compute_ecm, rank_edges, sparsity_pattern
from .stembud import (
    DiagonalPattern,
    StemBudSpec,
    build_stembud,
    predicted_ecm_diagonals,
    stembud_gramian_closed_form,
)
from .bounds import (
    BoundsReport,
    WeightInterval,
    XConstants,
    global_weight_bound,
    lambda1_rank_one_bound,
    logdet_upper_bounds,
    psd_norm_bounds,
    stability_weight_interval,
    stembud_equal_weight_analysis,
    trace_bounds,
    trinv_lower_bounds,
    x_constants,
)
from .search import (
    EdgeMod,
    GlobalEstimate,
    SearchReport,
    apply_edge_mod,
    ecm_guided_search,
    exhaustive_search,
    global_estimate,
)
from .ergen import ErConfig, er_ensemble, generate_er_system
from .experiments import (
    ErCampaignResult,
    ExperimentTable,
    run_er_experiment,
    run_stembud6_experiment,
    six_node_family,
)

__version__ = "0.1.0"
