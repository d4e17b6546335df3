"""Conservative and progressive domination-count bounds for similarity
queries (threshold kNN / reverse-kNN, inverse ranking, expected rank) over
uncertain rectangular objects, with an exact possible-worlds oracle."""

from .geometry import (
    Interval,
    Rect,
    dominates_minmax,
    dominates_optimal,
    max_dist_1d,
    min_dist_1d,
    rect_max_dist,
    rect_min_dist,
)
from .model import (
    DatasetError,
    DecompositionTree,
    Partition,
    UncertainObject,
    UnsplittableNode,
    build_object,
    generate_synthetic,
    leaves_at_depth,
    load_dataset,
    save_dataset_jsonl,
    split,
)
from .domination import DominationClassification, ProbBounds, classify, pdom_bounds
from .genfunc import (
    BernoulliBounds,
    DomCountDistribution,
    UGFPoly,
    extract_bounds,
    gf_bounds_plain,
    gf_exact,
    shift_right,
    ugf_expand,
    weighted_mix,
)
from .idca import (
    AllOf,
    AnyOf,
    IdcaResult,
    MaxDepth,
    PredicateDecided,
    StopCriterion,
    UncertaintyBelow,
    idca,
    uncertainty,
)
from .oracle import ExactPdf, WorldBudgetError, enumerate_exact, mc_baseline
from .queries import (
    QueryAnswer,
    QueryPredicate,
    RankDistribution,
    expected_rank,
    expected_rank_interval,
    inverse_ranking,
    knn_probability_bounds,
    pknn_query,
    prknn_query,
)

__version__ = "0.1.0"
