"""Link-prediction recommender for C2C commercial networks.

Pipeline: SimRank similar users -> candidate sellers -> category, reputation
and rating scores -> weighted fusion -> one item per seller. The
``evaluation`` module runs the k-fold precision/recall/F-measure protocol.
"""
from .config import ConfigError, RunConfig
from .evaluation import (
    EvaluationReport,
    ExperimentReport,
    FoldPlan,
    MetricPoint,
    evaluate_item_level,
    evaluate_user_level,
    make_folds,
    run_experiment,
    sample_targets,
)
from .graph import (
    CommercialGraph,
    RatingVector,
    RowError,
    SchemaError,
    Transaction,
    build_graph,
    graph_stats,
    ingest_csv,
    parse_csv,
    write_csv,
)
from .items import (
    AssociationRule,
    Recommendation,
    build_recommendations,
    mine_rules,
    select_best_selling,
    select_by_rules,
    select_random,
    seller_inventory,
)
from .scoring import (
    CategoryProfile,
    ScoredCandidate,
    category_profile,
    category_score,
    category_weight,
    cold_start_candidates,
    local_category_importance,
    normalize_scores,
    rank_candidates,
    rating_score,
    reputation_score,
    total_score,
)
from .similarity import (
    CandidateSet,
    SimilarityTable,
    candidate_sellers,
    compute_simrank,
    top_n_similar,
)
from .synthetic import GeneratorSpec, generate_synthetic

__version__ = "0.1.0"
