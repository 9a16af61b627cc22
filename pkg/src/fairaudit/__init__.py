"""Fairness auditing over classifier decision tables.

The package turns a CSV of decisions into group and individual fairness
measurements, simulates or elicits auditor judgments under a tolerance
threshold, learns models of each auditor's intrinsic rule, transfers
fairness guarantees between the audited system and those rules, computes
PAC sample budgets, and hosts live audit sessions over HTTP.
"""

from .assessment import (
    AssessmentRule,
    BUILTIN_RULES,
    DistanceProfile,
    EpsilonFit,
    Judgment,
    TransferBound,
    bound_group,
    bound_individual_fair,
    bound_individual_unfair,
    estimate_epsilon,
    estimate_lipschitz,
    fit_epsilon_threshold,
    judge,
    load_rule,
    parse_rule,
    profile_distances,
    simulate_judgments,
)
from .datasets import (
    BUILTIN_RECIPES,
    DataError,
    DataTable,
    FeatureKind,
    LoadReport,
    RecipeError,
    Row,
    Schema,
    apply_recipe,
    decode_one_hot,
    load_csv,
    load_prepared,
    load_recipe,
    one_hot_encode,
    parse_recipe,
    split_subsets,
)
from .distances import absolute_distance, discrete_distance, resolve_metric
from .group_metrics import (
    CALIBRATION,
    EQUAL_OPPORTUNITY,
    FairnessReport,
    NOTIONS,
    STATISTICAL_PARITY,
    all_reports,
    calibration_diff,
    equal_opportunity_diff,
    statistical_parity_diff,
    sweep_delta,
    tally_groups,
)
from .learning import (
    FAMILIES,
    FAMILY_LOGISTIC,
    FAMILY_SVM,
    FAMILY_TREE,
    PacBudget,
    TrainConfig,
    evaluate_accuracy,
    finite_class,
    fit_all_auditors,
    load_defaults,
    model_from_text,
    model_to_text,
    notion_preference,
    pac_component_bound,
    pac_joint_budget,
    train_linear_svm,
    train_logistic,
    train_tree,
    vc_class,
)
from .similarity import (
    ClusterIndex,
    CovarianceModel,
    IndividualFairnessReport,
    build_clusters,
    cluster_with_config,
    fit_covariance,
    individual_fairness_check,
    load_cluster_config,
    mahalanobis,
    pairwise_mahalanobis,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
