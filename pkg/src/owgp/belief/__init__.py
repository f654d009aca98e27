from .distributions import (
    BeliefError,
    ColorDistribution,
    PoseDistribution,
    TypeDistribution,
    WeightDistribution,
    cov_dominates,
    is_psd,
)
from .fluents import gaussian_quantity, holds_bool_fluent, holds_cont_fluent
from .relations import prob_ground_relation, top_color
from .state import (
    DEFAULT_COLORS,
    BeliefState,
    ColorBox,
    ObjectBelief,
    ObservationNoiseModel,
    Vocabulary,
    anchor_kind,
    anchor_sort_key,
)
from .updates import (
    Detection,
    associate_detection,
    exists_in_region_prob,
    update_color,
    update_pose,
    update_region_confidence,
    update_type,
    update_weight,
)

__all__ = [
    "BeliefError", "ColorDistribution", "PoseDistribution", "TypeDistribution",
    "WeightDistribution", "cov_dominates", "is_psd", "gaussian_quantity",
    "holds_bool_fluent", "holds_cont_fluent", "prob_ground_relation", "top_color",
    "DEFAULT_COLORS", "BeliefState", "ColorBox", "ObjectBelief", "ObservationNoiseModel",
    "Vocabulary", "anchor_kind", "anchor_sort_key", "Detection", "associate_detection",
    "exists_in_region_prob", "update_color", "update_pose", "update_region_confidence",
    "update_type", "update_weight",
]
