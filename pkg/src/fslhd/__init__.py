"""Flexible sliced Latin hypercube designs: construction, criteria and optimizers."""

from .construction import SliceAssignment, assign_slices, column_from_orders, generate_level_matrix, random_designs
from .criteria import (
    CriterionConfig,
    CriterionValue,
    DegenerateDesignError,
    DistanceCache,
    apply_different_slice_update,
    apply_out_slice_update,
    apply_within_slice_update,
    cd2,
    csm,
    csm_points,
    min_intersite_distance,
    phi_t,
)
from .design import (
    DesignMatrix,
    LevelMatrix,
    SliceSpec,
    StructureError,
    midpoints,
    slice_of_row,
    structure_violations,
    to_design,
    validate_sliced_structure,
)
from .neighborhood import (
    ExchangeMove,
    TauSet,
    apply_move,
    count_neighbors,
    different_slice_neighbor,
    out_slice_neighbor,
    revert_move,
    tau_candidates,
    within_slice_neighbor,
)
from .sese import OptimizerTrace, SeseParams, TraceRecord, derive_inner_budgets, inner_budgets, sese_optimize, update_threshold
from .twopart import TwoPartResult, part1, part2, repeating_count, should_skip_part2, twopart_optimize

__version__ = "0.1.0"
