"""Random recursive constructions on [0, 1] and their fractal dimensions."""

from .addressing import Address, ROOT, concat, is_antichain, is_prefix, prefix
from .construction import (
    Cell,
    ModelSpec,
    OffspringDraw,
    OrbitResult,
    OscReport,
    RatioLaw,
    Realization,
    RealizationStats,
    SimilarityMap,
    derive_seed,
    level_union,
    neighborhood_bound_probe,
    orbit,
    realization_export,
    sample_realization,
    sample_surviving,
    sampler_statistic_distribution,
    stopping_set,
    validate_osc,
)
from .dimension import (
    AlphaSolution,
    AntichainMomentReport,
    CurveValue,
    DimensionEstimate,
    ExpectedSumCurve,
    antichain_moment_test,
    curve_for_model,
    estimate_box_dimension,
    estimate_gamma_sup,
    estimate_orbit_dimension,
    estimate_set_dimension,
    eval_mink,
    eval_packsim,
    expected_sum_ratios,
    finite_coincidence_check,
    make_scale_grid,
    solve_alpha,
    x_independence_check,
)
from .geometry import (
    EMPTY,
    CompactSet,
    count_table,
    covering_number,
    from_points,
    hausdorff_distance,
    normalize,
    packing_number,
    table_to_csv,
)
from .models import (
    cantor,
    example1,
    example2,
    example2_deep,
    get_model,
    homogeneous_random,
    orbit_set,
    vn_example1,
    vn_example2,
)

__version__ = "0.1.0"
