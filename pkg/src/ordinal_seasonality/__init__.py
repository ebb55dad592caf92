"""Day-of-the-week seasonality detection via ordinal-pattern statistics."""

from .errors import (
    DegenerateFrequencyError,
    DegenerateSeriesError,
    InvalidInputError,
    OrderError,
    OrdinalSeasonalityError,
    RejectedRowError,
    SchemaError,
)
from .fgn import (
    EnsembleConfig,
    FgnConfig,
    SimulationReport,
    fbm_from_fgn,
    fgn_autocovariance,
    fgn_generate,
    first_differences,
    run_ensemble,
)
from .hurst import HurstEstimate, HurstMethod, estimate_hurst
from .ingest import (
    ReturnSeries,
    SubperiodSpec,
    calendar_weeks,
    load_csv,
    log_returns,
    shuffle_series,
    split_subperiods,
)
from .patterns import (
    OrdinalPattern,
    PatternDistribution,
    PatternFamily,
    TieRule,
    all_patterns,
    count_patterns,
    count_windows,
    encode_window,
    pattern_family,
    rank_pattern,
    unrank_pattern,
    window_has_ties,
)
from .stats import (
    BinomialTestInput,
    PositionMatrix,
    TestOutcome,
    binomial_test,
    binomial_z,
    chi2_sf,
    chi2_statistic,
    normal_sf,
    position_matrix,
    test_h1_pattern_uniformity,
    test_h2_day_rows,
    test_h3_position_columns,
    test_h4_monday_largest,
    test_h5_monday_worst_friday_best,
)

__version__ = "0.1.0"

__all__ = [
    "BinomialTestInput",
    "DegenerateFrequencyError",
    "DegenerateSeriesError",
    "EnsembleConfig",
    "FgnConfig",
    "HurstEstimate",
    "HurstMethod",
    "InvalidInputError",
    "OrderError",
    "OrdinalPattern",
    "OrdinalSeasonalityError",
    "PatternDistribution",
    "PatternFamily",
    "PositionMatrix",
    "RejectedRowError",
    "ReturnSeries",
    "SchemaError",
    "SimulationReport",
    "SubperiodSpec",
    "TestOutcome",
    "TieRule",
    "all_patterns",
    "binomial_test",
    "binomial_z",
    "calendar_weeks",
    "chi2_sf",
    "chi2_statistic",
    "count_patterns",
    "count_windows",
    "encode_window",
    "estimate_hurst",
    "fbm_from_fgn",
    "fgn_autocovariance",
    "fgn_generate",
    "first_differences",
    "load_csv",
    "log_returns",
    "normal_sf",
    "pattern_family",
    "position_matrix",
    "rank_pattern",
    "run_ensemble",
    "shuffle_series",
    "split_subperiods",
    "test_h1_pattern_uniformity",
    "test_h2_day_rows",
    "test_h3_position_columns",
    "test_h4_monday_largest",
    "test_h5_monday_worst_friday_best",
    "unrank_pattern",
    "window_has_ties",
]
