"""Redistributive impact of internal migration from zone-level flow data.

Submodules:
 - :mod:`.data`: zones, flows (matrix or marginals), contiguity graphs
 - :mod:`.indices`: CMI, MEI, ANMR and zone net migration rates
 - :mod:`.aggregation`: random contiguous aggregation and scale profiles
 - :mod:`.impact`: INMI, its C/R decomposition, k-means in (C, R) space
 - :mod:`.regression`: weighted density regression, regimes, z-scores
 - :mod:`.synthetic`: grid systems for tests and demos
"""
from .aggregation import (
    CourgeauFit,
    Partition,
    ScalePoint,
    ScaleProfile,
    aggregate_system,
    default_ladder,
    fit_cmi_slope,
    mean_mei,
    random_contiguous_partition,
    scale_ladder,
    scale_profile,
)
from .data import (
    AdjacencyGraph,
    FullMatrix,
    MarginalsOnly,
    MigrationSystem,
    Zone,
    ZoneSet,
    densities,
    load_adjacency,
    load_system,
    make_system,
    save_system,
)
from .errors import (
    DegenerateDesignError,
    DegenerateSpreadError,
    MigImpactError,
    UndefinedIndexError,
    ValidationError,
)
from .impact import (
    Benchmark,
    ClusterResult,
    CountrySummary,
    INMIResult,
    compute_inmi,
    evaluate_k,
    kmeans_cluster,
    seed_stability,
)
from .indices import (
    NetMigrationRates,
    SystemIndices,
    aggregate_net_migration_rate,
    crude_migration_intensity,
    migration_effectiveness_index,
    net_migration_rates,
    system_indices,
)
from .regression import (
    DensityRegressionResult,
    RedistributionRegime,
    WeightedOLSFit,
    ZScoreTable,
    classify_redistribution,
    density_regression,
    time_series_slopes,
    weighted_ols,
    zscore_table,
)

__version__ = "0.1.0"
