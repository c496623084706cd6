"""Ancestry-weighted merger model and genealogy analyses."""

from ._mna import (
    RNG_ALGORITHM,
    DataError,
    ModelParams,
    __version__,
    ancestry_count,
    ancestry_distribution,
    ancestry_table,
    derive_seed,
    market_share_percentiles,
    merger_probability,
    organic_growth,
    rank_merger_forecast,
    read_events,
    read_result,
    run_cli,
    run_ensemble,
    simulate,
    zipf_series,
    zipf_slope,
)

__all__ = [
    "RNG_ALGORITHM",
    "DataError",
    "ModelParams",
    "__version__",
    "ancestry_count",
    "ancestry_distribution",
    "ancestry_table",
    "derive_seed",
    "market_share_percentiles",
    "merger_probability",
    "organic_growth",
    "rank_merger_forecast",
    "read_events",
    "read_result",
    "run_cli",
    "run_ensemble",
    "simulate",
    "zipf_series",
    "zipf_slope",
]
