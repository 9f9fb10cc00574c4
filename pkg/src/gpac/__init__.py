"""Graph probability aggregation clustering."""

from src.gpac.optimizer import (
    AggregateState,
    GpacGraphs,
    GpacResult,
    GpacState,
    batch_partition,
    build_graphs,
    fit,
    init_partitions,
    run_epoch,
)

__all__ = [
    "AggregateState",
    "GpacGraphs",
    "GpacResult",
    "GpacState",
    "batch_partition",
    "build_graphs",
    "fit",
    "init_partitions",
    "run_epoch",
]
