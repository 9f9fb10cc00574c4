"""GPAC optimizer: initialisation, mini-batch epochs and the outer fit loop."""

import time
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
import structlog

from src.baselines.kmeans import kmeans_fit
from src.core.config import settings
from src.core.exceptions import NumericalError
from src.core.jit import compiled
from src.core.models import (
    Dataset,
    FuzzyPartition,
    GpacConfig,
    HardPartition,
    InitMode,
    Timings,
    TraceRecord,
)
from src.core.validation import validate_config
from src.gpac.kernels import sweep_batch
from src.gpac.objective import objective_value
from src.graph.adjacency import AdjacencyIndicator, default_theta, expand_adjacency
from src.graph.knn import KnnGraph, build_knn_graph

logger = structlog.get_logger()

# Independent random streams derived from the configured seed
_EPOCH_STREAM = 1
_TRACE_STREAM = 2


@dataclass(frozen=True, eq=False)
class GpacGraphs:
    """Similarity graph W and expanded adjacency indicator for one dataset."""

    knn: KnnGraph
    adjacency: AdjacencyIndicator

    @property
    def theta(self) -> int:
        return self.adjacency.theta


def build_graphs(data: Dataset, config: GpacConfig) -> GpacGraphs:
    knn = build_knn_graph(data, config.k, config.sigma)
    theta = config.theta_override or default_theta(data.n, config.c, config.k)
    return GpacGraphs(knn=knn, adjacency=expand_adjacency(knn, theta))


@dataclass(frozen=True, eq=False)
class AggregateState:
    """Column sums of P and of the one-hot V."""

    p_tilde: np.ndarray
    v_tilde: np.ndarray
    epoch: int
    beta_current: float

    @classmethod
    def from_arrays(
        cls, probs: np.ndarray, labels: np.ndarray, epoch: int, beta: float
    ) -> "AggregateState":
        c = probs.shape[1]
        return cls(
            p_tilde=probs.sum(axis=0),
            v_tilde=np.bincount(labels, minlength=c).astype(np.float64),
            epoch=epoch,
            beta_current=beta,
        )


@dataclass(eq=False)
class GpacState:
    """Working arrays of one optimisation run.

    ``epoch`` counts completed epochs. ``aggregates`` are the sums maintained
    incrementally by the last sweep.
    """

    probs: np.ndarray
    labels: np.ndarray
    rng: np.random.Generator
    aggregates: AggregateState
    epoch: int = 0

    @classmethod
    def initial(
        cls, partition: FuzzyPartition, assignment: HardPartition, seed: int
    ) -> "GpacState":
        probs = np.array(partition.probs, dtype=np.float64)
        labels = np.array(assignment.labels, dtype=np.int64)
        return cls(
            probs=probs,
            labels=labels,
            rng=np.random.default_rng((seed, _EPOCH_STREAM)),
            aggregates=AggregateState.from_arrays(probs, labels, epoch=0, beta=0.0),
        )

    @property
    def c(self) -> int:
        return int(self.probs.shape[1])

    def partition(self) -> FuzzyPartition:
        return FuzzyPartition(probs=self.probs)

    def assignment(self) -> HardPartition:
        return HardPartition(labels=self.labels, c=self.c)


@dataclass(frozen=True, eq=False)
class GpacResult:
    partition: FuzzyPartition
    assignment: HardPartition
    prediction: HardPartition
    trace: list[TraceRecord] = field(default_factory=list)
    timings: Timings = field(default_factory=Timings)
    theta: int = 1

    @property
    def epochs(self) -> int:
        return len(self.trace)


def init_partitions(data: Dataset, config: GpacConfig) -> tuple[FuzzyPartition, HardPartition]:
    """Uniform P and a seeded initial V."""
    n, c = data.n, config.c
    partition = FuzzyPartition(probs=np.full((n, c), 1.0 / c))

    if config.init_mode == InitMode.KMEANSPP:
        assignment = kmeans_fit(data, c, config.seed, max_iters=0).assignment
    elif config.init_mode == InitMode.RANDOM:
        rng = np.random.default_rng(config.seed)
        assignment = HardPartition(labels=rng.integers(0, c, size=n), c=c)
    else:
        assignment = HardPartition(labels=np.zeros(n, dtype=np.int64), c=c)

    return partition, assignment


def batch_partition(n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffle 0..n-1 and cut it into ceil(n / batch_size) disjoint batches."""
    order = rng.permutation(n)
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]


def run_epoch(
    state: GpacState,
    data: Dataset,
    graphs: GpacGraphs,
    config: GpacConfig,
    score_log: list[tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None,
) -> tuple[GpacState, int]:
    """One pass over every sample, batch by batch.

    Aggregates are recomputed from scratch at the start of each batch; within
    a batch samples are updated sequentially in the shuffled order. When
    ``score_log`` is given, one ``(batch, s_p, s_v)`` entry per batch is
    appended holding the unguarded scores of each sample at its update.
    """
    n = data.n
    beta = config.beta_at(state.epoch)
    probs = state.probs.copy()
    labels = state.labels.copy()

    w = graphs.knn.adjacency
    w_indptr = w.indptr.astype(np.int64)
    w_indices = w.indices.astype(np.int64)
    w_data = w.data.astype(np.float64)
    sweep = compiled(sweep_batch)

    in_batch = np.zeros(n, dtype=np.bool_)
    no_log = np.empty((0, config.c))
    aggregates = state.aggregates
    changed = 0
    for batch in batch_partition(n, config.batch_size, state.rng):
        aggregates = AggregateState.from_arrays(probs, labels, epoch=state.epoch, beta=beta)
        in_batch[batch] = True
        if score_log is None:
            s_p_log = s_v_log = no_log
        else:
            s_p_log = np.empty((batch.size, config.c))
            s_v_log = np.empty((batch.size, config.c))
            score_log.append((batch.copy(), s_p_log, s_v_log))
        changed += sweep(
            batch.astype(np.int64),
            in_batch,
            graphs.adjacency.indptr,
            graphs.adjacency.indices,
            w_indptr,
            w_indices,
            w_data,
            graphs.knn.degrees,
            probs,
            labels,
            aggregates.p_tilde,
            aggregates.v_tilde,
            float(config.alpha),
            float(config.m),
            float(beta),
            bool(config.use_hard_assignment),
            s_p_log,
            s_v_log,
        )
        in_batch[batch] = False

    if not np.all(np.isfinite(probs)):
        raise NumericalError(f"non-finite membership after epoch {state.epoch}")

    updated = GpacState(
        probs=probs,
        labels=labels,
        rng=state.rng,
        aggregates=aggregates,
        epoch=state.epoch + 1,
    )
    return updated, int(changed)


def _trace_rows(n: int, seed: int) -> np.ndarray | None:
    if n <= settings.trace_exact_limit:
        return None
    rng = np.random.default_rng((seed, _TRACE_STREAM))
    size = min(settings.trace_sample_size, n)
    return np.sort(rng.choice(n, size=size, replace=False))


def fit(
    data: Dataset,
    config: GpacConfig,
    on_epoch: Callable[[TraceRecord, GpacState], None] | None = None,
    graphs: GpacGraphs | None = None,
) -> GpacResult:
    """Build the graphs (unless given), initialise and run epochs to convergence.

    Convergence is declared when the fraction of changed hard labels drops
    below ``convergence_tol``, once beta has reached ``beta_max``. Epochs
    inside the beta ramp never stop the fit, even with no label changes,
    so ``beta_ramp_epochs=0`` is needed to allow stopping after the first
    epoch.

    A final partition with an empty or all-absorbing cluster is returned as
    is, with a warning.
    """
    config = validate_config(config, data)
    start = time.perf_counter()
    timings = Timings()

    if graphs is None:
        graphs = build_graphs(data, config)
        timings.graph_ms = (time.perf_counter() - start) * 1000

    partition, assignment = init_partitions(data, config)
    state = GpacState.initial(partition, assignment, config.seed)
    sample_rows = _trace_rows(data.n, config.seed)

    logger.info(
        "Starting GPAC fit",
        dataset=data.name,
        n=data.n,
        c=config.c,
        theta=graphs.theta,
        batch_size=config.batch_size,
        max_epochs=config.max_epochs,
    )

    trace: list[TraceRecord] = []
    for epoch in range(config.max_epochs):
        epoch_start = time.perf_counter()
        state, changed = run_epoch(state, data, graphs, config)
        elapsed_ms = (time.perf_counter() - epoch_start) * 1000
        timings.optimize_ms += elapsed_ms

        record = TraceRecord(
            epoch=epoch,
            objective=objective_value(
                state.partition(),
                state.assignment(),
                graphs.adjacency,
                config.alpha,
                config.m,
                sample_rows,
            ),
            labels_changed=changed,
            beta=state.aggregates.beta_current,
            elapsed_ms=elapsed_ms,
        )
        trace.append(record)
        logger.debug(
            "Epoch complete",
            epoch=epoch,
            labels_changed=changed,
            beta=record.beta,
            objective=record.objective,
        )
        if on_epoch is not None:
            on_epoch(record, state)

        ramp_done = config.beta_max == 0.0 or epoch >= config.beta_ramp_epochs
        if ramp_done and changed / data.n < config.convergence_tol:
            break

    timings.total_ms = (time.perf_counter() - start) * 1000
    final = state.partition()
    if not final.is_feasible:
        logger.warning(
            "Fuzzy partition has a degenerate cluster",
            dataset=data.name,
            column_sums=final.column_sums().round(6).tolist(),
        )
    logger.info(
        "GPAC fit complete",
        dataset=data.name,
        epochs=len(trace),
        optimize_ms=round(timings.optimize_ms, 3),
    )
    return GpacResult(
        partition=final,
        assignment=state.assignment(),
        prediction=final.argmax(),
        trace=trace,
        timings=timings,
        theta=graphs.theta,
    )
