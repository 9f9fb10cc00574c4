"""Clustering run pipeline: methods, repeats, metrics and output files."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from pydantic import BaseModel, Field

from src.adapters import outputs
from src.baselines.fcm import fcm_fit, fcm_lcc_fit
from src.baselines.kmeans import kmeans_fit
from src.core.config import settings
from src.core.models import Dataset, GpacConfig, Method, TraceRecord
from src.core.validation import validate_config
from src.gpac.optimizer import GpacGraphs, build_graphs, fit
from src.graph.knn import KnnGraph, build_knn_graph, save_edge_list
from src.metrics.clustering import ClusteringScores, evaluate

logger = structlog.get_logger()

GRAPH_FILE = "graph.txt"


class ClusterOptions(BaseModel):
    """Everything a clustering run needs besides the data."""

    method: Method = Method.GPAC
    config: GpacConfig
    repeats: int = Field(default=1, ge=1)
    out_dir: Path | None = None
    timings: bool = True
    save_graph: bool = False


class MetricSummary(BaseModel):
    mean: float
    std: float | None = None


class TimingSummary(BaseModel):
    graph_ms: float = 0.0
    optimize_ms: float = 0.0
    total_ms: float = 0.0


class RunSummary(BaseModel):
    """One repeat of a run."""

    repeat: int
    seed: int
    scores: ClusteringScores | None = None
    epochs: int = 0
    timings: TimingSummary = Field(default_factory=TimingSummary)
    trace: list[TraceRecord] = Field(default_factory=list)


class RunReport(BaseModel):
    """Aggregate of all repeats, written as ``report.json``."""

    method: Method
    dataset: str
    n: int
    d: int
    config: dict[str, Any]
    repeats: int
    metrics: dict[str, MetricSummary] | None = None
    timings: TimingSummary = Field(default_factory=TimingSummary)
    runs: list[RunSummary] = Field(default_factory=list)


@dataclass(eq=False)
class RepeatOutput:
    summary: RunSummary
    labels: np.ndarray
    probs: np.ndarray | None = None


def _summarize(values: list[float]) -> MetricSummary:
    array = np.asarray(values, dtype=np.float64)
    return MetricSummary(
        mean=float(array.mean()),
        std=float(array.std(ddof=0)) if array.size >= 2 else None,
    )


def _gpac_repeat(
    data: Dataset, config: GpacConfig, graphs: GpacGraphs, graph_ms: float
) -> tuple[np.ndarray, np.ndarray, list[TraceRecord], TimingSummary]:
    start = time.perf_counter()
    result = fit(data, config, graphs=graphs)
    timings = TimingSummary(
        graph_ms=graph_ms,
        optimize_ms=result.timings.optimize_ms,
        total_ms=graph_ms + (time.perf_counter() - start) * 1000,
    )
    return result.prediction.labels, result.partition.probs, result.trace, timings


class ClusterRunner:
    """Runs one method on one dataset for every requested seed."""

    def __init__(self, data: Dataset, options: ClusterOptions) -> None:
        self.data = data
        self.options = options
        self.config = validate_config(options.config, data)
        self._graphs: GpacGraphs | None = None
        self._knn: KnnGraph | None = None
        self._graph_ms = 0.0

    def _prepare_graph(self) -> None:
        method = self.options.method
        start = time.perf_counter()
        if method == Method.GPAC:
            self._graphs = build_graphs(self.data, self.config)
            self._knn = self._graphs.knn
        elif method == Method.FCM_LCC:
            self._knn = build_knn_graph(self.data, self.config.k, self.config.sigma)
        self._graph_ms = (time.perf_counter() - start) * 1000

    def _run_repeat(self, repeat: int) -> RepeatOutput:
        seed = self.config.seed + repeat
        config = self.config.model_copy(update={"seed": seed})
        method = self.options.method
        start = time.perf_counter()
        probs: np.ndarray | None = None
        trace: list[TraceRecord] = []

        if method == Method.GPAC:
            assert self._graphs is not None
            labels, probs, trace, timings = _gpac_repeat(
                self.data, config, self._graphs, self._graph_ms
            )
        else:
            if method == Method.KMEANS:
                labels = kmeans_fit(self.data, config.c, seed).assignment.labels
            elif method == Method.FCM:
                fcm = fcm_fit(self.data, config.c, config.m, seed)
                labels, probs = fcm.partition.argmax().labels, fcm.partition.probs
            else:
                assert self._knn is not None
                fcm = fcm_lcc_fit(self.data, config.c, config.m, config.beta_max, self._knn, seed)
                labels, probs = fcm.partition.argmax().labels, fcm.partition.probs
            optimize_ms = (time.perf_counter() - start) * 1000
            timings = TimingSummary(
                graph_ms=self._graph_ms,
                optimize_ms=optimize_ms,
                total_ms=self._graph_ms + optimize_ms,
            )

        if not self.options.timings:
            timings = TimingSummary()
            trace = [record.model_copy(update={"elapsed_ms": 0.0}) for record in trace]

        scores = None
        if self.data.labels is not None:
            scores = evaluate(labels, self.data.labels)

        logger.info(
            "Repeat finished",
            method=method.value,
            repeat=repeat,
            seed=seed,
            acc=scores.acc if scores else None,
        )
        summary = RunSummary(
            repeat=repeat,
            seed=seed,
            scores=scores,
            epochs=len(trace),
            timings=timings,
            trace=trace,
        )
        return RepeatOutput(summary=summary, labels=labels, probs=probs)

    def run(self) -> RunReport:
        self._prepare_graph()
        repeats = self.options.repeats
        workers = max(1, min(settings.threads, repeats))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(self._run_repeat, range(repeats)))

        report = self._report([r.summary for r in results])
        if self.options.out_dir is not None:
            self._write(self.options.out_dir, results, report)
        return report

    def _report(self, runs: list[RunSummary]) -> RunReport:
        metrics = None
        scored = [run.scores for run in runs if run.scores is not None]
        if scored:
            metrics = {
                name: _summarize([getattr(s, name) for s in scored])
                for name in ("nmi", "acc", "ari")
            }
        timings = TimingSummary(
            graph_ms=self._graph_ms if self.options.timings else 0.0,
            optimize_ms=float(sum(run.timings.optimize_ms for run in runs)),
            total_ms=float(sum(run.timings.total_ms for run in runs)),
        )
        return RunReport(
            method=self.options.method,
            dataset=self.data.name,
            n=self.data.n,
            d=self.data.d,
            config=self.config.model_dump(mode="json"),
            repeats=len(runs),
            metrics=metrics,
            timings=timings,
            runs=runs,
        )

    def _write(self, out_dir: Path, results: list[RepeatOutput], report: RunReport) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for result in results:
            run_dir = out_dir / f"run_{result.summary.repeat}"
            run_dir.mkdir(exist_ok=True)
            outputs.write_labels(run_dir / outputs.LABELS_FILE, result.labels)
            if result.probs is not None:
                outputs.write_probs(run_dir / outputs.PROBS_FILE, result.probs)
            if self.options.method == Method.GPAC:
                outputs.write_trace(run_dir / outputs.TRACE_FILE, result.summary.trace)
        if self.options.save_graph and self._knn is not None:
            save_edge_list(self._knn, out_dir / GRAPH_FILE)
        outputs.write_report(out_dir / outputs.REPORT_FILE, report)


def run_cluster(data: Dataset, options: ClusterOptions) -> RunReport:
    """Run ``options.method`` for ``options.repeats`` seeds and write the outputs."""
    logger.info(
        "Starting clustering run",
        method=options.method.value,
        dataset=data.name,
        n=data.n,
        repeats=options.repeats,
    )
    return ClusterRunner(data, options).run()
