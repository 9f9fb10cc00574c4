"""Experiment suites: ablations, parameter sweeps and runtime scaling."""

import csv
import time
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import structlog

from src.baselines.fcm import fcm_fit, fcm_lcc_fit
from src.core.exceptions import ConfigError
from src.core.models import Dataset, GpacConfig, InitMode, TraceRecord
from src.core.validation import validate_config
from src.gpac.optimizer import GpacGraphs, GpacState, build_graphs, fit
from src.metrics.clustering import ClusteringScores, evaluate

logger = structlog.get_logger()

CSV_COLUMNS = ("variant", "value", "repeat", "nmi", "acc", "ari", "time_ms")


class Suite(str, Enum):
    """Available experiment suites."""

    LCC_ABLATION = "lcc-ablation"
    BATCH_SWEEP = "batch-sweep"
    INIT_SWEEP = "init-sweep"
    M_SWEEP = "m-sweep"
    K_SWEEP = "k-sweep"
    SCALING = "scaling"
    HARD_ABLATION = "hard-ablation"
    ALPHA_SWEEP = "alpha-sweep"
    BETA_SWEEP = "beta-sweep"


@dataclass
class ExperimentGrid:
    """Parameter grids of the sweeps."""

    # (1, 1.5] in steps of 0.05
    m_values: list[float] = field(
        default_factory=lambda: [round(1.0 + 0.05 * step, 2) for step in range(1, 11)]
    )
    k_values: list[int] = field(default_factory=lambda: [5, 10, 20, 40, 80, 160, 320])

    # Full batch is always appended
    batch_sizes: list[int] = field(default_factory=lambda: [64, 128, 256, 512, 1024])

    alpha_values: list[float] = field(default_factory=lambda: [0.1, 0.25, 0.5, 1.0, 2.0, 4.0])
    beta_values: list[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 9.0])

    # Nested subsets; sizes above n are skipped
    scaling_sizes: list[int] = field(default_factory=lambda: [5000, 10000, 20000, 40000])
    scaling_epochs: int = 10


@dataclass
class ExperimentRow:
    variant: str
    value: str
    repeat: int
    nmi: float
    acc: float
    ari: float
    time_ms: float

    @classmethod
    def from_scores(
        cls, variant: str, value: object, repeat: int, scores: ClusteringScores, time_ms: float
    ) -> "ExperimentRow":
        return cls(
            variant=variant,
            value=str(value),
            repeat=repeat,
            nmi=scores.nmi,
            acc=scores.acc,
            ari=scores.ari,
            time_ms=time_ms,
        )

    def as_csv(self) -> list[str]:
        return [
            self.variant,
            self.value,
            str(self.repeat),
            f"{self.nmi:.17g}",
            f"{self.acc:.17g}",
            f"{self.ari:.17g}",
            f"{self.time_ms:.3f}",
        ]


class ExperimentRunner:
    """Runs one suite over ``repeats`` seeds on a labelled dataset."""

    def __init__(
        self,
        data: Dataset,
        config: GpacConfig,
        repeats: int = 1,
        grid: ExperimentGrid | None = None,
        timings: bool = True,
    ) -> None:
        if data.labels is None:
            raise ConfigError("experiments need ground-truth labels")
        if repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {repeats}")
        self.data = data
        self.config = validate_config(config, data)
        self.repeats = repeats
        self.grid = grid or ExperimentGrid()
        self.timings = timings
        self._graphs: dict[int, GpacGraphs] = {}

    def _seeded(self, config: GpacConfig, repeat: int) -> GpacConfig:
        return config.model_copy(update={"seed": self.config.seed + repeat})

    def _graphs_for(self, config: GpacConfig) -> GpacGraphs:
        if config.k not in self._graphs:
            self._graphs[config.k] = build_graphs(self.data, config)
        return self._graphs[config.k]

    def _time(self, ms: float) -> float:
        return ms if self.timings else 0.0

    def _gpac_row(self, variant: str, value: object, repeat: int, **update: object) -> ExperimentRow:
        config = self._seeded(self.config.model_copy(update=update), repeat)
        config = validate_config(config, self.data)
        result = fit(self.data, config, graphs=self._graphs_for(config))
        scores = evaluate(result.prediction.labels, self.data.labels)
        return ExperimentRow.from_scores(
            variant, value, repeat, scores, self._time(result.timings.optimize_ms)
        )

    def _fcm_row(
        self, variant: str, value: object, repeat: int, m: float, beta: float | None = None
    ) -> ExperimentRow:
        seed = self.config.seed + repeat
        start = time.perf_counter()
        if beta is None:
            result = fcm_fit(self.data, self.config.c, m, seed)
        else:
            knn = self._graphs_for(self.config).knn
            result = fcm_lcc_fit(self.data, self.config.c, m, beta, knn, seed)
        elapsed_ms = (time.perf_counter() - start) * 1000
        scores = evaluate(result.partition.argmax().labels, self.data.labels)
        return ExperimentRow.from_scores(variant, value, repeat, scores, self._time(elapsed_ms))

    def lcc_ablation(self, repeat: int) -> Iterator[ExperimentRow]:
        beta = self.config.beta_max
        yield self._gpac_row("gpac", beta, repeat)
        yield self._gpac_row("gpac-no-lcc", 0.0, repeat, beta_max=0.0)
        yield self._fcm_row("fcm", 0.0, repeat, self.config.m)
        yield self._fcm_row("fcm-lcc", beta, repeat, self.config.m, beta=beta)

    def batch_sweep(self, repeat: int) -> Iterator[ExperimentRow]:
        n = self.data.n
        sizes = sorted({size for size in self.grid.batch_sizes if size < n} | {n})
        for size in sizes:
            yield self._gpac_row("lcc", size, repeat, batch_size=size)
            yield self._gpac_row("no-lcc", size, repeat, batch_size=size, beta_max=0.0)

    def init_sweep(self, repeat: int) -> Iterator[ExperimentRow]:
        for mode in InitMode:
            yield self._gpac_row("gpac", mode.value, repeat, init_mode=mode)

    def m_sweep(self, repeat: int) -> Iterator[ExperimentRow]:
        for m in self.grid.m_values:
            yield self._gpac_row("gpac", m, repeat, m=m)
            yield self._fcm_row("fcm", m, repeat, m)

    def k_sweep(self, repeat: int) -> Iterator[ExperimentRow]:
        for k in self.grid.k_values:
            if k >= self.data.n:
                logger.warning("Skipping grid point", suite=Suite.K_SWEEP.value, k=k, n=self.data.n)
                continue
            yield self._gpac_row("gpac", k, repeat, k=k)

    def alpha_sweep(self, repeat: int) -> Iterator[ExperimentRow]:
        for alpha in self.grid.alpha_values:
            yield self._gpac_row("gpac", alpha, repeat, alpha=alpha)

    def beta_sweep(self, repeat: int) -> Iterator[ExperimentRow]:
        for beta in self.grid.beta_values:
            yield self._gpac_row("gpac", beta, repeat, beta_max=beta)

    def hard_ablation(self, repeat: int) -> Iterator[ExperimentRow]:
        """Per-epoch scores with the hard assignment and with V = argmax(P)."""
        assert self.data.labels is not None
        labels = self.data.labels
        for variant, use_hard in (("with-v", True), ("without-v", False)):
            config = self._seeded(
                self.config.model_copy(update={"use_hard_assignment": use_hard}), repeat
            )
            rows: list[ExperimentRow] = []
            elapsed = 0.0

            def record(trace: TraceRecord, state: GpacState, variant: str = variant) -> None:
                nonlocal elapsed
                elapsed += trace.elapsed_ms
                scores = evaluate(np.argmax(state.probs, axis=1), labels)
                rows.append(
                    ExperimentRow.from_scores(
                        variant, trace.epoch + 1, repeat, scores, self._time(elapsed)
                    )
                )

            fit(self.data, config, on_epoch=record, graphs=self._graphs_for(config))
            yield from rows

    def scaling(self, repeat: int) -> Iterator[ExperimentRow]:
        """Optimizer time on nested random subsets with a fixed epoch count."""
        order = np.random.default_rng(self.config.seed).permutation(self.data.n)
        update = {"convergence_tol": 0.0, "max_epochs": self.grid.scaling_epochs}
        for size in self.grid.scaling_sizes:
            if size > self.data.n:
                logger.warning("Skipping grid point", suite=Suite.SCALING.value, n=size)
                continue
            subset = self.data.subset(np.sort(order[:size]), name=f"{self.data.name}-{size}")
            config = validate_config(
                self._seeded(self.config.model_copy(update=update), repeat), subset
            )
            result = fit(subset, config)
            assert subset.labels is not None
            scores = evaluate(result.prediction.labels, subset.labels)
            yield ExperimentRow.from_scores(
                "gpac", size, repeat, scores, self._time(result.timings.optimize_ms)
            )

    def suite(self, suite: Suite) -> Callable[[int], Iterator[ExperimentRow]]:
        return {
            Suite.LCC_ABLATION: self.lcc_ablation,
            Suite.BATCH_SWEEP: self.batch_sweep,
            Suite.INIT_SWEEP: self.init_sweep,
            Suite.M_SWEEP: self.m_sweep,
            Suite.K_SWEEP: self.k_sweep,
            Suite.SCALING: self.scaling,
            Suite.HARD_ABLATION: self.hard_ablation,
            Suite.ALPHA_SWEEP: self.alpha_sweep,
            Suite.BETA_SWEEP: self.beta_sweep,
        }[suite]

    def run(self, suite: Suite) -> list[ExperimentRow]:
        runner = self.suite(suite)
        rows: list[ExperimentRow] = []
        for repeat in range(self.repeats):
            for row in runner(repeat):
                logger.debug("Grid point", suite=suite.value, variant=row.variant, value=row.value)
                rows.append(row)
        logger.info("Suite finished", suite=suite.value, rows=len(rows), repeats=self.repeats)
        return rows


def write_rows(path: Path, rows: list[ExperimentRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(row.as_csv() for row in rows)


def run_experiment(
    suite: Suite | str,
    data: Dataset,
    config: GpacConfig,
    out_dir: Path,
    repeats: int = 1,
    grid: ExperimentGrid | None = None,
    timings: bool = True,
) -> Path:
    """Run a suite and write ``<out_dir>/<suite>.csv``."""
    try:
        suite = Suite(suite)
    except ValueError as e:
        names = ", ".join(s.value for s in Suite)
        raise ConfigError(f"unknown suite {suite!r}; choose one of: {names}") from e

    rows = ExperimentRunner(data, config, repeats, grid, timings).run(suite)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{suite.value}.csv"
    write_rows(path, rows)
    logger.info("Wrote experiment results", path=str(path), rows=len(rows))
    return path
