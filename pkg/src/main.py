"""Main entry point for the ``gpac`` command."""

from pathlib import Path
from typing import Annotated, Any

import structlog
import typer
import yaml

from src.adapters.datasets import DatasetFormat, load_dataset, save_dataset
from src.adapters.synthetic import make_blob_dataset
from src.core.config import settings
from src.core.exceptions import ConfigError, GpacError
from src.core.logging import configure_logging
from src.core.models import Dataset, GpacConfig, InitMode, Method
from src.core.runner import ClusterOptions, run_cluster
from src.workflows.experiments import run_experiment

logger = structlog.get_logger()

app = typer.Typer(
    name="gpac",
    help="Graph probability aggregation clustering, baselines and experiments.",
    no_args_is_help=True,
)

# Options shared by `cluster` and `experiment`; None means "not given"
Clusters = Annotated[int | None, typer.Option("--clusters", "-c", help="Number of clusters")]
FuzzyM = Annotated[float | None, typer.Option("--m", help="Fuzzy weighting exponent (> 1)")]
Alpha = Annotated[float | None, typer.Option("--alpha", help="Self-constraint weight")]
BetaMax = Annotated[float | None, typer.Option("--beta-max", help="Local-consistency ceiling")]
BetaRamp = Annotated[int | None, typer.Option("--beta-ramp", help="Epochs to ramp beta")]
Neighbors = Annotated[int | None, typer.Option("--k", help="Neighbours in the k-NN graph")]
Theta = Annotated[int | None, typer.Option("--theta", help="Random-walk depth override")]
BatchSize = Annotated[int | None, typer.Option("--batch-size", help="Mini-batch size")]
MaxEpochs = Annotated[int | None, typer.Option("--max-epochs", help="Epoch limit")]
Tol = Annotated[float | None, typer.Option("--tol", help="Changed-label fraction to stop at")]
Seed = Annotated[int | None, typer.Option("--seed", help="Random seed")]
Init = Annotated[InitMode | None, typer.Option("--init", help="Hard assignment initialisation")]
Sigma = Annotated[float | None, typer.Option("--sigma", help="Kernel bandwidth override")]
ConfigFile = Annotated[
    Path | None, typer.Option("--config", help="YAML file of GpacConfig fields")
]
LabelsCol = Annotated[
    int | None, typer.Option("--labels-col", help="CSV column holding labels (negative from end)")
]
Format = Annotated[DatasetFormat, typer.Option("--format", help="Dataset file format")]
Repeats = Annotated[int, typer.Option("--repeats", min=1, help="Seeds seed..seed+R-1")]
NoTimings = Annotated[
    bool, typer.Option("--no-timings", help="Write zero timings for byte-identical reports")
]


def build_config(config_file: Path | None, **flags: Any) -> GpacConfig:
    """YAML values first, explicitly given flags on top."""
    values: dict[str, Any] = {}
    if config_file is not None:
        loaded = yaml.safe_load(config_file.read_text(encoding="utf-8")) or {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"{config_file}: expected a mapping of GpacConfig fields")
        values.update(loaded)
    values.update({key: value for key, value in flags.items() if value is not None})
    if "c" not in values:
        raise ConfigError("number of clusters is required (--clusters or 'c' in --config)")
    return GpacConfig(**values)


def _fail(message: str, error: Exception) -> None:
    logger.error(message, error=str(error))
    typer.echo(f"Error: {error}", err=True)
    raise typer.Exit(1)


@app.callback()
def main_callback(
    log_level: Annotated[str, typer.Option(help="Log level")] = settings.log_level,
    log_format: Annotated[str, typer.Option(help="console or json")] = settings.log_format,
) -> None:
    configure_logging(log_level, log_format)


@app.command()
def cluster(
    data_path: Annotated[Path, typer.Argument(help="Dataset file")],
    method: Annotated[Method, typer.Option("--method", help="Clustering method")] = Method.GPAC,
    clusters: Clusters = None,
    m: FuzzyM = None,
    alpha: Alpha = None,
    beta_max: BetaMax = None,
    beta_ramp: BetaRamp = None,
    k: Neighbors = None,
    theta: Theta = None,
    batch_size: BatchSize = None,
    max_epochs: MaxEpochs = None,
    tol: Tol = None,
    seed: Seed = None,
    init: Init = None,
    sigma: Sigma = None,
    repeats: Repeats = 1,
    labels_col: LabelsCol = None,
    fmt: Format = DatasetFormat.CSV,
    out_dir: Annotated[Path, typer.Option("--out-dir", help="Output directory")] = Path("out"),
    config_file: ConfigFile = None,
    save_graph: Annotated[bool, typer.Option("--save-graph", help="Write graph.txt")] = False,
    no_timings: NoTimings = False,
) -> None:
    """Cluster a dataset and write labels, probabilities, traces and a report."""
    try:
        config = build_config(
            config_file,
            c=clusters,
            m=m,
            alpha=alpha,
            beta_max=beta_max,
            beta_ramp_epochs=beta_ramp,
            k=k,
            theta_override=theta,
            batch_size=batch_size,
            max_epochs=max_epochs,
            convergence_tol=tol,
            seed=seed,
            init_mode=init,
            sigma=sigma,
        )
        data = load_dataset(data_path, fmt, labels_col)
        options = ClusterOptions(
            method=method,
            config=config,
            repeats=repeats,
            out_dir=out_dir,
            timings=not no_timings,
            save_graph=save_graph,
        )
        report = run_cluster(data, options)
    except (GpacError, OSError, ValueError) as e:
        _fail("Clustering failed", e)
        return

    typer.echo(f"Clustered {report.n} samples with {report.method.value}; results in {out_dir}")
    if report.metrics:
        for name, summary in report.metrics.items():
            spread = "" if summary.std is None else f" (+/-{summary.std:.4f})"
            typer.echo(f"  {name}: {summary.mean:.4f}{spread}")


@app.command()
def experiment(
    suite: Annotated[str, typer.Argument(help="Suite name, e.g. lcc-ablation or m-sweep")],
    data_path: Annotated[Path | None, typer.Option("--data", help="Labelled dataset")] = None,
    synthetic: Annotated[
        str | None, typer.Option("--synthetic", help="blobs or noisy-blobs")
    ] = None,
    clusters: Clusters = None,
    m: FuzzyM = None,
    alpha: Alpha = None,
    beta_max: BetaMax = None,
    beta_ramp: BetaRamp = None,
    k: Neighbors = None,
    theta: Theta = None,
    batch_size: BatchSize = None,
    max_epochs: MaxEpochs = None,
    tol: Tol = None,
    seed: Seed = None,
    init: Init = None,
    sigma: Sigma = None,
    repeats: Repeats = 1,
    labels_col: LabelsCol = None,
    fmt: Format = DatasetFormat.CSV,
    out_dir: Annotated[Path, typer.Option("--out-dir", help="Output directory")] = Path("out"),
    config_file: ConfigFile = None,
    no_timings: NoTimings = False,
) -> None:
    """Run an experiment suite and write ``<out-dir>/<suite>.csv``."""
    try:
        data: Dataset
        if data_path is not None:
            data = load_dataset(data_path, fmt, labels_col)
        elif synthetic in ("blobs", "noisy-blobs"):
            noise = 0.1 if synthetic == "noisy-blobs" else 0.0
            data = make_blob_dataset(c=clusters or 4, seed=seed or 0, noise_fraction=noise)
        else:
            raise ConfigError("give --data PATH or --synthetic blobs|noisy-blobs")

        config = build_config(
            config_file,
            c=clusters if clusters is not None else (4 if data_path is None else None),
            m=m,
            alpha=alpha,
            beta_max=beta_max,
            beta_ramp_epochs=beta_ramp,
            k=k,
            theta_override=theta,
            batch_size=batch_size,
            max_epochs=max_epochs,
            convergence_tol=tol,
            seed=seed,
            init_mode=init,
            sigma=sigma,
        )
        path = run_experiment(
            suite, data, config, out_dir, repeats=repeats, timings=not no_timings
        )
    except (GpacError, OSError, ValueError) as e:
        _fail("Experiment failed", e)
        return

    typer.echo(f"Wrote {path}")


@app.command("make-blobs")
def make_blobs_command(
    out_path: Annotated[Path, typer.Argument(help="Dataset file to write")],
    clusters: Annotated[int, typer.Option("--clusters", "-c")] = 4,
    per_cluster: Annotated[int, typer.Option("--per-cluster")] = 500,
    dim: Annotated[int, typer.Option("--dim")] = 2,
    separation: Annotated[float, typer.Option("--separation", help="In units of std")] = 8.0,
    std: Annotated[float, typer.Option("--std")] = 1.0,
    noise: Annotated[float, typer.Option("--noise", help="Share of uniform noise")] = 0.0,
    seed: Annotated[int, typer.Option("--seed")] = 0,
    fmt: Format = DatasetFormat.CSV,
) -> None:
    """Write a labelled Gaussian blob dataset."""
    try:
        data = make_blob_dataset(
            n_per_cluster=per_cluster,
            c=clusters,
            d=dim,
            separation=separation,
            std=std,
            seed=seed,
            noise_fraction=noise,
        )
        save_dataset(data, out_path, fmt)
    except (GpacError, OSError, ValueError) as e:
        _fail("Dataset generation failed", e)
        return

    typer.echo(f"Wrote {data.n} samples to {out_path}")


def main() -> None:
    """Main entry point."""
    app()


if __name__ == "__main__":
    main()
