"""Experiment suites."""

from src.workflows.experiments import ExperimentGrid, ExperimentRunner, Suite, run_experiment

__all__ = ["ExperimentGrid", "ExperimentRunner", "Suite", "run_experiment"]
