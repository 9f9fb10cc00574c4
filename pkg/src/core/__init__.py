"""Core models, configuration, logging and the run pipeline."""
