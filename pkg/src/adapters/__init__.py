"""Dataset files, synthetic data and run output files."""
