"""Reference clustering methods."""
