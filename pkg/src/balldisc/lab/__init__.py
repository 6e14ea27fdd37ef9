"""Experiment configuration, runners, fits and the command line."""
