"""Experiment harness: configuration, oracle, diagnostics, runner and audit."""
