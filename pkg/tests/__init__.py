"""Unit suites and the acceptance scenario runner."""
