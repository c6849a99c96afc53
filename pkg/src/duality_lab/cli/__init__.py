"""Scenario runner and verification harness."""
