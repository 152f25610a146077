"""Unit tests for the NXT agent harness."""
