"""Command-line driver and output writers."""
