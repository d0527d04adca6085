"""Command-line experiment harness."""
