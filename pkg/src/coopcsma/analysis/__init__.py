"""Closed-form and Monte Carlo studies of cooperative throughput and relay availability."""
