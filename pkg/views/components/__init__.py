"""Plotly figure components."""
