"""Experiment runners and figure builders."""
