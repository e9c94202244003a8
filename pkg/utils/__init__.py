"""Linear algebra, error types and output writers."""
