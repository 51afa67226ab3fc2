"""Exact integer polyhedral chains in normed spaces and certified isoperimetric fillings."""
