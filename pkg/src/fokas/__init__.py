"""Unified-transform solution of y_t = i(alpha y_xxxx + beta y_xx) on the half line."""
__version__ = "0.1.0"
