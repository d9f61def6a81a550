"""Anisotropic perimeters, anisotropic total variation and minimality checks."""
__version__ = "0.1.0"
