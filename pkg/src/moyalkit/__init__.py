"""Phase-space quantum mechanics: exact Weyl-symbol algebra plus grid transforms and dynamics."""
__version__ = "0.1.0"
