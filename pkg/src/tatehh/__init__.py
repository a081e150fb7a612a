"""Hochschild homology, p-fold subdivision and Tate spectral sequences over F_p."""

__version__ = "0.1.0"
