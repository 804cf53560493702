"""Zak transforms, STFTs and lattice-adapted mixed norms on sampled grids."""
__version__ = "0.1.0"
