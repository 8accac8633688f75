"""Numerical laboratory for Madelung-variable quantum mechanics:
hydrodynamic decomposition, zero topology, stochastic sampling, state
preparation and lattice-field wavefunctionals, bundled behind the `lab`
experiment runner."""

from .grids import (
    Grid,
    PotentialSpec,
    Wavefunction,
    inner_product,
    normalize,
    total_energy,
)
from .madelung import Contour, MadelungFields, circulation, decompose, quantum_potential, reconstruct

__all__ = [
    "Grid",
    "Wavefunction",
    "PotentialSpec",
    "normalize",
    "inner_product",
    "total_energy",
    "MadelungFields",
    "Contour",
    "decompose",
    "reconstruct",
    "quantum_potential",
    "circulation",
]

__version__ = "0.1.0"
