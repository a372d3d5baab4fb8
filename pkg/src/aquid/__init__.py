"""Simulation workbench for a three-junction ring-lattice flux qubit."""

from .eigensolver import ConvergenceError, SpectrumResult, lowest_eigenpairs
from .fock import DimensionOverflowError, FockBasis, NotAMemberError, build_basis
from .hamiltonian import RingSpec, build_hamiltonian, gauge_equivalent
from .observables import (
    QubitFigures,
    SolverSettings,
    density_profile,
    persistent_current,
    qubit_figures,
    solve,
    sweep_filling,
    sweep_flux,
    sweep_interaction,
)

__version__ = "0.1.0"
