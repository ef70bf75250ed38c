"""Numerical laboratory for thermalization of a large nonlinear SU(2) spin.

Exact quantum results (spectra, ensembles, dynamics) side by side with the
classical and semiclassical layer (phase portrait, eigenstate trajectory
averages, WKB levels, separatrix saddle asymptotics).
"""

__version__ = "0.1.0"

from .model import SpinModel, TridiagonalMatrix, StateVector
from .model import build_hamiltonian, observable_matrix, expectation
from .eigensolver import EigenDecomposition, eigh_tridiagonal, HAVE_COMPILED
