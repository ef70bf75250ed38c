"""Nonlinear spin model: Hamiltonian and observables in the Jz eigenbasis.

The model is a single SU(2) spin of size j evolving under

    H = -Jx + (lam / 2j) Jz^2,        lam > 1,

written in the basis |m>, m = -j ... +j (ascending), where it is real
symmetric tridiagonal.  Energies are reported both in absolute units and
per spin (E = E_abs / j); the separatrix of the classical limit sits at
per-spin energy 1.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpinModel:
    """Spin size j (integer or half-integer) and nonlinearity lam > 1."""

    j: float
    lam: float

    def __post_init__(self):
        two_j = 2 * self.j
        if self.j <= 0 or abs(two_j - round(two_j)) > 1e-12:
            raise ValueError(f"spin size must be a positive half-integer, got {self.j}")
        if round(two_j) + 1 < 2:
            raise ValueError("Hilbert space dimension must be at least 2")
        if not self.lam > 1:
            raise ValueError(f"nonlinearity must exceed 1, got {self.lam}")

    @property
    def dim(self):
        """Hilbert space dimension N = 2j + 1."""
        return int(round(2 * self.j)) + 1

    @property
    def m_values(self):
        """Jz quantum numbers, ascending from -j to +j."""
        return np.arange(self.dim) - self.j


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Real symmetric tridiagonal matrix (diagonal + one off-diagonal)."""

    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def n(self):
        return self.diag.size

    def dense(self):
        a = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        a[idx, idx + 1] = self.offdiag
        a[idx + 1, idx] = self.offdiag
        return a

    def matvec(self, v):
        out = self.diag * v
        if self.n > 1:
            out = out.astype(np.result_type(self.diag, v))
            out[:-1] += self.offdiag * v[1:]
            out[1:] += self.offdiag * v[:-1]
        return out


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes over |m>, m = -j ... +j."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        norm = np.linalg.norm(amp)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("state vector must have finite nonzero norm")
        if abs(norm - 1.0) > 1e-12:
            amp = amp / norm
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self):
        return self.amplitudes.size


def _ladder_offdiag(j, m):
    # <m+1| J+ |m> / 1, for Jx = (J+ + J-) / 2
    return 0.5 * np.sqrt(j * (j + 1) - m * (m + 1))


def build_hamiltonian(model):
    """H = -Jx + (lam/2j) Jz^2 as a TridiagonalMatrix over m = -j..+j."""
    m = model.m_values
    diag = model.lam * m**2 / (2.0 * model.j)
    offdiag = -_ladder_offdiag(model.j, m[:-1])
    return TridiagonalMatrix(diag=diag, offdiag=offdiag)


def observable_matrix(model, which):
    """Jx, Jz or Jz^2 in the same basis; which in {'jx', 'jz', 'jz2'}."""
    m = model.m_values
    if which == "jz":
        return TridiagonalMatrix(diag=m.astype(float), offdiag=np.zeros(model.dim - 1))
    if which == "jz2":
        return TridiagonalMatrix(diag=(m**2).astype(float), offdiag=np.zeros(model.dim - 1))
    if which == "jx":
        return TridiagonalMatrix(
            diag=np.zeros(model.dim), offdiag=_ladder_offdiag(model.j, m[:-1])
        )
    raise ValueError(f"unknown observable {which!r}")


def expectation(state, obs):
    """<psi|O|psi> for a tridiagonal observable; asserts the value is real."""
    amp = state.amplitudes
    if amp.size != obs.n:
        raise ValueError(f"dimension mismatch: state {amp.size}, matrix {obs.n}")
    val = np.vdot(amp, obs.matvec(amp))
    if abs(val.imag) >= 1e-10:
        raise ValueError(f"expectation has non-negligible imaginary part {val.imag}")
    return float(val.real)
