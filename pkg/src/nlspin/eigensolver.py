"""Full eigendecomposition of real symmetric tridiagonal matrices.

The single performance-critical kernel of the package: dimensions up to a
few thousand are decomposed with an implicit-shift QL iteration (Wilkinson
shifts, Givens accumulation of eigenvectors).  A compiled Cython core is
used when available; a numpy-based twin of the same sweep sequence is
selected at import time otherwise.
"""

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from .model import TridiagonalMatrix

from . import _ql_python

try:
    from . import _ql_cython
except ImportError:
    _ql_cython = None

#: True when the compiled core was importable.
HAVE_COMPILED = _ql_cython is not None

MAX_SWEEPS = 50


class ConvergenceError(RuntimeError):
    """QL iteration failed to deflate an eigenvalue within the sweep cap."""

    def __init__(self, index, fingerprint):
        super().__init__(
            f"eigenvalue {index} did not converge within {MAX_SWEEPS} sweeps "
            f"(matrix fingerprint {fingerprint})"
        )
        self.index = index
        self.fingerprint = fingerprint


def _fingerprint(diag, offdiag):
    h = hashlib.sha256()
    h.update(np.asarray(diag, float).tobytes())
    h.update(np.asarray(offdiag, float).tobytes())
    return f"n={diag.size}:{h.hexdigest()[:12]}"


def default_backend():
    if os.environ.get("NLSPIN_PURE_PYTHON", "") not in ("", "0"):
        return "python"
    return "compiled" if HAVE_COMPILED else "python"


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues with the matching orthonormal eigenvector matrix.

    ``eigenvectors[:, k]`` is the unit eigenvector for ``eigenvalues[k]``.
    Near-degenerate pairs are returned exactly as the accumulation produced
    them; any symmetry-adapted recombination is the caller's business.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    backend: str = "unknown"

    @property
    def n(self):
        return self.eigenvalues.size

    def residual_max(self, tri):
        """max_k ||T v_k - lambda_k v_k||_inf for the source matrix."""
        v = self.eigenvectors
        tv = tri.diag[:, None] * v
        tv[:-1] += tri.offdiag[:, None] * v[1:]
        tv[1:] += tri.offdiag[:, None] * v[:-1]
        return np.max(np.abs(tv - self.eigenvalues[None, :] * v))

    def orthogonality_defect(self):
        """||V^T V - I||_max; O(n^3), intended for tests."""
        g = self.eigenvectors.T @ self.eigenvectors
        np.fill_diagonal(g, g.diagonal() - 1.0)
        return np.max(np.abs(g))


def eigh_tridiagonal(tri, backend=None):
    """Decompose a TridiagonalMatrix into EigenDecomposition.

    Deterministic: a fixed sweep order and no randomized pivoting, so equal
    inputs give bit-equal outputs on a given backend.  Raises
    ConvergenceError after the per-eigenvalue sweep cap and ValueError for
    NaN/Inf entries.
    """
    if backend is None:
        backend = default_backend()
    if backend not in ("compiled", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled eigensolver core is not built")

    diag = np.asarray(tri.diag, dtype=float)
    off = np.asarray(tri.offdiag, dtype=float)
    n = diag.size
    if off.size != max(n - 1, 0):
        raise ValueError("off-diagonal length must be n - 1")
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
        raise ValueError("matrix entries must be finite")

    d = diag.copy()
    e = np.zeros(n, dtype=float)
    e[: n - 1] = off
    vt = np.eye(n, dtype=float)

    kernel = _ql_cython if backend == "compiled" else _ql_python
    bad = kernel.ql_implicit_shift(d, e, vt, MAX_SWEEPS)
    if bad:
        raise ConvergenceError(bad - 1, _fingerprint(diag, off))

    order = np.argsort(d, kind="stable")
    return EigenDecomposition(
        eigenvalues=d[order],
        eigenvectors=vt[order].T,
        backend=backend,
    )
