"""Quantum long-time behavior: eigenbasis weights, ensembles, dynamics.

Above the separatrix the exact spectrum consists of parity doublets whose
splitting is far below machine resolution at large spin, so the solver
returns an arbitrary orthonormal pair in each two-dimensional subspace.
BranchedEigenstates rotates every such pair to extremal <Jz> (the two
localized branch states, labels s = +/-), which is the eigenbasis in
which diagonal and micro-canonical averages are taken: measurements here
always refer to times far below the doublet tunneling time.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .model import observable_matrix


@dataclass(frozen=True)
class DiagonalEnsemble:
    """Eigenbasis weights |c_n|^2 with per-spin energies.

    Carries the complex overlaps as well: branch-resolved averages need
    the relative phase inside each doublet, which the weights alone lose.
    """

    weights: np.ndarray
    energies: np.ndarray
    amplitudes: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.size != self.values.size:
            raise ValueError("times and values must have equal length")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


def parity_expectations(eig):
    """<v|P|v> with P: m -> -m, per eigenvector; +-1 away from doublets."""
    v = eig.eigenvectors
    return np.einsum("mk,mk->k", v, v[::-1])


def _local_spacing(energies, idx, half_window=10):
    lo = max(idx - half_window, 0)
    hi = min(idx + half_window + 1, energies.size - 1)
    gaps = np.diff(energies[lo : hi + 1])
    return float(np.median(gaps)) if gaps.size else 0.0


class BranchedEigenstates:
    """Doublet-recombined eigenbasis with branch labels and observables.

    Pairs of consecutive levels above per-spin energy 1 whose gap is
    below max(1e-12 * j, 1e-3 * local mean spacing) are rotated to
    extremal <Jz>; the rotated pair spans the same subspace and is
    orthonormal by construction.  Labels: s = +1/-1 for the localized
    members, s = 0 for unpaired states.
    """

    def __init__(self, model, eig):
        self.model = model
        self.eig = eig
        n = eig.n
        energies = eig.eigenvalues / model.j
        self.energies = energies

        jz = observable_matrix(model, "jz")
        jx = observable_matrix(model, "jx")
        v = eig.eigenvectors
        jz_v = jz.diag[:, None] * v
        jx_v = np.zeros_like(v)
        jx_v[:-1] = jx.offdiag[:, None] * v[1:]
        jx_v[1:] += jx.offdiag[:, None] * v[:-1]
        # per-spin observable values <n|O|n>/j, the paper-facing convention
        jz_diag = np.einsum("mk,mk->k", v, jz_v) / model.j
        jx_diag = np.einsum("mk,mk->k", v, jx_v) / model.j

        labels = np.zeros(n, dtype=int)
        pair_of = np.full(n, -1, dtype=int)
        pairs = []
        rotations = []

        gap_floor = 1e-12 * model.j
        i = 0
        while i < n - 1:
            gap = energies[i + 1] - energies[i]
            mean_e = 0.5 * (energies[i] + energies[i + 1])
            if mean_e > 1.0 and gap < max(gap_floor, 1e-3 * _local_spacing(energies, i)):
                b = float(v[:, i] @ jz_v[:, i + 1]) / model.j
                block = np.array([[jz_diag[i], b], [b, jz_diag[i + 1]]])
                vals, vecs = np.linalg.eigh(block)  # ascending: minus then plus
                jz_pair = vals[::-1]
                rot = vecs[:, ::-1]  # column 0 -> s=+, column 1 -> s=-
                bx = float(v[:, i] @ jx_v[:, i + 1]) / model.j
                jx_block = np.array([[jx_diag[i], bx], [bx, jx_diag[i + 1]]])
                jx_pair = np.einsum("ip,ij,jp->p", rot, jx_block, rot)
                idx = len(pairs)
                pairs.append((i, i + 1))
                rotations.append(rot)
                pair_of[i] = pair_of[i + 1] = idx
                labels[i], labels[i + 1] = 1, -1
                jz_diag[i], jz_diag[i + 1] = jz_pair
                jx_diag[i], jx_diag[i + 1] = jx_pair
                i += 2
            else:
                i += 1

        self.labels = labels
        self.pairs = pairs
        self.rotations = rotations
        self._pair_of = pair_of
        self.jz_values = jz_diag
        self.jx_values = jx_diag

    def observable_values(self, which):
        if which == "jx":
            return self.jx_values
        if which == "jz":
            return self.jz_values
        raise ValueError(f"unknown observable {which!r}")

    def branch_amplitudes(self, amplitudes):
        """Rotate raw eigenbasis overlaps into the branched basis."""
        out = np.array(amplitudes, dtype=complex, copy=True)
        for (i, k), rot in zip(self.pairs, self.rotations):
            out[[i, k]] = rot.T @ out[[i, k]]
        return out

    def branch_vector(self, index):
        """Explicit recombined eigenvector for the given level index."""
        pair_idx = self._pair_of[index]
        v = self.eig.eigenvectors
        if pair_idx < 0:
            return v[:, index].copy()
        i, k = self.pairs[pair_idx]
        rot = self.rotations[pair_idx]
        col = 0 if index == i else 1
        return v[:, i] * rot[0, col] + v[:, k] * rot[1, col]


def diagonal_ensemble(model, state, eig):
    """Eigenbasis expansion of a state: weights |<n|psi>|^2 and energies."""
    amp = state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)
    if amp.size != eig.n:
        raise ValueError(f"dimension mismatch: state {amp.size}, basis {eig.n}")
    overlaps = eig.eigenvectors.T @ amp
    weights = np.abs(overlaps) ** 2
    return DiagonalEnsemble(
        weights=weights, energies=eig.eigenvalues / model.j, amplitudes=overlaps
    )


def diagonal_average(ensemble, branched, which):
    """Infinite-time prediction sum_n |c_n|^2 <n|O|n> / j (per spin).

    Inside each doublet the weights and expectations are taken on the
    branch-recombined pair; outside, on the solver eigenvectors.
    """
    amp = branched.branch_amplitudes(ensemble.amplitudes)
    return float(np.abs(amp) ** 2 @ branched.observable_values(which))


def microcanonical_average(branched, which, energy, window=21, branch="both"):
    """Unweighted eigenstate average in a count-based energy window.

    The window holds the `window` states nearest in per-spin energy to
    `energy`; for E > 1 a branch of "+" or "-" restricts to that label
    (doublet members only), "both" keeps every state.
    """
    energies = branched.energies
    if branch == "both":
        candidates = np.arange(energies.size)
    elif branch in ("+", "-"):
        want = 1 if branch == "+" else -1
        candidates = np.flatnonzero(branched.labels == want)
    else:
        raise ValueError(f"unknown branch selector {branch!r}")
    if candidates.size == 0:
        raise ValueError(f"no eigenstates with branch {branch!r}")
    order = np.argsort(np.abs(energies[candidates] - energy), kind="stable")
    chosen = candidates[order[: max(1, min(window, candidates.size))]]
    return float(np.mean(branched.observable_values(which)[chosen]))


def alias_safe_dt(eig, margin=2.0):
    """Largest step keeping every Bohr frequency below pi/margin per step."""
    span = float(eig.eigenvalues[-1] - eig.eigenvalues[0])
    if span <= 0:
        return 1.0
    return math.pi / (margin * span)


def evolve_expectation(model, state, eig, obs, times, chunk=512):
    """Per-spin <psi(t)|O|psi(t)>/j under absolute-energy phases exp(-i E_n t).

    The norm is checked to 1e-10 at every sample.  Times are processed
    in chunks so the dense propagated block stays small.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    amp = state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)
    overlaps = eig.eigenvectors.T @ amp
    lam_abs = eig.eigenvalues
    values = np.empty(times.size)
    for start in range(0, times.size, chunk):
        t_block = times[start : start + chunk]
        phases = np.exp(-1j * np.outer(lam_abs, t_block))
        rotated = overlaps[:, None] * phases
        # two real GEMMs on contiguous blocks: avoids complex-promoting the
        # eigenvector matrix and numpy's slow strided-matmul path
        real_part = np.ascontiguousarray(rotated.real)
        imag_part = np.ascontiguousarray(rotated.imag)
        psi = eig.eigenvectors @ real_part + 1j * (eig.eigenvectors @ imag_part)
        norms = np.linalg.norm(psi, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise RuntimeError("norm drift beyond 1e-10 during evolution")
        contrib = obs.diag[:, None] * np.abs(psi) ** 2
        cross = np.conj(psi[:-1]) * psi[1:]
        contrib[:-1] += 2.0 * obs.offdiag[:, None] * cross.real
        values[start : start + t_block.size] = contrib.sum(axis=0)
    return TimeSeries(times=times, values=values / model.j)


def time_average(series, t_start, duration):
    """Trapezoidal mean of the series over [t_start, t_start + duration]."""
    t0, t1 = t_start, t_start + duration
    times, values = series.times, series.values
    if t0 < times[0] - 1e-12 or t1 > times[-1] + 1e-12:
        raise ValueError("averaging window must lie inside the sampled range")
    if duration <= 0:
        raise ValueError("duration must be positive")
    v0 = np.interp(t0, times, values)
    v1 = np.interp(t1, times, values)
    inside = (times > t0) & (times < t1)
    grid = np.concatenate(([t0], times[inside], [t1]))
    vals = np.concatenate(([v0], values[inside], [v1]))
    return float(np.trapezoid(vals, grid) / duration)


def level_spacings(model, eig):
    """Consecutive per-spin eigenvalue spacings."""
    return np.diff(eig.eigenvalues) / model.j


def doublet_splitting(model, eig, energy):
    """Per-spin gap of the parity doublet nearest the requested E > 1.

    States above the separatrix are paired by opposite parity quantum
    number; the intra-pair gap is the tunneling splitting.
    """
    energies = eig.eigenvalues / model.j
    if not 1.0 < energy < energies[-1]:
        raise ValueError("doublets exist only in the self-trapped band E > 1")
    n = energies.size
    # pairs are counted down from the band top, where doublets are tightest;
    # the alignment (whether the top state opens or closes a pair) is the
    # one giving the smaller topmost gap
    gap_last = energies[n - 1] - energies[n - 2]
    gap_prev = energies[n - 2] - energies[n - 3] if n >= 3 else np.inf
    start = n - 1 if gap_last <= gap_prev else n - 2
    pairs = []
    k = start
    while k - 1 >= 0:
        lo, hi = energies[k - 1], energies[k]
        center = 0.5 * (lo + hi)
        if center <= 1.0:
            break
        below = energies[k - 1] - energies[k - 2] if k >= 2 else np.inf
        if hi - lo > 0.5 * below:
            break  # pairing degrades approaching the separatrix
        pairs.append((k - 1, k))
        k -= 2
    if not pairs:
        raise ValueError("no resolvable doublets above the separatrix")
    parities = parity_expectations(eig)
    centers = np.array([0.5 * (energies[a] + energies[b]) for a, b in pairs])
    a, b = pairs[int(np.argmin(np.abs(centers - energy)))]
    if parities[a] * parities[b] > 0.5:
        raise ValueError("selected pair does not have opposite parity")
    return float(energies[b] - energies[a])
