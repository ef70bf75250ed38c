"""Spin coherent states and their Gaussian phase-space widths.

A coherent state centered at mean imbalance z' and mean phase phi' has
amplitudes

    c_m = binom(2j, j+m)^(1/2) cos(t/2)^(j+m) sin(t/2)^(j-m) e^(-i m phi')

with cos(t) = z'.  Binomials are evaluated in log space: for spins of a
few thousand the coefficients overflow any native float long before the
normalized amplitudes do.  The phase sign makes <Jx>/j = sqrt(1-z'^2)
cos(phi'), placing the stable fixed point of the classical portrait at
phi = 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .classical import invert_energy_for_z
from .model import StateVector


@dataclass(frozen=True)
class GaussianWidths:
    """Inverse variances of the coherent-state phase-space Gaussian."""

    alpha_z: float
    alpha_phi: float


@dataclass(frozen=True)
class CoherentState:
    """Mean (z', phi') with the amplitude vector over m = -j .. +j."""

    z_mean: float
    phi_mean: float
    state: StateVector

    @property
    def amplitudes(self):
        return self.state.amplitudes


def gaussian_widths(model, z_mean):
    """alpha_z = 2j/(1-z'^2), alpha_phi = j(1-z'^2)/2; product is j^2."""
    if abs(z_mean) >= 1:
        raise ValueError(f"|z'| must be below 1, got {z_mean}")
    one_minus = 1.0 - z_mean * z_mean
    return GaussianWidths(
        alpha_z=2.0 * model.j / one_minus,
        alpha_phi=0.5 * model.j * one_minus,
    )


def coherent_state(model, z_mean, phi_mean):
    """Spin coherent state at (z', phi'); requires |z'| < 1."""
    if abs(z_mean) >= 1:
        raise ValueError(
            f"|z'| must be below 1, got {z_mean}; poles are plain basis "
            "states, see pole_state"
        )
    j = model.j
    m = model.m_values
    two_j = int(round(2 * j))
    # log of binom(2j, j+m) via lgamma
    k = m + j
    log_binom = (
        math.lgamma(two_j + 1)
        - np.array([math.lgamma(ki + 1) + math.lgamma(two_j - ki + 1) for ki in k])
    )
    log_cos2 = math.log1p(z_mean) - math.log(2.0)   # log cos^2(t/2)
    log_sin2 = math.log1p(-z_mean) - math.log(2.0)  # log sin^2(t/2)
    log_mag = 0.5 * (log_binom + (j + m) * log_cos2 + (j - m) * log_sin2)
    log_mag -= log_mag.max()
    amplitudes = np.exp(log_mag) * np.exp(-1j * m * phi_mean)
    return CoherentState(
        z_mean=float(z_mean),
        phi_mean=float(phi_mean),
        state=StateVector(amplitudes=amplitudes),
    )


def pole_state(model, sign):
    """The |m = +-j> basis state, the z' -> +-1 limit of coherent states."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amplitudes = np.zeros(model.dim, dtype=complex)
    amplitudes[-1 if sign > 0 else 0] = 1.0
    return CoherentState(z_mean=float(sign), phi_mean=0.0,
                         state=StateVector(amplitudes=amplitudes))


def coherent_state_for_energy(model, energy, phi_mean, branch=1):
    """Coherent state placed on the per-spin energy contour at phi'.

    z' is the requested-sign root of (lam/2) z^2 - sqrt(1-z^2) cos(phi')
    = E; unreachable energies and pole-only solutions raise the distinct
    errors of the inversion helper.
    """
    z_mean = invert_energy_for_z(energy, phi_mean, model.lam, branch=branch)
    return coherent_state(model, z_mean, phi_mean)
