"""Analytic predictions for the separatrix memory effect.

For a coherent state placed on the separatrix contour the long-time
weights form a double-peaked energy density: a narrow Gaussian envelope
(width sigma ~ j^(-1/2)) times the orbit-density normalization, which
vanishes logarithmically at the separatrix with a factor-2 asymmetry
between the two sides.  The peak positions are Lambert-W saddles at
E = 1 +- delta with delta ~ 1/sqrt(j ln j), and weighting the two sides
2:1 yields the scaling laws for the long-time observables:

    jx = -1 + (3+lam)/(3(lam-1)) / sqrt(F j ln j)
    jz = 4 pi sqrt(lam-1) / (3 lam ln(F j ln j))

with F = 1/(2 sigma^2 j) constant in j but phase-dependent through the
energy width of the initial state; that dependence is the memory.
"""

import math
from dataclasses import dataclass

import numpy as np

from .classical import energy_gradient, invert_energy_for_z, omega_norm
from .states import gaussian_widths


class OutOfRegimeError(ValueError):
    """Initial phase too close to the unstable fixed point for the
    double-peak saddle treatment."""


def energy_variance_sigma(model, z_mean, phi_mean):
    """Per-spin energy width of a coherent state, by linearization.

    sigma^2 = (g1^2 a_phi + k1^2 a_z) / (2 a_phi a_z) with (g1, k1) the
    energy gradient at the state center and (a_z, a_phi) the Gaussian
    inverse variances.  Scales as j^(-1/2).  Fixed points are rejected:
    both gradients vanish and the linearization degenerates.
    """
    g1, k1 = energy_gradient(z_mean, phi_mean, model.lam)
    if abs(g1) < 1e-12 and abs(k1) < 1e-12:
        raise ValueError(
            "energy linearization degenerates at a fixed point "
            f"(z'={z_mean}, phi'={phi_mean})"
        )
    w = gaussian_widths(model, z_mean)
    var = (g1 * g1 * w.alpha_phi + k1 * k1 * w.alpha_z) / (
        2.0 * w.alpha_phi * w.alpha_z
    )
    return math.sqrt(var)


@dataclass(frozen=True)
class SaddleModel:
    """Scaling factor F = 1/(2 sigma^2 j) and the side prefactors G+-.

    G+- are the coefficients of sqrt(lam-1)/(-ln d) in the orbit-density
    normalization on the two sides of the separatrix; in the pure
    near-separatrix asymptotics G+ = 2 sqrt(lam-1) and G- = sqrt(lam-1),
    the factor-2 rule.
    """

    f_factor: float
    g_plus: float
    g_minus: float
    sigma: float
    j: float

    def __post_init__(self):
        if not (self.f_factor > 0 and self.sigma > 0):
            raise ValueError("F and sigma must be positive")
        if abs(self.f_factor * 2.0 * self.sigma**2 * self.j - 1.0) > 1e-12:
            raise ValueError("F must equal 1/(2 sigma^2 j)")


def saddle_model_for_phase(model, phi_mean):
    """SaddleModel of the separatrix coherent state at the given phase."""
    z_mean = invert_energy_for_z(1.0, phi_mean, model.lam, branch=1)
    sigma = energy_variance_sigma(model, z_mean, phi_mean)
    root = math.sqrt(model.lam - 1.0)
    return SaddleModel(
        f_factor=1.0 / (2.0 * sigma**2 * model.j),
        g_plus=2.0 * root,
        g_minus=root,
        sigma=sigma,
        j=model.j,
    )


def lambert_w_minus1(x):
    """Lower real branch of w e^w = x on [-1/e, 0).

    Seeded with ln(-x) - ln(-ln(-x)) (or the branch-point series near
    -1/e) and polished by Halley iteration to 1e-12 relative residual.
    """
    if not -1.0 / math.e <= x < 0.0:
        raise ValueError(f"W_-1 requires x in [-1/e, 0), got {x}")
    if x == -1.0 / math.e:
        return -1.0
    arg = 1.0 + math.e * x
    if arg < 1e-3:
        p = -math.sqrt(2.0 * arg)  # branch-point expansion
        w = -1.0 + p - p * p / 3.0
    else:
        log_mx = math.log(-x)
        w = log_mx - math.log(-log_mx)
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= 1e-13 * abs(x):
            break
        wp1 = w + 1.0
        w -= f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
    return w


def saddle_delta(model, f_factor, g):
    """Distance of a density peak from the separatrix, from the W saddle.

    |delta| = 1 / sqrt(2jF * (-W_-1(-e^(-2/G) / (2jF)))); requires the
    argument inside the W domain, i.e. 2jF e^(2/G) > e (small spins are
    pre-asymptotic and rejected).  Reduces to 1/sqrt(2jF ln(2jF)) at
    leading order in large j.
    """
    two_jf = 2.0 * model.j * f_factor
    x = -math.exp(-2.0 / g) / two_jf
    if x < -1.0 / math.e:
        raise ValueError(
            "pre-asymptotic regime: 2jF e^(2/G) must exceed e for the "
            "density to have an off-separatrix peak"
        )
    w = lambert_w_minus1(x)
    return 1.0 / math.sqrt(two_jf * (-w))


def separatrix_observables(delta, side, lam):
    """Near-separatrix eigenstate observables at E = 1 + side*|delta|.

    jx approaches -1 linearly in delta on both sides (slopes 2/(lam-1)
    above, 1 below); jz vanishes below and decays as 1/(-ln delta) above
    (magnitude convention).  Both limits recover the unstable-fixed-point
    values (jx, jz) = (-1, 0).
    """
    if not 0.0 < delta <= 0.1:
        raise ValueError(f"delta must lie in (0, 0.1], got {delta}")
    if side == 1:
        jx = -1.0 + 2.0 * delta / (lam - 1.0)
        jz = 4.0 * math.pi * math.sqrt(lam - 1.0) / (lam * (-math.log(delta)))
        return jx, jz
    if side == -1:
        return -1.0 + delta, 0.0
    raise ValueError("side must be +1 or -1")


def predict_lto(model, phi_mean, method="closed"):
    """Long-time (jx, jz) prediction for a separatrix coherent state.

    method="closed": the scaling-law forms quoted in the module
    docstring.  method="combination": weight the two saddle-side
    observables 2:1 at the symmetric large-j saddle
    delta = 1/sqrt(F j ln j); identical to the closed form for jx.
    method="saddle": same 2:1 weighting but at the asymmetric finite-j
    Lambert-W saddles of each side, for sensitivity analysis.

    Phases within three Gaussian widths of the unstable fixed point are
    rejected: there the density has a single peak and a different
    expansion applies.
    """
    lam = model.lam
    sm = saddle_model_for_phase(model, phi_mean)
    z_mean = invert_energy_for_z(1.0, phi_mean, lam, branch=1)
    alpha_phi = gaussian_widths(model, z_mean).alpha_phi
    phase_width = 1.0 / math.sqrt(2.0 * alpha_phi)
    dist = abs(math.remainder(phi_mean - math.pi, 2.0 * math.pi))
    if dist < 3.0 * phase_width:
        raise OutOfRegimeError(
            f"phi'={phi_mean:.4g} is within three phase widths of the "
            "unstable fixed point; the double-peak expansion does not apply"
        )

    big_l = sm.f_factor * model.j * math.log(model.j)
    if method == "closed":
        jx = -1.0 + (3.0 + lam) / (3.0 * (lam - 1.0)) / math.sqrt(big_l)
        jz = 4.0 * math.pi * math.sqrt(lam - 1.0) / (3.0 * lam * math.log(big_l))
        return jx, jz
    if method == "combination":
        delta = 1.0 / math.sqrt(big_l)
        jx_p, jz_p = separatrix_observables(delta, 1, lam)
        jx_m, jz_m = separatrix_observables(delta, -1, lam)
        return (2.0 * jx_p + jx_m) / 3.0, (2.0 * jz_p + jz_m) / 3.0
    if method == "saddle":
        d_p = saddle_delta(model, sm.f_factor, sm.g_plus)
        d_m = saddle_delta(model, sm.f_factor, sm.g_minus)
        jx_p, jz_p = separatrix_observables(d_p, 1, lam)
        jx_m, jz_m = separatrix_observables(d_m, -1, lam)
        return (2.0 * jx_p + jx_m) / 3.0, (2.0 * jz_p + jz_m) / 3.0
    raise ValueError(f"unknown method {method!r}")


def semiclassical_diag_density(model, z_mean, phi_mean, energies):
    """Asymptotic long-time weight density over per-spin energy.

    Proportional to exp(-(E - E_c)^2 / (2 sigma^2)) * omega(E) with E_c
    the classical energy of the state center; normalized to unit integral
    over the sampled band by trapezoid quadrature on a dense grid.  For a
    center on the separatrix the density vanishes at E = 1 (as 1/ln) and
    is double peaked, with the upper peak twice the lower one.
    """
    lam = model.lam
    e_center = float(
        0.5 * lam * z_mean**2 - math.sqrt(1.0 - z_mean**2) * math.cos(phi_mean)
    )
    sigma = energy_variance_sigma(model, z_mean, phi_mean)

    def unnormalized(e):
        if not (-1.0 < e < 0.5 * lam) or e == 1.0:
            return 0.0
        gauss = math.exp(-((e - e_center) ** 2) / (2.0 * sigma**2))
        return gauss * omega_norm(e, lam)

    energies = np.asarray(energies, dtype=float)
    lo = max(-1.0 + 1e-9, e_center - 12.0 * sigma)
    hi = min(0.5 * lam - 1e-9, e_center + 12.0 * sigma)
    grid = np.linspace(lo, hi, 1201)
    norm = np.trapezoid([unnormalized(e) for e in grid], grid)
    return np.array([unnormalized(e) for e in energies]) / norm
