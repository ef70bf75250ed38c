"""Classical phase-space layer of the nonlinear spin.

Per-spin energy surface

    H(z, phi) = (lam/2) z^2 - sqrt(1 - z^2) cos(phi)

on the cylinder z in [-1, 1], phi in (-pi, pi].  A separatrix at E = 1
passes through the unstable fixed point (0, pi) and divides bounded-phi
Josephson loops around the stable fixed point (0, 0) from self-trapping
orbits on which z never changes sign and phi winds monotonically
(decreasing for z > 0, increasing for z < 0).

This module provides the flow, orbit integration and periods, the orbit
density normalization and its near-separatrix factor-2 asymmetry, orbit
averages of jx and jz (eigenstate trajectory observables), phase-space
areas, and the area-rule quantization of approximate eigenenergies.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq


class EnergyUnreachableError(ValueError):
    """No real phase-space point with the requested (E, phi)."""


class PoleBoundaryError(ValueError):
    """The only (E, phi) solution sits on the coordinate pole |z| = 1."""


def classical_energy(z, phi, lam):
    """Per-spin energy (lam/2) z^2 - sqrt(1-z^2) cos(phi); |z| <= 1."""
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1):
        raise ValueError("|z| must not exceed 1")
    return 0.5 * lam * z**2 - np.sqrt(1.0 - z**2) * np.cos(phi)


def energy_gradient(z, phi, lam):
    """(dH/dz, dH/dphi); the z derivative diverges at the poles."""
    root = np.sqrt(1.0 - z * z)
    dhdz = lam * z + z * np.cos(phi) / root
    dhdphi = root * np.sin(phi)
    return dhdz, dhdphi


@dataclass(frozen=True)
class ClassicalState:
    """Canonical pair (z, phi); phi stored wrapped to (-pi, pi]."""

    z: float
    phi: float

    def __post_init__(self):
        if abs(self.z) > 1:
            raise ValueError(f"|z| must not exceed 1, got {self.z}")
        wrapped = math.remainder(self.phi, 2.0 * math.pi)
        if wrapped <= -math.pi:
            wrapped += 2.0 * math.pi
        object.__setattr__(self, "phi", wrapped)


def equations_of_motion(state, lam):
    """Canonical flow (dz/dt, dphi/dt) = (dH/dphi, -dH/dz).

    The orientation is fixed by the portrait: self-trapped orbits with
    z > 0 move toward decreasing phi.  Both fixed points (0, 0) and
    (0, pi) are stationary.
    """
    z, phi = state.z, state.phi
    if abs(z) >= 1.0:
        raise ValueError("flow is singular at the poles |z| = 1")
    dhdz, dhdphi = energy_gradient(z, phi, lam)
    return dhdphi, -dhdz


def invert_energy_for_z(energy, phi, lam, branch=1):
    """Root z of H(z, phi) = E on the requested sign branch.

    Closed-form: squaring the defining relation gives a quadratic in
    z^2; candidates are validated by substitution (residual < 1e-12).
    Raises EnergyUnreachableError when no real root exists at this phi
    and PoleBoundaryError when the only root sits at |z| = 1.
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    c = math.cos(phi)
    disc = c * c * (lam * lam - 2.0 * lam * energy + c * c)
    if disc < 0:
        raise EnergyUnreachableError(
            f"no real solution of H(z, {phi:.6g}) = {energy:.6g} (complex pair)"
        )
    half = 2.0 / (lam * lam)
    interior = []
    pole_root = False
    for sign in (1.0, -1.0):
        y = half * (lam * energy - c * c + sign * math.sqrt(disc))
        if y >= 1.0 - 1e-9:
            # grazing the coordinate pole, where H = lam/2 identically
            if abs(energy - 0.5 * lam) < 1e-9 and y <= 1.0 + 1e-9:
                pole_root = True
            continue
        if y >= -1e-14:
            y = max(y, 0.0)
            z = math.sqrt(y)
            if abs(0.5 * lam * y - math.sqrt(1.0 - y) * c - energy) < 1e-12:
                interior.append(z)
    if not interior:
        if pole_root:
            raise PoleBoundaryError(
                f"H = {energy:.6g} is reached at phi={phi:.6g} only on the "
                "pole |z| = 1"
            )
        raise EnergyUnreachableError(
            f"both quadratic roots are spurious for (E={energy:.6g}, phi={phi:.6g})"
        )
    # smallest valid |z|: the orbit branch connected to the separatrix region
    z = min(interior)
    return branch * z


def separatrix_z(phi, lam):
    """Positive-z separatrix height at the given phi (E = 1 contour)."""
    if abs(math.remainder(phi, 2.0 * math.pi)) > math.pi - 1e-12:
        return 0.0
    return invert_energy_for_z(1.0, phi, lam, branch=1)


@dataclass(frozen=True)
class ClassicalOrbit:
    """Trajectory samples at constant energy with period bookkeeping."""

    energy: float
    branch: int
    times: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    period: float | None
    orbit_class: str

    @property
    def period_converged(self):
        return self.period is not None


def _rk4_step(z, phi, lam, dt):
    def f(zz, pp):
        root = math.sqrt(1.0 - zz * zz)
        return root * math.sin(pp), -(lam * zz + zz * math.cos(pp) / root)

    k1z, k1p = f(z, phi)
    k2z, k2p = f(z + 0.5 * dt * k1z, phi + 0.5 * dt * k1p)
    k3z, k3p = f(z + 0.5 * dt * k2z, phi + 0.5 * dt * k2p)
    k4z, k4p = f(z + dt * k3z, phi + dt * k3p)
    return (
        z + dt * (k1z + 2 * k2z + 2 * k3z + k4z) / 6.0,
        phi + dt * (k1p + 2 * k2p + 2 * k3p + k4p) / 6.0,
    )


def integrate_orbit(state0, lam, dt=5e-4, max_steps=400_000, sample_stride=20):
    """RK4 trajectory from state0 with Poincare-section period detection.

    The period is the return time to the initial section (phi = phi0
    modulo a full winding, matching crossing direction); when the step
    budget runs out before closure, which is expected arbitrarily close
    to the separatrix, the orbit is returned with period None.
    """
    energy = float(classical_energy(state0.z, state0.phi, lam))
    if energy > 1.0 + 1e-12:
        orbit_class = "self_trapped"
        branch = 1 if state0.z > 0 else -1
    elif energy < 1.0 - 1e-12:
        orbit_class = "josephson"
        branch = 0
    else:
        orbit_class = "separatrix"
        branch = 0

    dz0, dphi0 = equations_of_motion(state0, lam)
    if abs(dz0) < 1e-14 and abs(dphi0) < 1e-14:
        return ClassicalOrbit(
            energy=energy, branch=branch, times=np.zeros(1),
            z=np.array([state0.z]), phi=np.array([state0.phi]),
            period=None, orbit_class=orbit_class,
        )

    # section on the faster initial coordinate; phi is kept unwrapped
    use_phi_section = abs(dphi0) >= abs(dz0)
    direction = math.copysign(1.0, dphi0 if use_phi_section else dz0)

    z, u = state0.z, state0.phi
    times, zs, phis = [0.0], [z], [u]
    period = None
    two_pi = 2.0 * math.pi
    for step in range(1, max_steps + 1):
        z_new, u_new = _rk4_step(z, u, lam, dt)
        if abs(z_new) >= 1.0:
            raise ValueError("trajectory reached the pole |z| = 1")
        if use_phi_section:
            c_old = (u - state0.phi) / two_pi
            c_new = (u_new - state0.phi) / two_pi
            crossed = math.floor(c_new) != math.floor(c_old) or (
                c_old < 0.0 <= c_new or c_new <= 0.0 < c_old
            )
            moving_right = u_new > u
            if crossed and step > 2 and (moving_right == (direction > 0)):
                target = round(c_new) * two_pi + state0.phi
                frac = (target - u) / (u_new - u)
                period = (step - 1 + frac) * dt
        else:
            f_old, f_new = z - state0.z, z_new - state0.z
            if step > 2 and f_old * f_new <= 0.0 and f_old != f_new:
                moving_right = z_new > z
                if moving_right == (direction > 0):
                    frac = f_old / (f_old - f_new)
                    period = (step - 1 + frac) * dt
        z, u = z_new, u_new
        if step % sample_stride == 0 or period is not None:
            times.append(step * dt)
            zs.append(z)
            phis.append(u)
        if period is not None:
            break

    phis = np.asarray(phis)
    wrapped = np.remainder(phis + math.pi, two_pi) - math.pi
    return ClassicalOrbit(
        energy=energy, branch=branch, times=np.asarray(times),
        z=np.asarray(zs), phi=wrapped, period=period, orbit_class=orbit_class,
    )


# ---------------------------------------------------------------------------
# orbit-density quadratures
#
# The inverse-speed weight w = |dH/dz|^-1 turns contour integrals into the
# time-averages that eigenstate trajectories follow.  Turning points of
# Josephson loops carry an integrable 1/sqrt singularity which is removed
# by the substitution phi = phi_t - u^2.


def _band_top(lam):
    # highest classical energy: elliptic points (+-sqrt(1-1/lam^2), pi)
    return 0.5 * lam + 0.5 / lam


def _check_band(energy, lam):
    if not (-1.0 < energy < 0.5 * lam) or energy == 1.0:
        raise ValueError(
            f"energy {energy} outside the supported band (-1, lam/2) or on "
            "the separatrix"
        )


def _loop_integral(energy, lam, observable=None):
    """integral of O * w over the full Josephson loop at E < 1."""
    phi_t = math.acos(-energy)
    sin_t = math.sin(phi_t)

    def integrand(u):
        phi = phi_t - u * u
        cphi = math.cos(phi)
        excess = energy + cphi  # height above the turning level at this phi
        if excess < 1e-13:
            # analytic turning-point limit: z ~ u sqrt(2 sin(phi_t)/(lam+c))
            z = 0.0
            val = 2.0 / math.sqrt(2.0 * sin_t * (lam + cphi))
        else:
            z = invert_energy_for_z(energy, phi, lam, branch=1)
            dhdz, _ = energy_gradient(z, phi, lam)
            val = 2.0 * u / abs(dhdz)
        if observable is not None:
            val *= observable(z, phi)
        return val

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(integrand, 0.0, math.sqrt(phi_t), limit=400,
                      epsabs=1e-10, epsrel=1e-9)
    return 4.0 * val


def _branch_integral(energy, lam, observable=None):
    """integral of O * w over one self-trapped branch (z > 0) at E > 1."""

    def integrand(psi):
        phi = psi + math.pi if psi <= 0 else psi - math.pi
        z = invert_energy_for_z(energy, phi, lam, branch=1)
        dhdz, _ = energy_gradient(z, phi, lam)
        val = 1.0 / abs(dhdz)
        if observable is not None:
            val *= observable(z, phi)
        return val

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(integrand, -math.pi, math.pi, points=[0.0], limit=400,
                      epsabs=1e-10, epsrel=1e-9)
    return val


def omega_norm(energy, lam, branch_summed=False):
    """Orbit-density normalization omega(E).

    omega(E)^-1 is half the inverse-speed contour integral: over the full
    loop below the separatrix, over a single z > 0 branch above it (the
    branch_summed flag adds the mirror branch).  This normalization
    reproduces the near-separatrix asymptotics

        omega(1 + d)^-1 ~ -ln(d) / (2 sqrt(lam - 1))
        omega(1 - d)^-1 ~ -ln(d) / sqrt(lam - 1)

    whose slopes differ by exactly a factor 2.
    """
    _check_band(energy, lam)
    if energy > 1.0:
        total = _branch_integral(energy, lam)
        if branch_summed:
            total *= 2.0
    else:
        total = _loop_integral(energy, lam)
    return 1.0 / (0.5 * total)


def ewf_observable(energy, s, lam, which):
    """Time average of jx or jz over the (E, s) eigenstate trajectory.

    jz carries the branch sign for E > 1 and vanishes identically below
    the separatrix; at the band bottom the orbit degenerates onto the
    stable fixed point (jx, jz) = (1, 0).
    """
    if which not in ("jx", "jz"):
        raise ValueError(f"unknown observable {which!r}")
    if abs(energy + 1.0) < 1e-12:
        return 1.0 if which == "jx" else 0.0
    _check_band(energy, lam)

    if energy < 1.0:
        if s != 0:
            raise ValueError("below the separatrix the branch label must be 0")
        if which == "jz":
            return 0.0
        num = _loop_integral(energy, lam,
                             lambda z, phi: math.sqrt(1 - z * z) * math.cos(phi))
        den = _loop_integral(energy, lam)
        return num / den

    if s not in (1, -1):
        raise ValueError("self-trapped orbits require branch +1 or -1")
    den = _branch_integral(energy, lam)
    if which == "jz":
        num = _branch_integral(energy, lam, lambda z, phi: z)
        return s * num / den
    num = _branch_integral(energy, lam,
                           lambda z, phi: math.sqrt(1 - z * z) * math.cos(phi))
    return num / den


# ---------------------------------------------------------------------------
# phase-space areas and the area quantization rule


def _cos_threshold(z, energy, lam):
    # H(z, phi) < E  <=>  cos(phi) > h(z)
    return (0.5 * lam * z * z - energy) / math.sqrt(1.0 - z * z)


def area_enclosed(energy, lam):
    """Area of the region H < E for E <= 1 (inside the Josephson loop)."""
    if not -1.0 <= energy <= 1.0:
        raise ValueError("enclosed area is defined for E in [-1, 1]")

    def integrand(z):
        if abs(z) >= 1.0:
            return 0.0
        h = _cos_threshold(z, energy, lam)
        return 2.0 * math.acos(min(max(h, -1.0), 1.0))

    val, _ = quad(integrand, -1.0, 1.0, limit=400, epsabs=1e-11, epsrel=1e-11)
    return val


def area_above_branch(energy, lam):
    """Area of {H > E, z > 0} for E >= 1 (one self-trapped branch)."""
    if not 1.0 <= energy <= _band_top(lam):
        raise ValueError("branch area is defined for E in [1, band top]")

    def integrand(z):
        if abs(z) >= 1.0:
            return 2.0 * math.pi
        h = _cos_threshold(z, energy, lam)
        return 2.0 * (math.pi - math.acos(min(max(h, -1.0), 1.0)))

    val, _ = quad(integrand, 0.0, 1.0, limit=400, epsabs=1e-11, epsrel=1e-11)
    return val


@dataclass(frozen=True)
class WkbSpectrum:
    """Area-rule energies: per-spin values, orbit class, separatrix flags.

    Self-trapped levels appear twice (one per branch); near_separatrix
    marks levels whose quantized area lies within one quantum of the
    separatrix area, where the smooth-area rule degrades.
    """

    energies: np.ndarray
    kinds: tuple
    near_separatrix: np.ndarray


def wkb_energies(model):
    """Quantize enclosed phase-space area in steps of 2*pi/j.

    Josephson levels solve area_enclosed(E) = (2 pi / j)(n + 1/2) counted
    up from the well bottom (librations carry the half offset); winding
    self-trapped doublets solve area_above_branch(E) = (2 pi / j) k
    counted down from the branch top with a zero offset, the rotor rule
    that anchors the topmost state at the band top.  Both offsets are
    validated against exact spectra in the tests.
    """
    if model.j < 10:
        raise ValueError("the area rule is used in the large-spin regime j >= 10")
    j, lam = model.j, model.lam
    quantum = 2.0 * math.pi / j
    area_sep = area_enclosed(1.0, lam)
    branch_area_max = area_above_branch(1.0, lam)
    top = _band_top(lam)

    energies, kinds, flags = [], [], []

    n = 0
    while (n + 0.5) * quantum < area_sep:
        target = (n + 0.5) * quantum
        try:
            e_n = brentq(lambda e: area_enclosed(e, lam) - target,
                         -1.0 + 1e-13, 1.0 - 1e-13, xtol=1e-13)
        except ValueError:
            break
        energies.append(e_n)
        kinds.append("josephson")
        flags.append(area_sep - target < quantum)
        n += 1

    branch_levels = [(top, False)]  # k = 0: zero enclosed area at the top
    k = 1
    while k * quantum < branch_area_max:
        target = k * quantum
        try:
            e_k = brentq(lambda e: area_above_branch(e, lam) - target,
                         1.0 + 1e-13, top - 1e-13, xtol=1e-13)
        except ValueError:
            break
        branch_levels.append((e_k, branch_area_max - target < quantum))
        k += 1

    for e_k, flag in branch_levels:
        for _ in range(2):  # one level per branch
            energies.append(e_k)
            kinds.append("self_trapped")
            flags.append(flag)

    order = np.argsort(energies, kind="stable")
    return WkbSpectrum(
        energies=np.asarray(energies)[order],
        kinds=tuple(np.asarray(kinds, dtype=object)[order]),
        near_separatrix=np.asarray(flags, dtype=bool)[order],
    )
