import math

import numpy as np
import pytest

from nlspin.classical import (
    ClassicalState,
    EnergyUnreachableError,
    PoleBoundaryError,
    area_above_branch,
    area_enclosed,
    classical_energy,
    energy_gradient,
    equations_of_motion,
    ewf_observable,
    integrate_orbit,
    invert_energy_for_z,
    omega_norm,
    separatrix_z,
    wkb_energies,
)
from nlspin.model import SpinModel

from conftest import cached_eig

LAM = 10.0


def test_energy_landmarks():
    assert classical_energy(0.0, 0.0, LAM) == pytest.approx(-1.0)
    assert classical_energy(0.0, math.pi, LAM) == pytest.approx(1.0)
    for phi in (0.0, 1.0, -2.0):
        assert classical_energy(1.0, phi, LAM) == pytest.approx(LAM / 2)
        assert classical_energy(-1.0, phi, LAM) == pytest.approx(LAM / 2)
    with pytest.raises(ValueError):
        classical_energy(1.2, 0.0, LAM)


def test_flow_fixed_points_and_direction():
    for phi in (0.0, math.pi):
        dz, dphi = equations_of_motion(ClassicalState(z=0.0, phi=phi), LAM)
        assert dz == pytest.approx(0.0, abs=1e-15)
        assert dphi == pytest.approx(0.0, abs=1e-15)
    # orientation fixed by the portrait: z > 0 self-trapped orbits drift to
    # decreasing phi, which puts (0, pi/2) on an upward z swing
    dz, dphi = equations_of_motion(ClassicalState(z=0.0, phi=math.pi / 2), LAM)
    assert dz == pytest.approx(1.0)
    assert dphi == pytest.approx(0.0)


def test_flow_is_hamiltonian(rng):
    # (dz, dphi) = (dH/dphi, -dH/dz) against finite differences of the energy
    h = 1e-6
    for _ in range(20):
        z = rng.uniform(-0.9, 0.9)
        phi = rng.uniform(-3.1, 3.1)
        dz, dphi = equations_of_motion(ClassicalState(z=z, phi=phi), LAM)
        dh_dphi = (classical_energy(z, phi + h, LAM) - classical_energy(z, phi - h, LAM)) / (2 * h)
        dh_dz = (classical_energy(z + h, phi, LAM) - classical_energy(z - h, phi, LAM)) / (2 * h)
        assert dz == pytest.approx(dh_dphi, abs=1e-8)
        assert dphi == pytest.approx(-dh_dz, abs=1e-8)


def test_separatrix_stall():
    dz, dphi = equations_of_motion(ClassicalState(z=0.0, phi=math.pi - 1e-6), LAM)
    assert abs(dz) < 1e-5
    assert abs(dphi) < 1e-5


def test_invert_energy_worked_roots():
    assert invert_energy_for_z(1.0, 0.0, LAM) == pytest.approx(0.6, abs=1e-14)
    assert invert_energy_for_z(1.0, math.pi, LAM) == pytest.approx(0.0, abs=1e-14)
    assert invert_energy_for_z(1.0, 0.0, LAM, branch=-1) == pytest.approx(-0.6)
    with pytest.raises(EnergyUnreachableError):
        invert_energy_for_z(0.5, 2.5, LAM)
    with pytest.raises(PoleBoundaryError):
        invert_energy_for_z(LAM / 2, 0.0, LAM)


def test_invert_energy_residual_property(rng):
    for _ in range(200):
        z = rng.uniform(-0.95, 0.95)
        phi = rng.uniform(-math.pi, math.pi)
        e = float(classical_energy(abs(z), phi, LAM))
        if not -1.0 < e < LAM / 2:
            continue
        back = invert_energy_for_z(e, phi, LAM, branch=1)
        assert classical_energy(back, phi, LAM) == pytest.approx(e, abs=1e-10)


def test_band_top_pocket_root():
    # at phi = pi the energy lam/2 is reached inside the sphere as well:
    # the librating pocket around the elliptic point (sqrt(1-1/lam^2), pi)
    z = invert_energy_for_z(LAM / 2, math.pi, LAM)
    assert z == pytest.approx(math.sqrt(1 - 4 / LAM**2))


def test_orbit_josephson_closes():
    z0 = invert_energy_for_z(0.5, 0.0, LAM)
    orbit = integrate_orbit(ClassicalState(z=z0, phi=0.0), LAM, dt=2e-4)
    assert orbit.orbit_class == "josephson"
    assert orbit.period is not None and orbit.period > 0
    energies = classical_energy(orbit.z, orbit.phi, LAM)
    assert np.max(np.abs(energies - 0.5)) < 1e-8
    assert orbit.z.min() < 0 < orbit.z.max()  # sign-alternating imbalance


def test_orbit_self_trapped_direction():
    z0 = invert_energy_for_z(3.0, 0.0, LAM)
    orbit = integrate_orbit(ClassicalState(z=z0, phi=0.0), LAM, dt=2e-4,
                            sample_stride=5)
    assert orbit.orbit_class == "self_trapped"
    assert np.all(orbit.z > 0)
    # phi decreases monotonically on the z > 0 branch
    unwrapped = np.unwrap(orbit.phi)
    assert np.all(np.diff(unwrapped) < 0)
    assert orbit.period is not None


def test_orbit_fixed_point_degenerates():
    orbit = integrate_orbit(ClassicalState(z=0.0, phi=0.0), LAM)
    assert orbit.times.size == 1
    assert orbit.period is None


def test_period_log_divergence():
    # near the separatrix T(E) = (2 ln(1/d) + const) / sqrt(lam-1): the fitted
    # log slope is the sharp version of the divergence
    periods = {}
    for delta in (1e-3, 1e-4, 1e-6):
        z0 = invert_energy_for_z(1 - delta, 0.0, LAM)
        orbit = integrate_orbit(ClassicalState(z=z0, phi=0.0), LAM, dt=2e-4)
        assert orbit.period is not None
        periods[delta] = orbit.period
    assert periods[1e-6] > periods[1e-4] > periods[1e-3]
    x = np.array([-math.log(d) for d in periods])
    y = np.array(list(periods.values()))
    slope = np.polyfit(x, y, 1)[0]
    assert slope == pytest.approx(2 / math.sqrt(LAM - 1), rel=0.05)


def test_omega_asymptotic_slopes():
    deltas = np.logspace(-6, -3, 7)
    x = -np.log(deltas)
    above = np.array([1 / omega_norm(1 + d, LAM) for d in deltas])
    below = np.array([1 / omega_norm(1 - d, LAM) for d in deltas])
    slope_above = np.polyfit(x, above, 1)[0]
    slope_below = np.polyfit(x, below, 1)[0]
    assert slope_above == pytest.approx(1 / (2 * math.sqrt(LAM - 1)), rel=0.02)
    assert slope_below == pytest.approx(1 / math.sqrt(LAM - 1), rel=0.02)
    d = 1e-4
    ratio = (1 / omega_norm(1 + d, LAM)) / (1 / omega_norm(1 - d, LAM))
    assert ratio == pytest.approx(0.5, rel=0.05)


def test_omega_branch_sum_continuity():
    # summed over both branches the log coefficient matches the loop side
    deltas = np.logspace(-6, -3, 7)
    x = -np.log(deltas)
    summed = np.array([1 / omega_norm(1 + d, LAM, branch_summed=True) for d in deltas])
    below = np.array([1 / omega_norm(1 - d, LAM) for d in deltas])
    assert np.polyfit(x, summed, 1)[0] == pytest.approx(
        np.polyfit(x, below, 1)[0], rel=0.02
    )


def test_omega_band_edges_and_errors():
    assert 1 / omega_norm(-1 + 1e-9, LAM) == pytest.approx(
        math.pi / math.sqrt(LAM + 1), rel=1e-3
    )
    for bad in (1.0, -1.0, LAM / 2, 7.0):
        with pytest.raises(ValueError):
            omega_norm(bad, LAM)


def test_omega_matches_area_derivative():
    # independent route: omega^-1 equals half the energy derivative of the
    # enclosed area (loop side) / minus the branch area (self-trapped side)
    h = 1e-6
    for e in (0.3, 0.8):
        da = (area_enclosed(e + h, LAM) - area_enclosed(e - h, LAM)) / (2 * h)
        assert 1 / omega_norm(e, LAM) == pytest.approx(0.5 * da, rel=1e-4)
    for e in (1.5, 3.0):
        db = (area_above_branch(e + h, LAM) - area_above_branch(e - h, LAM)) / (2 * h)
        assert 1 / omega_norm(e, LAM) == pytest.approx(-0.5 * db, rel=1e-4)


def test_ewf_fixed_point_limits():
    assert ewf_observable(-1.0, 0, LAM, "jx") == pytest.approx(1.0)
    assert ewf_observable(-1.0, 0, LAM, "jz") == pytest.approx(0.0)
    assert ewf_observable(0.5, 0, LAM, "jz") == 0.0


def test_ewf_branch_symmetry():
    jz_plus = ewf_observable(2.0, 1, LAM, "jz")
    jz_minus = ewf_observable(2.0, -1, LAM, "jz")
    assert jz_plus > 0
    assert jz_plus == pytest.approx(-jz_minus, rel=1e-10)
    assert ewf_observable(2.0, 1, LAM, "jx") == pytest.approx(
        ewf_observable(2.0, -1, LAM, "jx"), rel=1e-10
    )
    with pytest.raises(ValueError):
        ewf_observable(2.0, 0, LAM, "jz")
    with pytest.raises(ValueError):
        ewf_observable(0.5, 1, LAM, "jz")


def test_ewf_matches_orbit_time_average():
    # independent oracle: average jx over one integrated period
    e = 2.0
    z0 = invert_energy_for_z(e, 0.0, LAM)
    orbit = integrate_orbit(ClassicalState(z=z0, phi=0.0), LAM, dt=5e-5,
                            sample_stride=1)
    n_period = int(orbit.period / 5e-5)
    jx_samples = np.sqrt(1 - orbit.z[:n_period] ** 2) * np.cos(orbit.phi[:n_period])
    assert ewf_observable(e, 1, LAM, "jx") == pytest.approx(
        jx_samples.mean(), abs=2e-3
    )
    jz_samples = orbit.z[:n_period]
    assert ewf_observable(e, 1, LAM, "jz") == pytest.approx(
        jz_samples.mean(), abs=2e-3
    )


def test_ewf_approaches_fixed_point_near_separatrix():
    # both sides drift toward the unstable-fixed-point values (-1, 0);
    # the approach is logarithmic in the energy distance
    jx_above = [ewf_observable(1 + d, 1, LAM, "jx") for d in (1e-2, 1e-4, 1e-6)]
    jx_below = [ewf_observable(1 - d, 0, LAM, "jx") for d in (1e-2, 1e-4, 1e-6)]
    assert all(np.diff(jx_above) < 0)
    assert all(np.diff(jx_below) < 0)
    assert jx_above[-1] == pytest.approx(jx_below[-1], abs=1e-3)
    assert jx_above[-1] < -0.75


def test_ewf_jz_log_asymptotics():
    # jz(1+d)^-1 grows linearly in -ln d with slope lam/(2 pi sqrt(lam-1))
    deltas = np.logspace(-7, -4, 6)
    inv_jz = np.array([1 / ewf_observable(1 + d, 1, LAM, "jz") for d in deltas])
    slope = np.polyfit(-np.log(deltas), inv_jz, 1)[0]
    assert slope == pytest.approx(LAM / (2 * math.pi * math.sqrt(LAM - 1)), rel=0.1)


def test_separatrix_polyline():
    assert separatrix_z(math.pi, LAM) == pytest.approx(0.0)
    assert separatrix_z(0.0, LAM) == pytest.approx(0.6)
    z = separatrix_z(1.5, LAM)
    assert classical_energy(z, 1.5, LAM) == pytest.approx(1.0, abs=1e-10)


def test_area_consistency():
    a_sep = area_enclosed(1.0, LAM)
    b_max = area_above_branch(1.0, LAM)
    assert a_sep / 2 + b_max == pytest.approx(2 * math.pi, abs=1e-8)
    assert area_enclosed(-1.0, LAM) == pytest.approx(0.0, abs=1e-8)
    assert area_above_branch(LAM / 2 + 1 / (2 * LAM), LAM) == pytest.approx(
        0.0, abs=1e-6
    )


def test_wkb_level_count():
    model = SpinModel(j=100.0, lam=LAM)
    wkb = wkb_energies(model)
    assert abs(wkb.energies.size - model.dim) <= 2
    assert wkb.energies[0] > -1.0
    # ground level sits a harmonic zero point above the well bottom
    assert wkb.energies[0] == pytest.approx(-1 + math.sqrt(LAM + 1) / (2 * 100), rel=1e-3)
    with pytest.raises(ValueError):
        wkb_energies(SpinModel(j=5.0, lam=LAM))


def _wkb_errors(j):
    model, eig, _ = cached_eig(j)
    wkb = wkb_energies(model)
    exact = eig.eigenvalues / model.j
    errors = []
    for k, (e_w, kind, flag) in enumerate(
        zip(wkb.energies, wkb.kinds, wkb.near_separatrix)
    ):
        if flag or abs(e_w - 1.0) <= 0.2:
            continue
        if kind == "josephson":
            e_x = exact[k]
        else:  # self-trapped levels aligned from the top of the band
            back = wkb.energies.size - 1 - k
            e_x = exact[exact.size - 1 - back]
        errors.append(abs(e_w - e_x))
    return max(errors)


def test_wkb_accuracy_improves_with_j():
    assert _wkb_errors(500.0) < 0.6 * _wkb_errors(250.0)
