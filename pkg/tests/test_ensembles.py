import math

import numpy as np
import pytest

from nlspin.classical import ewf_observable
from nlspin.ensembles import (
    BranchedEigenstates,
    TimeSeries,
    alias_safe_dt,
    diagonal_average,
    diagonal_ensemble,
    doublet_splitting,
    evolve_expectation,
    level_spacings,
    microcanonical_average,
    time_average,
)
from nlspin.model import SpinModel, StateVector, build_hamiltonian, observable_matrix
from nlspin.states import coherent_state, coherent_state_for_energy

from conftest import cached_eig


def test_diagonal_ensemble_eigenvector_input():
    model, eig, _ = cached_eig(5.0)
    state = StateVector(amplitudes=eig.eigenvectors[:, 3].astype(complex))
    ens = diagonal_ensemble(model, state, eig)
    assert ens.weights[3] == pytest.approx(1.0, abs=1e-12)
    assert np.sum(ens.weights) - ens.weights[3] < 1e-12


def test_diagonal_ensemble_completeness_and_parseval():
    model, eig, _ = cached_eig(5.0)
    h = build_hamiltonian(model)
    cs = coherent_state(model, 0.4, 1.2)
    ens = diagonal_ensemble(model, cs, eig)
    assert np.sum(ens.weights) == pytest.approx(1.0, abs=1e-12)
    mean_abs = float(ens.weights @ eig.eigenvalues)
    direct = np.vdot(cs.amplitudes, h.matvec(cs.amplitudes)).real
    assert abs(mean_abs - direct) < 1e-9 * model.j


def test_diagonal_average_eigenvector():
    model, eig, branched = cached_eig(60.0)
    k = 7  # well below the separatrix: no recombination involved
    state = StateVector(amplitudes=eig.eigenvectors[:, k].astype(complex))
    ens = diagonal_ensemble(model, state, eig)
    jx = observable_matrix(model, "jx")
    direct = np.vdot(state.amplitudes, jx.matvec(state.amplitudes)).real
    assert diagonal_average(ens, branched, "jx") == pytest.approx(
        direct / model.j, abs=1e-12
    )


def test_microcanonical_single_state_window():
    model, eig, branched = cached_eig(60.0)
    energy = branched.energies[11]
    got = microcanonical_average(branched, "jx", energy, window=1)
    assert got == pytest.approx(branched.jx_values[11])
    with pytest.raises(ValueError):
        microcanonical_average(branched, "jx", 0.5, branch="?")


def test_microcanonical_branch_filter():
    model, eig, branched = cached_eig(60.0)
    plus = microcanonical_average(branched, "jz", 3.0, branch="+")
    minus = microcanonical_average(branched, "jz", 3.0, branch="-")
    assert plus > 0 > minus
    assert plus == pytest.approx(-minus, abs=1e-6)


def test_branch_recombination_structure():
    model, eig, branched = cached_eig(300.0)
    assert branched.pairs, "self-trapped doublets must be detected"
    for (i, k), rot in zip(branched.pairs, branched.rotations):
        assert np.allclose(rot.T @ rot, np.eye(2), atol=1e-12)
        assert branched.labels[i] == 1 and branched.labels[k] == -1
        # s = +/- members carry opposite Jz of equal magnitude
        assert branched.jz_values[i] == pytest.approx(-branched.jz_values[k], abs=1e-6)
        assert branched.jz_values[i] >= 0
        u = branched.branch_vector(i)
        assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-10)
    # recombined values maximize |<Jz>|: any further rotation only loses
    i, k = branched.pairs[-1]
    jz = observable_matrix(model, "jz")
    u_plus = branched.branch_vector(i)
    best = abs(u_plus @ (jz.diag * u_plus)) / model.j
    v1 = eig.eigenvectors[:, i]
    v2 = eig.eigenvectors[:, k]
    for theta in np.linspace(0.1, math.pi - 0.1, 7):
        u = math.cos(theta) * v1 + math.sin(theta) * v2
        assert abs(u @ (jz.diag * u)) / model.j <= best + 1e-9


def test_branch_values_match_classical_orbit_averages():
    model, eig, branched = cached_eig(300.0)
    for k in range(0, eig.n, 60):
        energy = branched.energies[k]
        s = int(branched.labels[k])
        if abs(energy - 1.0) < 0.3 or energy > 4.9:
            continue
        classical = ewf_observable(energy, s, model.lam, "jz")
        assert branched.jz_values[k] == pytest.approx(classical, abs=0.02)


def test_evolution_conserves_energy_and_matches_t0():
    model, eig, branched = cached_eig(60.0)
    h = build_hamiltonian(model)
    cs = coherent_state_for_energy(model, 0.5, 1.0)
    times = np.linspace(0.0, 5.0, 101)
    series_h = evolve_expectation(model, cs, eig, h, times)
    assert np.max(np.abs(series_h.values - series_h.values[0])) < 1e-10
    jx = observable_matrix(model, "jx")
    series = evolve_expectation(model, cs, eig, jx, times)
    direct = np.vdot(cs.amplitudes, jx.matvec(cs.amplitudes)).real / model.j
    assert series.values[0] == pytest.approx(direct, abs=1e-12)
    with pytest.raises(ValueError):
        evolve_expectation(model, cs, eig, jx, np.array([-1.0]))


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries(times=np.array([0.0, 1.0]), values=np.array([1.0]))
    with pytest.raises(ValueError):
        TimeSeries(times=np.array([0.0, 0.0]), values=np.array([1.0, 1.0]))


def test_time_average_constant_series():
    series = TimeSeries(times=np.linspace(0, 10, 50), values=np.full(50, 2.5))
    assert time_average(series, 1.0, 8.0) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        time_average(series, 5.0, 10.0)
    with pytest.raises(ValueError):
        time_average(series, 1.0, 0.0)


def test_time_average_two_level_exact_period():
    # spin one-half: eigenvalues 2 and 3, so <Jx>(t) oscillates with period
    # 2 pi; averaging over one full period reproduces the diagonal value
    model, eig, branched = cached_eig(0.5)
    jx = observable_matrix(model, "jx")
    state = StateVector(amplitudes=np.array([0.8, 0.6], dtype=complex))
    period = 2 * math.pi
    times = np.linspace(0.0, 2 * period, 401)
    series = evolve_expectation(model, state, eig, jx, times)
    ens = diagonal_ensemble(model, state, eig)
    diag = diagonal_average(ens, branched, "jx")
    assert time_average(series, 0.0, period) == pytest.approx(diag, abs=1e-12)


def test_long_time_average_matches_diagonal_ensemble():
    model, eig, branched = cached_eig(100.0)
    jx = observable_matrix(model, "jx")
    cs = coherent_state_for_energy(model, 0.5, 1.0)
    ens = diagonal_ensemble(model, cs, eig)
    diag = diagonal_average(ens, branched, "jx")
    dt = alias_safe_dt(eig)
    times = np.arange(500.0, 1000.0 + dt, dt)
    series = evolve_expectation(model, cs, eig, jx, times)
    avg = time_average(series, 500.0, 500.0)
    assert abs(avg - diag) < 5 / math.sqrt(model.j)
    assert abs(avg - diag) < 0.01


def test_level_spacings_spin_half():
    model, eig, _ = cached_eig(0.5)
    spacings = level_spacings(model, eig)
    # absolute gap is 1.0; per-spin convention divides by j
    assert spacings == pytest.approx([2.0])


def test_bulk_spacing_halves_when_j_doubles():
    def local_spacing(j, energy):
        model, eig, _ = cached_eig(j)
        per_spin = eig.eigenvalues / model.j
        k = int(np.argmin(np.abs(per_spin - energy)))
        return float(np.median(np.diff(per_spin)[max(k - 10, 0) : k + 10]))

    for energy in (0.5, 3.0):
        ratio = local_spacing(500.0, energy) / local_spacing(1000.0, energy)
        assert ratio == pytest.approx(2.0, rel=0.2)


def test_doublet_splitting_decreases_exponentially():
    # E = 1.5 keeps the splitting above double-precision resolution for
    # this span of spin sizes
    logs = []
    for j in (20.0, 30.0, 40.0, 50.0):
        model, eig, _ = cached_eig(j)
        s = doublet_splitting(model, eig, 1.5)
        assert s > 0
        logs.append(math.log(s))
    assert all(np.diff(logs) < 0)
    drops = -np.diff(logs)
    assert drops.min() > 1.0  # at least e-fold suppression per step of 10


def test_doublet_splitting_band_check():
    model, eig, _ = cached_eig(20.0)
    with pytest.raises(ValueError):
        doublet_splitting(model, eig, 0.5)
