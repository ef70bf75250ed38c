"""Batch front-end: builds models, runs experiments, writes CSV/JSON.

Subcommands
    spectrum      per-level table: energies, parity, branch-resolved jx/jz
    portrait      classical orbits plus the separatrix polyline
    ensemble      diagonal vs micro-canonical long-time observables
    dynamics      time series of jx (and jz) for coherent initial states
    scaling       exact vs predicted separatrix jx across spin sizes
    semiclassics  orbit-density normalization, trajectory averages, or
                  area-rule levels vs exact ones

Every output starts with a '#' metadata block (tool version, resolved
configuration, column units); identical configurations produce
byte-identical files apart from the timestamp line.  Exit codes: 0 ok,
2 configuration error, 3 numerical failure, 4 out-of-regime request.
"""

import argparse
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import classical
from .eigensolver import ConvergenceError, eigh_tridiagonal
from .ensembles import (
    BranchedEigenstates,
    alias_safe_dt,
    diagonal_average,
    diagonal_ensemble,
    evolve_expectation,
    microcanonical_average,
    parity_expectations,
)
from .model import SpinModel, build_hamiltonian, observable_matrix
from .semiclassics import OutOfRegimeError, predict_lto, saddle_model_for_phase
from .states import coherent_state_for_energy

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_REGIME = 4


class ConfigError(ValueError):
    pass


def _parse_floats(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}: {exc}") from None


def _spectrum_rows(model):
    eig = eigh_tridiagonal(build_hamiltonian(model))
    branched = BranchedEigenstates(model, eig)
    parities = parity_expectations(eig)
    rows = []
    for n in range(eig.n):
        rows.append(
            (
                n,
                eig.eigenvalues[n],
                branched.energies[n],
                parities[n],
                branched.labels[n],
                branched.jx_values[n],
                branched.jz_values[n],
            )
        )
    return rows


def _cmd_spectrum(args):
    header = [
        "columns: n, E_abs (absolute energy), E (per-spin energy), parity "
        "(<n|P|n>), branch (0 single, +1/-1 doublet member), jx (<n|Jx|n>/J), "
        "jz (branch-resolved <n|Jz|n>/J)"
    ]
    rows = []
    for j in args.J:
        model = SpinModel(j=j, lam=args.lam)
        for row in _spectrum_rows(model):
            rows.append((j,) + row)
    cols = ["J", "n", "E_abs", "E", "parity", "branch", "jx", "jz"]
    return cols, rows, header


def _cmd_portrait(args):
    lam = args.lam
    header = [
        "columns: orbit id (sep = separatrix polyline), orbit class, E "
        "(per-spin), t (time along orbit, nan for polylines), z, phi"
    ]
    rows = []
    phis = np.linspace(-math.pi, math.pi, 721)
    for sign in (1, -1):
        for phi in phis:
            z = sign * classical.separatrix_z(phi, lam)
            rows.append((f"sep{'p' if sign > 0 else 'm'}", "separatrix", 1.0,
                         math.nan, z, phi))
    for idx, energy in enumerate(args.energy):
        starts = []
        if energy < 1.0:
            starts.append(classical.ClassicalState(
                z=classical.invert_energy_for_z(energy, 0.0, lam), phi=0.0))
        else:
            for branch in (1, -1):
                starts.append(classical.ClassicalState(
                    z=classical.invert_energy_for_z(energy, 0.0, lam, branch=branch),
                    phi=0.0))
        for k, state in enumerate(starts):
            orbit = classical.integrate_orbit(state, lam, dt=args.dt)
            for t, z, phi in zip(orbit.times, orbit.z, orbit.phi):
                rows.append((f"orbit{idx}_{k}", orbit.orbit_class, energy, t, z, phi))
    cols = ["id", "class", "E", "t", "z", "phi"]
    return cols, rows, header


def _ensemble_cell(j, lam, energy, phi, window):
    model = SpinModel(j=j, lam=lam)
    eig = eigh_tridiagonal(build_hamiltonian(model))
    branched = BranchedEigenstates(model, eig)
    state = coherent_state_for_energy(model, energy, phi)
    ens = diagonal_ensemble(model, state, eig)
    branch = "+" if energy > 1.0 else "both"
    return (
        j,
        phi,
        energy,
        state.z_mean,
        diagonal_average(ens, branched, "jx"),
        diagonal_average(ens, branched, "jz"),
        microcanonical_average(branched, "jx", energy, window=window, branch=branch),
        microcanonical_average(branched, "jz", energy, window=window, branch=branch),
    )


def _cmd_ensemble(args):
    header = [
        "columns: J, phi (initial phase), E (per-spin), z (initial imbalance), "
        "jx_diag, jz_diag (diagonal-ensemble <O>/J), jx_micro, jz_micro "
        f"(micro-canonical over {args.window} nearest states, + branch for E>1)"
    ]
    cells = [
        (j, args.lam, args.energy, phi, args.window)
        for j in args.J
        for phi in args.phi
    ]
    rows = _run_cells(_ensemble_cell, cells, args.threads)
    cols = ["J", "phi", "E", "z", "jx_diag", "jz_diag", "jx_micro", "jz_micro"]
    return cols, rows, header


def _dynamics_cell(j, lam, energy, phi, t_max, dt):
    model = SpinModel(j=j, lam=lam)
    eig = eigh_tridiagonal(build_hamiltonian(model))
    state = coherent_state_for_energy(model, energy, phi)
    step = dt if dt is not None else alias_safe_dt(eig)
    times = np.arange(0.0, t_max + step, step)
    jx = observable_matrix(model, "jx")
    series = evolve_expectation(model, state, eig, jx, times)
    stride = max(1, times.size // 4000)
    return [
        (j, phi, energy, t, v)
        for t, v in zip(series.times[::stride], series.values[::stride])
    ]


def _cmd_dynamics(args):
    header = [
        "columns: J, phi (initial phase), E (per-spin), t (time, hbar = 1), "
        "jx (<Jx>(t)/J)"
    ]
    cells = [
        (j, args.lam, args.energy, phi, args.t_max, args.dt)
        for j in args.J
        for phi in args.phi
    ]
    rows = []
    for block in _run_cells(_dynamics_cell, cells, args.threads):
        rows.extend(block)
    cols = ["J", "phi", "E", "t", "jx"]
    return cols, rows, header


def _scaling_cell(j, lam, energy, phis):
    model = SpinModel(j=j, lam=lam)
    eig = eigh_tridiagonal(build_hamiltonian(model))
    branched = BranchedEigenstates(model, eig)
    out = []
    for phi in phis:
        state = coherent_state_for_energy(model, energy, phi)
        ens = diagonal_ensemble(model, state, eig)
        out.append((j, phi, diagonal_average(ens, branched, "jx")))
    return out


def _cmd_scaling(args):
    if abs(args.energy - 1.0) > 1e-9:
        raise ConfigError("the scaling experiment is defined on the separatrix "
                          "(--energy 1.0)")
    for phi in args.phi:
        try:
            predict_lto(SpinModel(j=args.J[0], lam=args.lam), phi)
        except OutOfRegimeError as exc:
            raise exc
    cells = [(j, args.lam, args.energy, tuple(args.phi)) for j in args.J]
    exact = {}
    for block in _run_cells(_scaling_cell, cells, args.threads):
        for j, phi, value in block:
            exact[(j, phi)] = value

    x = np.array([1.0 / math.sqrt(j * math.log(j)) for j in args.J])
    lam = args.lam
    slope_coeff = (3.0 + lam) / (3.0 * (lam - 1.0))
    rows = []
    for phi in args.phi:
        y = np.array([exact[(j, phi)] for j in args.J])
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (intercept + slope * x)
        r2 = 1.0 - resid.var() / y.var()
        f_fit = (slope_coeff / slope) ** 2 if slope > 0 else math.nan
        f_semi = saddle_model_for_phase(SpinModel(j=args.J[0], lam=lam), phi).f_factor
        for j in args.J:
            jx_pred = -1.0 + slope_coeff / math.sqrt(f_fit * j * math.log(j))
            rows.append((j, phi, exact[(j, phi)], jx_pred, f_fit, f_semi,
                         slope, intercept, r2))
    cols = ["J", "phi", "jx_exact", "jx_pred", "F_fit", "F_semiclassical",
            "slope", "intercept", "R2"]
    header = [
        "columns: J, phi, jx_exact (diagonal ensemble), jx_pred (scaling law "
        "with fitted F), F_fit, F_semiclassical (1/(2 sigma^2 J)), slope/"
        "intercept/R2 of the per-phi linear fit of jx_exact vs 1/sqrt(J ln J)"
    ]
    return cols, rows, header


def _cmd_semiclassics(args):
    lam = args.lam
    if args.table == "omega":
        header = ["columns: E (per-spin), side (branch label: 0 loop, +1 one "
                  "self-trapped branch), inv_omega (inverse normalization)"]
        rows = []
        for energy in args.energy:
            side = 1 if energy > 1 else 0
            rows.append((energy, side, 1.0 / classical.omega_norm(energy, lam)))
        return ["E", "side", "inv_omega"], rows, header
    if args.table == "ewf":
        header = ["columns: E (per-spin), s (branch), jx, jz (orbit-averaged "
                  "observables)"]
        rows = []
        for energy in args.energy:
            branches = (1, -1) if energy > 1 else (0,)
            for s in branches:
                rows.append((energy, s,
                             classical.ewf_observable(energy, s, lam, "jx"),
                             classical.ewf_observable(energy, s, lam, "jz")))
        return ["E", "s", "jx", "jz"], rows, header
    if args.table == "wkb":
        model = SpinModel(j=args.J[0], lam=lam)
        wkb = classical.wkb_energies(model)
        eig = eigh_tridiagonal(build_hamiltonian(model))
        exact = eig.eigenvalues / model.j
        header = ["columns: k (level index), E_wkb (area-rule level), E_exact "
                  "(matched exact level), kind, near_separatrix (accuracy not "
                  "claimed there)"]
        rows = []
        n_lo = sum(1 for kind in wkb.kinds if kind == "josephson")
        for k, (e_wkb, kind, flag) in enumerate(
            zip(wkb.energies, wkb.kinds, wkb.near_separatrix)
        ):
            if kind == "josephson":
                e_exact = exact[k] if k < exact.size else math.nan
            else:
                back = wkb.energies.size - 1 - k
                e_exact = exact[exact.size - 1 - back] if back < exact.size else math.nan
            rows.append((k, e_wkb, e_exact, kind, bool(flag)))
        return ["k", "E_wkb", "E_exact", "kind", "near_separatrix"], rows, header
    raise ConfigError(f"unknown table {args.table!r}")


def _run_cells(fn, cells, threads):
    if threads <= 1 or len(cells) <= 1:
        return [fn(*cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, *cell) for cell in cells]
        return [f.result() for f in futures]  # gather in submission order


def _format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def _write_output(path, cols, rows, header_lines, config, fmt):
    meta = [
        f"nlspin {__version__}",
        f"generated: {datetime.now(timezone.utc).isoformat()}",
        f"config: {json.dumps(config, sort_keys=True)}",
    ] + header_lines
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            if fmt == "csv":
                for line in meta:
                    fh.write(f"# {line}\n")
                fh.write(",".join(cols) + "\n")
                for row in rows:
                    fh.write(",".join(_format_value(v) for v in row) + "\n")
            else:
                payload = {
                    "meta": meta,
                    "columns": cols,
                    "rows": [[_format_value(v) for v in row] for row in rows],
                }
                json.dump(payload, fh, indent=1)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nlspin",
        description="Nonlinear-spin thermalization experiments (exact "
        "diagonalization plus semiclassics).",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, energies=False):
        p.add_argument("--J", type=_parse_floats, default=[100.0],
                       help="comma-separated spin sizes")
        p.add_argument("--lambda", dest="lam", type=float, default=10.0,
                       help="nonlinearity (must exceed 1)")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel grid cells (within-cell runs stay "
                       "single-threaded)")

    p = sub.add_parser("spectrum", help="eigenlevel table")
    common(p)

    p = sub.add_parser("portrait", help="classical orbits and separatrix")
    common(p)
    p.add_argument("--energy", type=_parse_floats, default=[0.5, 3.0])
    p.add_argument("--dt", type=float, default=5e-4)

    p = sub.add_parser("ensemble", help="diagonal vs micro-canonical averages")
    common(p)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--phi", type=_parse_floats, required=True)
    p.add_argument("--window", type=int, default=21)

    p = sub.add_parser("dynamics", help="time series of jx")
    common(p)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--phi", type=_parse_floats, required=True)
    p.add_argument("--t-max", type=float, default=1000.0)
    p.add_argument("--dt", type=float, default=None,
                   help="sampling step (default: alias-safe for the spectrum)")

    p = sub.add_parser("scaling", help="separatrix jx scaling across J")
    common(p)
    p.add_argument("--energy", type=float, default=1.0)
    p.add_argument("--phi", type=_parse_floats,
                   default=[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])

    p = sub.add_parser("semiclassics", help="omega/EWF/WKB tables")
    common(p)
    p.add_argument("--table", choices=("omega", "ewf", "wkb"), required=True)
    p.add_argument("--energy", type=_parse_floats,
                   default=[0.5, 0.9, 1.1, 2.0, 3.0])

    return parser


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "portrait": _cmd_portrait,
    "ensemble": _cmd_ensemble,
    "dynamics": _cmd_dynamics,
    "scaling": _cmd_scaling,
    "semiclassics": _cmd_semiclassics,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("command", "out")  # the destination is not an input
    }
    config["command"] = args.command
    out_path = args.out or f"{args.command}.{args.format}"
    try:
        for j in args.J:
            SpinModel(j=j, lam=args.lam)  # validate before any computation
        cols, rows, header = _COMMANDS[args.command](args)
        _write_output(out_path, cols, rows, header, config, args.format)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, OutOfRegimeError):
            print(f"error: out-of-regime: {exc}", file=sys.stderr)
            return EXIT_REGIME
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
