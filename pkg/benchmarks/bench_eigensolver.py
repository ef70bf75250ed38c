"""Benchmark the tridiagonal eigensolver lanes.

Times the compiled QL core against the pure-Python twin on growing
Hamiltonians, cross-checks both against scipy's LAPACK route, and
asserts the performance budget: a full N = 4001 decomposition on one
core in at most 60 seconds (compiled lane).

    python benchmarks/bench_eigensolver.py [--full]

Without --full the python lane stops at N = 801 and the budget matrix is
N = 2001; --full runs the N = 4001 budget case.
"""

import argparse
import time

import numpy as np

from nlspin.eigensolver import HAVE_COMPILED, eigh_tridiagonal
from nlspin.model import SpinModel, build_hamiltonian

try:
    from scipy.linalg import eigh_tridiagonal as scipy_eigh

    HAVE_SCIPY = True
except ImportError:
    HAVE_SCIPY = False


def run_case(tri, backend):
    start = time.perf_counter()
    eig = eigh_tridiagonal(tri, backend=backend)
    elapsed = time.perf_counter() - start
    return elapsed, eig


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--full", action="store_true",
                        help="include the N = 4001 budget case")
    args = parser.parse_args()

    sizes = [100.0, 200.0, 400.0, 800.0]
    budget_j = 2000.0 if args.full else 1000.0

    print(f"compiled core available: {HAVE_COMPILED}")
    print(f"{'N':>6} {'compiled [s]':>13} {'python [s]':>11} "
          f"{'speedup':>8} {'vs scipy':>9} {'max |dλ|':>10}")

    for j in sizes:
        model = SpinModel(j=j, lam=10.0)
        tri = build_hamiltonian(model)
        t_c, eig_c = run_case(tri, "compiled") if HAVE_COMPILED else (float("nan"), None)
        if j <= 800.0:
            t_p, eig_p = run_case(tri, "python")
        else:
            t_p, eig_p = float("nan"), None
        t_s = float("nan")
        dlam = float("nan")
        if HAVE_SCIPY:
            start = time.perf_counter()
            ref, _ = scipy_eigh(tri.diag, tri.offdiag)
            t_s = time.perf_counter() - start
            if eig_c is not None:
                dlam = float(np.max(np.abs(eig_c.eigenvalues - ref)))
        speed = t_p / t_c if eig_p is not None and eig_c is not None else float("nan")
        print(f"{model.dim:>6} {t_c:>13.3f} {t_p:>11.3f} {speed:>8.1f} "
              f"{t_s:>9.3f} {dlam:>10.2e}")

    model = SpinModel(j=budget_j, lam=10.0)
    tri = build_hamiltonian(model)
    t_budget, eig = run_case(tri, "compiled" if HAVE_COMPILED else "python")
    print(f"\nbudget case N = {model.dim}: {t_budget:.1f} s "
          f"(residual {eig.residual_max(tri):.2e})")
    if args.full:
        assert t_budget <= 60.0, (
            f"N = 4001 decomposition took {t_budget:.1f} s, over the 60 s budget"
        )
        print("performance budget met: N = 4001 within 60 s")


if __name__ == "__main__":
    main()
