import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nlspin.ensembles import BranchedEigenstates
from nlspin.eigensolver import eigh_tridiagonal
from nlspin.model import SpinModel, build_hamiltonian

_EIG_CACHE = {}


def cached_eig(j, lam=10.0):
    """Session-wide cache: full decompositions dominate the suite runtime."""
    key = (j, lam)
    if key not in _EIG_CACHE:
        model = SpinModel(j=j, lam=lam)
        eig = eigh_tridiagonal(build_hamiltonian(model))
        _EIG_CACHE[key] = (model, eig, BranchedEigenstates(model, eig))
        # keep at most the three largest problems in memory
        while len(_EIG_CACHE) > 6:
            smallest = min(_EIG_CACHE, key=lambda k: k[0])
            if smallest == key:
                break
            del _EIG_CACHE[smallest]
    return _EIG_CACHE[key]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
