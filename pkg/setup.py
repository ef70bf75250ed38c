"""Build script for the compiled eigensolver core.

    pip install -e . --no-build-isolation

builds nlspin._ql_cython in place.  The package still imports without the
extension; the pure-Python kernel is selected as a fallback at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # source tree without Cython: ship the fallback only
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "nlspin._ql_cython",
                sources=["src/nlspin/_ql_cython.pyx"],
                extra_compile_args=["-O3", "-march=native", "-funroll-loops"],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )

setup(ext_modules=extensions)
