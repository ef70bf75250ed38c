"""Pure-Python twin of the compiled QL kernel.

Same implicit-shift QL iteration and rotation sequence as ``_ql_cython``,
with the two-row eigenvector updates done as numpy slice operations.  Used
when the extension is not built (or forced via NLSPIN_PURE_PYTHON=1); fast
enough for moderate n, the compiled core is the production path.
"""

import math

import numpy as np

_EPS = np.finfo(float).eps


def ql_implicit_shift(d, e, vt, max_sweeps):
    """In-place QL iteration; see the compiled kernel for the contract."""
    n = d.shape[0]
    if n <= 1:
        return 0

    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return l + 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            interrupted = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    interrupted = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b

                f_row = vt[i + 1].copy()
                vt[i + 1] = s * vt[i] + c * f_row
                vt[i] = c * vt[i] - s * f_row
            if not interrupted:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return 0
