# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled QL kernel for the symmetric tridiagonal eigenproblem.

Implicit-shift QL with Wilkinson shifts and Givens accumulation of the
eigenvector matrix.  Eigenvectors are accumulated into the rows of ``vt``
(row k is eigenvector k) so every rotation touches two contiguous rows.

The pure-Python twin of this routine lives in ``_ql_python``; both apply
the identical rotation sequence.
"""

from libc.math cimport fabs, hypot

cimport cython


def ql_implicit_shift(double[::1] d, double[::1] e, double[:, ::1] vt,
                      int max_sweeps):
    """Run the QL iteration in place.

    d: diagonal, length n; overwritten with unsorted eigenvalues.
    e: off-diagonal in e[0:n-1]; e[n-1] is scratch; destroyed.
    vt: n x n identity on entry; rows become eigenvectors.
    Returns 0 on success, or 1-based index of the eigenvalue that failed
    to converge within max_sweeps.
    """
    cdef int n = d.shape[0]
    cdef int l, m, i, w, sweeps
    cdef double dd, g, r, s, c, p, f, b
    cdef double eps = 2.220446049250313e-16
    cdef double *row_i
    cdef double *row_i1

    if n <= 1:
        return 0

    with nogil:
        for l in range(n):
            sweeps = 0
            while True:
                # locate the first negligible off-diagonal at or above l
                m = l
                while m < n - 1:
                    dd = fabs(d[m]) + fabs(d[m + 1])
                    if fabs(e[m]) <= eps * dd:
                        break
                    m += 1
                if m == l:
                    break
                sweeps += 1
                if sweeps > max_sweeps:
                    with gil:
                        return l + 1

                # Wilkinson shift from the leading 2x2 block
                g = (d[l + 1] - d[l]) / (2.0 * e[l])
                r = hypot(g, 1.0)
                if g >= 0.0:
                    g = d[m] - d[l] + e[l] / (g + r)
                else:
                    g = d[m] - d[l] + e[l] / (g - r)
                s = 1.0
                c = 1.0
                p = 0.0
                for i in range(m - 1, l - 1, -1):
                    f = s * e[i]
                    b = c * e[i]
                    r = hypot(f, g)
                    e[i + 1] = r
                    if r == 0.0:
                        # underflow recovery: drop the rotation chain
                        d[i + 1] -= p
                        e[m] = 0.0
                        break
                    s = f / r
                    c = g / r
                    g = d[i + 1] - p
                    r = (d[i] - g) * s + 2.0 * c * b
                    p = s * r
                    d[i + 1] = g + p
                    g = c * r - b

                    row_i = &vt[i, 0]
                    row_i1 = &vt[i + 1, 0]
                    for w in range(n):
                        f = row_i1[w]
                        row_i1[w] = s * row_i[w] + c * f
                        row_i[w] = c * row_i[w] - s * f
                else:
                    d[l] -= p
                    e[l] = g
                    e[m] = 0.0
    return 0
