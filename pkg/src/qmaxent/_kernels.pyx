# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled level-sum kernel.

Every solver evaluation reduces to four degeneracy-weighted sums over the
energy levels of a spectrum.  This loop dominates the runtime of truncation
sweeps, so it lives here; ``_kernels_py`` is the numpy twin used when the
extension is not built.
"""

from libc.math cimport exp, log1p, fabs


cdef inline void _add(double x, double* s, double* c) noexcept nogil:
    # Neumaier variant of Kahan summation: robust when |x| > |s|
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def level_sums(const double[::1] e, const double[::1] d, const double[::1] g,
               double U, double kappa, double expo, bint boltzmann,
               bint want_q, double q):
    """Return ``(sum g*w, sum g*w*E, sum g*w*|E|, sum g*w**q)``.

    ``d`` is each level's distance from the anchor level and ``E = e - U``.
    The weight relative to the anchor is

    * ``boltzmann``: ``w = exp(-kappa*d)``
    * otherwise:     ``w = (1 + kappa*d)**expo``

    Sums run in ascending index order.
    """
    cdef Py_ssize_t n = e.shape[0]
    cdef Py_ssize_t i
    cdef double lw, gw, E
    cdef double sz = 0.0, cz = 0.0
    cdef double sr = 0.0, cr = 0.0
    cdef double sa = 0.0, ca = 0.0
    cdef double sq = 0.0, cq = 0.0
    if d.shape[0] != n or g.shape[0] != n:
        raise ValueError("level arrays differ in length")
    with nogil:
        for i in range(n):
            if d[i] == 0.0:
                lw = 0.0
            elif boltzmann:
                lw = -kappa * d[i]
            else:
                lw = expo * log1p(kappa * d[i])
            E = e[i] - U
            gw = g[i] * exp(lw)
            _add(gw, &sz, &cz)
            _add(gw * E, &sr, &cr)
            _add(gw * fabs(E), &sa, &ca)
            if want_q:
                _add(g[i] * exp(q * lw), &sq, &cq)
    return (sz + cz, sr + cr, sa + ca, sq + cq)
