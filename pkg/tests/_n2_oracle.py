"""Exact moments for two knots by direct double integration over the order statistics.

Independent of the package's bracket-kernel quadrature; used to freeze
reference values in the moment tests.
"""

import numpy as np
from scipy import integrate


def _dir_moments(phi_j, d, theta):
    """E[A], E[B], E[A^2], E[B^2], E[AB] for a Dirichlet split (A, B, rest) of total theta."""
    ea, eb = phi_j, d
    ea2 = phi_j * (theta * phi_j + 1) / (theta + 1)
    eb2 = d * (theta * d + 1) / (theta + 1)
    eab = theta * phi_j * d / (theta + 1)
    return ea, eb, ea2, eb2, eab


def _regions(s):
    # (u1 range, u2 range as functions of u1) so that the bracket of s is fixed in each
    return [
        ((0.0, s), lambda u1: s, lambda u1: 1.0),    # u1 < s < u2
        ((0.0, s), lambda u1: u1, lambda u1: s),     # u2 < s
        ((s, 1.0), lambda u1: u1, lambda u1: 1.0),   # s < u1
    ]


def bk_n2(t, theta, f, finv=None):
    def moments(u2, u1, k):
        x = np.array([0.0, u1, u2, 1.0])
        y = np.array([0.0, f(u1), f(u2), 1.0])
        j = int(np.searchsorted(x, t, side="right") - 1)
        j = min(j, 2)
        r = (t - x[j]) / (x[j + 1] - x[j])
        ea, eb, ea2, eb2, eab = _dir_moments(y[j], y[j + 1] - y[j], theta)
        return 2 * (ea + r * eb if k == 1 else ea2 + 2 * r * eab + r * r * eb2)

    out = []
    for k in (1, 2):
        tot = 0.0
        for (a, b), lo, hi in _regions(t):
            tot += integrate.dblquad(moments, a, b, lo, hi, args=(k,), epsabs=1e-13, epsrel=1e-12)[0]
        out.append(tot)
    m1, m2 = out
    return m1, m2 - m1 * m1


def cdf_n2(t, theta, p, f, finv):
    s = f(t)
    e1 = 0.5
    e2 = (theta / 2 + 1) / (2 * (theta + 1))

    def moments(u2, u1, k):
        x = np.array([0.0, finv(u1), finv(u2), 1.0])
        # ordinates c0 + c1 * beta1
        c0 = np.array([0.0, 0.0, 1 - p, 1.0])
        c1 = np.array([0.0, 1 - p, p, 0.0])
        j = min(int(np.searchsorted(x, t, side="right") - 1), 2)
        r = (t - x[j]) / (x[j + 1] - x[j])
        a0 = c0[j] + r * (c0[j + 1] - c0[j])
        a1 = c1[j] + r * (c1[j + 1] - c1[j])
        return 2 * (a0 + a1 * e1 if k == 1 else a0 * a0 + 2 * a0 * a1 * e1 + a1 * a1 * e2)

    out = []
    for k in (1, 2):
        tot = 0.0
        for (a, b), lo, hi in _regions(s):
            tot += integrate.dblquad(moments, a, b, lo, hi, args=(k,), epsabs=1e-13, epsrel=1e-12)[0]
        out.append(tot)
    m1, m2 = out
    return m1, m2 - m1 * m1
