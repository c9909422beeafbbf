"""Independent reference computations shared by the test modules."""

import numpy as np
from scipy import integrate, linalg


def riesz_gaussian_1d(x, gamma, width=1.0):
    """``int |x-y|^-gamma exp(-y^2/(2 width^2)) dy`` with the singularity split off at ``y = x``.

    Each half uses the algebraic-weight rule of QUADPACK, which integrates the
    endpoint singularity exactly.
    """
    R = 12 * width + abs(x)
    f = lambda y: np.exp(-(y**2) / (2 * width**2))
    left = integrate.quad(f, x - R, x, weight="alg", wvar=(0.0, -gamma), epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    right = integrate.quad(f, x, x + R, weight="alg", wvar=(-gamma, 0.0), epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return left + right


def dense_propagator(H, t):
    """``exp(-i t H)`` by scaling and squaring."""
    return linalg.expm(-1j * t * H)

