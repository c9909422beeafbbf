"""Free Dirac evolution ``U(t) = exp(-i t H(xi))`` as a Fourier multiplier.

``H(xi) = m beta + sum_j alpha_j xi_j`` squares to ``(m^2 + |xi|^2) I``, so

    exp(-i t H) = cos(t w) I - i sin(t w)/w H,      w = sqrt(m^2 + |xi|^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import CliffordRep
from .grid import Space, SpectralGrid, SpinorField, to_space

SINC_SWITCH = 1e-4


@dataclass(frozen=True, eq=False)
class PropagatorParams:
    mass: float
    rep: CliffordRep
    grid: SpectralGrid

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError(f"mass must be nonnegative, got {self.mass}")
        if self.rep.d != self.grid.d:
            raise ValueError("representation and grid dimensions differ")


def dirac_symbol(xi, params: PropagatorParams | None = None, *, rep: CliffordRep | None = None, mass: float | None = None) -> np.ndarray:
    """``H(xi)`` for a single frequency vector."""
    rep = rep if rep is not None else params.rep
    mass = mass if mass is not None else params.mass
    return rep.symbol(xi, mass)


def sin_over_w(t, w) -> np.ndarray:
    """``sin(t w)/w``, with a 4-term Taylor series for ``|t w| < 1e-4``."""
    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    z = t * w
    small = np.abs(z) < SINC_SWITCH
    z2 = z * z
    series = t * (1 - z2 / 6 * (1 - z2 / 20 * (1 - z2 / 42)))
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.sin(z) / w
    return np.where(small, series, exact)


def propagator_matrix(xi, t: float, mass: float, rep: CliffordRep) -> np.ndarray:
    """Closed-form ``exp(-i t H(xi))`` for one frequency vector."""
    H = rep.symbol(xi, mass)
    w = np.sqrt(mass**2 + float(np.dot(np.atleast_1d(xi), np.atleast_1d(xi))))
    return np.cos(t * w) * np.eye(rep.n) - 1j * sin_over_w(t, w) * H


def apply_symbol(data: np.ndarray, grid: SpectralGrid, rep: CliffordRep, mass: float) -> np.ndarray:
    """``H(xi) fhat(xi)`` on frequency-space data of shape ``grid.shape + (n,)``."""
    out = mass * (data @ rep.beta.T)
    for j, a in enumerate(rep.alphas):
        out += grid.xi[j][..., None] * (data @ a.T)
    return out


def apply_propagator(psi: SpinorField, t: float, params: PropagatorParams) -> SpinorField:
    """``U(t) psi``; the result is returned in the space ``psi`` came in."""
    if psi.grid != params.grid or psi.n != params.rep.n:
        raise ValueError("field does not match propagator grid/representation")
    if t == 0:
        return psi.like(psi.data.copy())
    space = psi.space
    fh = to_space(psi, Space.FREQUENCY)
    out = fh.like(propagate_frequency_data(fh.data, t, params))
    return to_space(out, space)


def propagate_frequency_data(data: np.ndarray, t: float, params: PropagatorParams) -> np.ndarray:
    if t == 0:
        return data.copy()
    grid, rep, m = params.grid, params.rep, params.mass
    w = np.sqrt(m * m + grid.xi2)
    c = np.cos(t * w)[..., None]
    s = sin_over_w(t, w)[..., None]
    return c * data - 1j * s * apply_symbol(data, grid, rep, m)
