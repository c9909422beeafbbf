"""Riesz potentials and the Hartree nonlinearity.

``I_gamma f = |.|^-gamma * f`` is applied as the Fourier multiplier
``C(d, gamma) |xi|^(gamma - d)`` with
``C = 2^(d-gamma) pi^(d/2) Gamma((d-gamma)/2) / Gamma(gamma/2)``.

The multiplier is singular at ``xi = 0``.  Three treatments of the zero
mode are available:

``"zeta"`` (default)
    Weight chosen so the lattice sum of ``|xi|^a`` reproduces the integral
    to leading order (Epstein zeta correction).  The remaining error is
    ``O(dxi^(gamma+2))`` at a fixed physical point, i.e. ``O(L^-(gamma+2))``.
``"cell"``
    Average of the multiplier over the zero frequency cell.  Leaves a
    constant offset of order ``L^-gamma``.
``"zero"``
    Drop the mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .clifford import CliffordRep
from .grid import Space, SpectralGrid, SpinorField, fft_array, ifft_array

ZERO_MODES = ("zeta", "cell", "zero")


def riesz_constant(d: int, gamma: float) -> float:
    """Fourier transform of ``|x|^-gamma`` is ``riesz_constant * |xi|^(gamma-d)``."""
    return float(
        2 ** (d - gamma) * np.pi ** (d / 2) * special.gamma((d - gamma) / 2) / special.gamma(gamma / 2)
    )


def epstein_zeta(s: float, d: int) -> float:
    """Analytic continuation of ``sum_{k in Z^d, k != 0} |k|^-s`` for ``0 < s < d``.

    Theta-function splitting; terms decay like ``exp(-pi |k|^2)``.
    """
    if not 0 < s < d:
        raise ValueError(f"need 0 < s < d, got s={s}, d={d}")
    K = 4 if d <= 4 else 3
    ks = np.arange(-K, K + 1, dtype=float)
    r2 = np.zeros(1)
    for _ in range(d):
        r2 = (r2[:, None] + ks[None, :] ** 2).ravel()
    r2 = r2[r2 > 0]
    a = np.pi * r2
    u, v = s / 2, (d - s) / 2
    tail = special.gammaincc(u, a) * special.gamma(u) * a ** (-u)
    tail += special.gammaincc(v, a) * special.gamma(v) * a ** (-v)
    total = tail.sum() - 2 / (d - s) - 2 / s
    return float(total * np.pi**u / special.gamma(u))


def _cube_power_mean(a: float, d: int) -> float:
    """Mean of ``|xi|^a`` over the cube ``[-1/2, 1/2]^d``."""
    # split the cube into d pyramids by the largest coordinate
    if d == 1:
        smooth = 1.0
    else:
        t, w = np.polynomial.legendre.leggauss(24)
        t, w = (t + 1) / 2, w / 2
        mesh = np.meshgrid(*([t] * (d - 1)), indexing="ij")
        wm = np.prod(np.meshgrid(*([w] * (d - 1)), indexing="ij"), axis=0)
        smooth = float(np.sum(wm * (1 + sum(m * m for m in mesh)) ** (a / 2)))
    return 2**d * d * smooth / (a + d) * 0.5 ** (a + d)


@lru_cache(maxsize=32)
def riesz_multiplier(grid: SpectralGrid, gamma: float, zero_mode: str = "zeta") -> np.ndarray:
    d = grid.d
    if not 0 < gamma < d:
        raise ValueError(f"Riesz exponent must satisfy 0 < gamma < d={d}, got {gamma}")
    if zero_mode not in ZERO_MODES:
        raise ValueError(f"zero_mode must be one of {ZERO_MODES}")
    C = riesz_constant(d, gamma)
    a = gamma - d
    xi2 = grid.xi2.copy()
    zero = (grid.N // 2,) * d
    xi2[zero] = 1.0
    m = C * xi2 ** (a / 2)
    if zero_mode == "zeta":
        m[zero] = -C * epstein_zeta(-a, d) * grid.dxi**a
    elif zero_mode == "cell":
        m[zero] = C * _cube_power_mean(a, d) * grid.dxi**a
    else:
        m[zero] = 0.0
    m.setflags(write=False)
    return m


def riesz_potential(f: np.ndarray, grid: SpectralGrid, gamma: float, zero_mode: str = "zeta") -> np.ndarray:
    """``|.|^-gamma * f`` for a scalar physical-space array (or a batch with leading axes)."""
    f = np.asarray(f)
    if f.shape[f.ndim - grid.d :] != grid.shape:
        raise ValueError(f"array shape {f.shape} does not match grid {grid.shape}")
    m = riesz_multiplier(grid, float(gamma), zero_mode)
    out = ifft_array(fft_array(f, grid) * m, grid)
    return out.real if np.isrealobj(f) else out


def zero_mode_difference(f: np.ndarray, grid: SpectralGrid, gamma: float) -> float:
    """Max change of ``I_gamma f`` between the ``zeta`` and ``cell`` zero-mode choices."""
    a = riesz_potential(f, grid, gamma, "zeta")
    b = riesz_potential(f, grid, gamma, "cell")
    return float(np.abs(a - b).max())


@dataclass(frozen=True, eq=False)
class HartreeParams:
    gamma: float
    lam: float
    rep: CliffordRep
    zero_mode: str = "zeta"

    def __post_init__(self):
        if not 0 < self.gamma < self.rep.d:
            raise ValueError(f"need 0 < gamma < d={self.rep.d}, got gamma={self.gamma}")
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")
        if self.zero_mode not in ZERO_MODES:
            raise ValueError(f"zero_mode must be one of {ZERO_MODES}")


def _check_fields(params: HartreeParams, *fields: SpinorField) -> None:
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise ValueError("fields are on different grids")
        if f.space is not Space.PHYSICAL:
            raise ValueError("Hartree terms are evaluated in physical space")
        if f.n != params.rep.n or grid.d != params.rep.d:
            raise ValueError(
                f"field (d={grid.d}, n={f.n}) does not match representation (d={params.rep.d}, n={params.rep.n})"
            )


def beta_density(psi1: SpinorField, psi2: SpinorField, beta: np.ndarray) -> np.ndarray:
    """Pointwise ``<psi1, beta psi2> = sum_j psi1_j conj((beta psi2)_j)``."""
    bpsi2 = psi2.data @ beta.T
    return np.sum(psi1.data * bpsi2.conj(), axis=-1)


def hartree_potential(psi1: SpinorField, psi2: SpinorField, params: HartreeParams) -> np.ndarray:
    """``lambda |.|^-gamma * <psi1, beta psi2>`` (complex unless ``psi1 is psi2``)."""
    _check_fields(params, psi1, psi2)
    rho = beta_density(psi1, psi2, params.rep.beta)
    if psi1 is psi2:
        rho = rho.real
    return params.lam * riesz_potential(rho, psi1.grid, params.gamma, params.zero_mode)


def hartree_trilinear(psi1: SpinorField, psi2: SpinorField, psi3: SpinorField, params: HartreeParams) -> SpinorField:
    """``(lambda |.|^-gamma * <psi1, beta psi2>) beta psi3``."""
    _check_fields(params, psi1, psi2, psi3)
    V = hartree_potential(psi1, psi2, params)
    return psi3.like(V[..., None] * (psi3.data @ params.rep.beta.T))


def hartree_nonlinearity(psi: SpinorField, params: HartreeParams) -> SpinorField:
    """``A(psi) = (lambda |.|^-gamma * <psi, beta psi>) beta psi`` with a real potential."""
    _check_fields(params, psi)
    V = hartree_potential(psi, psi, params)
    return psi.like(V[..., None] * (psi.data @ params.rep.beta.T))
