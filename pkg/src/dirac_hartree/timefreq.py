"""Short-time Fourier transform on the periodic grid and the norms built on it.

``V_g f(x, xi) = int exp(-i y.xi) f(y) conj(g(y - x)) dy`` is evaluated on a
Gabor lattice: every ``x_stride``-th grid node in ``x`` and every
``xi_stride``-th discrete frequency in ``xi``.  Window translates wrap
around the torus.

Vector-valued fields are reduced to ``|V_g f| = (sum_k |V_g f_k|^2)^(1/2)``
before any mixed norm is taken.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .grid import (
    Space,
    SpectralGrid,
    SpinorField,
    fft,
    fft_array,
    ifft,
    lebesgue_norm,
    lp_norm_array,
)

_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class Window:
    """Gaussian window ``exp(-|x|^2/(2 width^2))``, L2-normalized by default."""

    width: float = 1.0
    normalize: bool = True

    def samples(self, grid: SpectralGrid) -> np.ndarray:
        return _window_samples(self, grid)


@lru_cache(maxsize=64)
def _window_samples(w: Window, grid: SpectralGrid) -> np.ndarray:
    g = np.exp(-grid.x2 / (2 * w.width**2))
    edge = np.abs(g[grid.boundary_mask()]).max()
    if edge > 1e-12:
        raise ValueError(
            f"window of width {w.width} is {edge:.1e} at the edge of a box of half-width {grid.L}"
        )
    if w.normalize:
        g = g / np.sqrt(np.sum(g * g) * grid.cell)
    g.setflags(write=False)
    return g


@dataclass(frozen=True)
class ModulationParams:
    p: float = 2.0
    q: float = 2.0
    s: float = 0.0
    window: Window = field(default_factory=Window)
    x_stride: int = 1
    xi_stride: int = 1

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (v >= 1):
                raise ValueError(f"{name} must lie in [1, inf], got {v}")


def _check_strides(grid: SpectralGrid, xs: int, xis: int) -> None:
    for name, st in (("x_stride", xs), ("xi_stride", xis)):
        if st < 1 or grid.N % st:
            raise ValueError(f"{name}={st} does not divide N={grid.N}")


def _x_positions(grid: SpectralGrid, xs: int) -> np.ndarray:
    """Lattice translates as grid indices, shape ``(M, d)``."""
    idx = np.arange(0, grid.N, xs)
    mesh = np.meshgrid(*([idx] * grid.d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _shifted_windows(g: np.ndarray, grid: SpectralGrid, pos: np.ndarray) -> np.ndarray:
    """Stack of ``g(y - x_m)`` for the translate indices in ``pos``."""
    N, d = grid.N, grid.d
    j = np.arange(N)
    index = []
    for a in range(d):
        ia = (j[None, :] - pos[:, a, None] + N // 2) % N
        index.append(ia.reshape((len(pos),) + (1,) * a + (N,) + (1,) * (d - a - 1)))
    return g[tuple(index)]


@dataclass
class GaborCoefficients:
    """``V_g f`` on the lattice: ``coeffs[ix, *ixi, k]`` with ``ix`` the flattened x translate."""

    grid: SpectralGrid
    coeffs: np.ndarray
    x_positions: np.ndarray
    x_stride: int
    xi_stride: int

    @property
    def x_points(self) -> np.ndarray:
        return self.grid.nodes[self.x_positions]

    @property
    def xi_axis(self) -> np.ndarray:
        return self.grid.freqs[:: self.xi_stride]

    def magnitude(self) -> "GaborMagnitude":
        mag = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=-1))
        return GaborMagnitude(self.grid, mag, self.x_stride, self.xi_stride)


def _stft_chunks(f: SpinorField, window: Window, xs: int, xis: int):
    if f.space is not Space.PHYSICAL:
        raise ValueError("stft expects a physical-space field")
    grid = f.grid
    _check_strides(grid, xs, xis)
    g = np.conj(window.samples(grid))
    pos = _x_positions(grid, xs)
    per = grid.size * f.n
    B = max(1, _CHUNK_ELEMS // per)
    sl = (slice(None),) + (slice(None, None, xis),) * grid.d
    for start in range(0, len(pos), B):
        p = pos[start : start + B]
        prod = f.data[None] * _shifted_windows(g, grid, p)[..., None]
        # move component axis ahead of the spatial axes so fft_array acts on the last d
        prod = np.moveaxis(prod, -1, 1)
        V = fft_array(prod, grid)
        V = np.moveaxis(V, 1, -1)
        yield start, V[sl]


def stft(f: SpinorField, window: Window | None = None, x_stride: int = 1, xi_stride: int = 1) -> GaborCoefficients:
    """Full complex Gabor coefficients; memory ``O(M_x * M_xi * n)``."""
    window = window or Window()
    pos = _x_positions(f.grid, x_stride)
    m_xi = (f.grid.N // xi_stride,) * f.grid.d
    out = np.empty((len(pos),) + m_xi + (f.n,), dtype=complex)
    for start, V in _stft_chunks(f, window, x_stride, xi_stride):
        out[start : start + len(V)] = V
    return GaborCoefficients(f.grid, out, pos, x_stride, xi_stride)


@dataclass
class GaborMagnitude:
    """``|V_g f|`` on the lattice, reusable for any ``(p, q, s)``."""

    grid: SpectralGrid
    mag: np.ndarray
    x_stride: int
    xi_stride: int

    @property
    def x_weight(self) -> float:
        return (self.x_stride * self.grid.h) ** self.grid.d

    @property
    def xi_weight(self) -> float:
        return (self.xi_stride * self.grid.dxi) ** self.grid.d

    def xi2(self) -> np.ndarray:
        sl = (slice(None, None, self.xi_stride),) * self.grid.d
        return self.grid.xi2[sl]

    def norm(self, p: float, q: float, s: float = 0.0) -> float:
        if p < 1 or q < 1:
            raise ValueError(f"exponents must be >= 1, got p={p}, q={q}")
        mag = self.mag
        top = mag.max()
        if top == 0:
            return 0.0
        mag = mag / top
        if np.isinf(p):
            inner = mag.max(axis=0)
        else:
            inner = (self.x_weight * np.sum(mag**p, axis=0)) ** (1.0 / p)
        if s:
            inner = inner * (1.0 + self.xi2()) ** (s / 2)
        return top * lp_norm_array(inner, q, self.xi_weight)


def gabor_magnitude(f: SpinorField, window: Window | None = None, x_stride: int = 1, xi_stride: int = 1) -> GaborMagnitude:
    window = window or Window()
    pos = _x_positions(f.grid, x_stride)
    m_xi = (f.grid.N // xi_stride,) * f.grid.d
    mag = np.empty((len(pos),) + m_xi)
    for start, V in _stft_chunks(f, window, x_stride, xi_stride):
        mag[start : start + len(V)] = np.sqrt(np.sum(V.real**2 + V.imag**2, axis=-1))
    return GaborMagnitude(f.grid, mag, x_stride, xi_stride)


def modulation_norm(f: SpinorField, params: ModulationParams | None = None) -> float:
    """``||f||_{M_s^{p,q}}`` as a mixed lattice sum of ``|V_g f|``."""
    params = params or ModulationParams()
    gm = gabor_magnitude(f, params.window, params.x_stride, params.xi_stride)
    return gm.norm(params.p, params.q, params.s)


def fourier_lebesgue_norm(f: SpinorField, p: float) -> float:
    return lebesgue_norm(fft(f) if f.space is Space.PHYSICAL else f, p)


def bessel_multiplier(grid: SpectralGrid, s: float) -> np.ndarray:
    return (1.0 + grid.xi2) ** (s / 2)


def sobolev_norm(f: SpinorField, s: float, p: float = 2.0) -> float:
    """``|| ((1+|xi|^2)^{s/2} fhat)^vee ||_{L^p}``."""
    fh = fft(f) if f.space is Space.PHYSICAL else f
    if s == 0:
        g = ifft(fh)
    else:
        g = ifft(fh.like(fh.data * bessel_multiplier(f.grid, s)[..., None]))
    return lebesgue_norm(g, p)


@dataclass(frozen=True)
class NormSpec:
    """Norm selector: ``kind`` is one of ``mod``, ``fl``, ``sobolev``, ``lp``."""

    kind: str = "mod"
    p: float = 2.0
    q: float = 2.0
    s: float = 0.0
    window: Window = field(default_factory=Window)
    x_stride: int = 1
    xi_stride: int = 1

    KINDS = ("mod", "fl", "sobolev", "lp")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}; expected one of {self.KINDS}")
        if self.p < 1 or (self.kind == "mod" and self.q < 1):
            raise ValueError("norm exponents must be >= 1")

    def label(self) -> str:
        if self.kind == "mod":
            return f"M_{self.s:g}^{{{self.p:g},{self.q:g}}}"
        if self.kind == "fl":
            return f"FL^{self.p:g}"
        if self.kind == "sobolev":
            return f"W^{{{self.s:g},{self.p:g}}}"
        return f"L^{self.p:g}"

    def modulation_params(self) -> ModulationParams:
        return ModulationParams(self.p, self.q, self.s, self.window, self.x_stride, self.xi_stride)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "q": self.q,
            "s": self.s,
            "window_width": self.window.width,
            "x_stride": self.x_stride,
            "xi_stride": self.xi_stride,
        }


def evaluate_norm(f: SpinorField, spec: NormSpec) -> float:
    if spec.kind == "mod":
        return modulation_norm(f, spec.modulation_params())
    if spec.kind == "fl":
        return fourier_lebesgue_norm(f, spec.p)
    if spec.kind == "sobolev":
        return sobolev_norm(f, spec.s, spec.p)
    return lebesgue_norm(f, spec.p)


def window_equivalence_check(fields, w1: Window, w2: Window, p=2.0, q=2.0, s=0.0,
                             x_stride: int = 1, xi_stride: int = 1, bound: float = 10.0) -> dict:
    """Spread of ``||f||_{M;w1} / ||f||_{M;w2}`` over nonzero fields."""
    ratios = []
    for f in fields:
        a = modulation_norm(f, ModulationParams(p, q, s, w1, x_stride, xi_stride))
        b = modulation_norm(f, ModulationParams(p, q, s, w2, x_stride, xi_stride))
        if a == 0 or b == 0:
            raise ValueError("window equivalence is tested on nonzero fields only")
        ratios.append(a / b)
    ratios = np.asarray(ratios)
    lo, hi = float(ratios.min()), float(ratios.max())
    return {"ratios": ratios.tolist(), "min": lo, "max": hi, "spread": hi / lo, "passed": hi / lo < bound}
