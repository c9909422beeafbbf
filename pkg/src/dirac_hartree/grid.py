"""Periodic spectral grids and spinor fields.

Physical nodes are ``x_j = -L + j*h`` with ``h = 2L/N`` along each axis.
Frequency data are stored in ascending order, ``xi_k = pi*k/L`` for
``k = -N/2 .. N/2-1``, so a frequency-space array can be read directly as
a physical-space array on :meth:`SpectralGrid.dual`.

Fourier convention::

    fhat(xi) = int exp(-i x.xi) f(x) dx
    f(x)     = (2 pi)^-d int exp(i x.xi) fhat(xi) dxi
"""

from __future__ import annotations

import enum
import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft

_WORKERS = os.cpu_count() or 1


def set_workers(n: int | None) -> None:
    """Thread count handed to the FFT backend (results do not depend on it)."""
    global _WORKERS
    _WORKERS = max(1, int(n)) if n else (os.cpu_count() or 1)


def get_workers() -> int:
    return _WORKERS


class Space(enum.Enum):
    PHYSICAL = "physical"
    FREQUENCY = "frequency"


class DomainTruncationWarning(UserWarning):
    """Sampled field does not decay at the box edge."""


@dataclass(frozen=True)
class SpectralGrid:
    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("grid dimension must be >= 1")
        if self.N < 4 or self.N % 2:
            raise ValueError(f"N must be even and >= 4, got {self.N}")
        if self.N & (self.N - 1):
            raise ValueError(f"N must be a power of two, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2 * self.L / self.N

    @property
    def dxi(self) -> float:
        """Frequency spacing ``pi/L``."""
        return np.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    @property
    def cell(self) -> float:
        return self.h**self.d

    @property
    def freq_cell(self) -> float:
        return self.dxi**self.d

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def freqs(self) -> np.ndarray:
        return self.dxi * np.arange(-self.N // 2, self.N // 2)

    @cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.nodes] * self.d), indexing="ij"))

    @cached_property
    def xi(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.freqs] * self.d), indexing="ij"))

    @cached_property
    def x2(self) -> np.ndarray:
        return sum(c * c for c in self.x)

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(c * c for c in self.xi)

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(self.d))

    def dual(self) -> "SpectralGrid":
        """Grid whose physical nodes coincide with this grid's frequencies."""
        return SpectralGrid(self.d, self.N, self.N * np.pi / (2 * self.L))

    def refine(self, factor: int = 2) -> "SpectralGrid":
        return SpectralGrid(self.d, self.N * factor, self.L)

    def boundary_mask(self) -> np.ndarray:
        """True on the outermost layer of nodes (first or last index on some axis)."""
        mask = np.zeros(self.shape, dtype=bool)
        for ax in range(self.d):
            for end in (0, -1):
                sl = [slice(None)] * self.d
                sl[ax] = end
                mask[tuple(sl)] = True
        return mask

    def to_dict(self) -> dict:
        return {"d": self.d, "N": self.N, "L": self.L}


@dataclass(eq=False)
class SpinorField:
    """``n``-component complex field on a grid; ``data`` has shape ``grid.shape + (n,)``."""

    grid: SpectralGrid
    data: np.ndarray
    space: Space = Space.PHYSICAL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim == self.grid.d:
            data = data[..., None]
        if data.shape[:-1] != self.grid.shape:
            raise ValueError(f"data shape {data.shape} does not match grid {self.grid.shape}")
        self.data = data
        self.space = Space(self.space)

    @property
    def n(self) -> int:
        return self.data.shape[-1]

    def component(self, k: int) -> np.ndarray:
        return self.data[..., k]

    def like(self, data: np.ndarray, space: Space | None = None) -> "SpinorField":
        return SpinorField(self.grid, data, self.space if space is None else space)

    def copy(self) -> "SpinorField":
        return self.like(self.data.copy())

    def _check(self, other: "SpinorField") -> None:
        if other.grid != self.grid or other.space != self.space or other.n != self.n:
            raise ValueError("fields live on different grids, spaces, or spinor sizes")

    def __add__(self, other):
        self._check(other)
        return self.like(self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return self.like(self.data - other.data)

    def __mul__(self, c):
        return self.like(self.data * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.like(-self.data)

    def apply_matrix(self, mat: np.ndarray) -> "SpinorField":
        """Pointwise ``mat @ psi(x)``."""
        return self.like(self.data @ np.asarray(mat).T)

    def modulus(self) -> np.ndarray:
        """Pointwise ``(sum_j |f_j|^2)^(1/2)``."""
        return np.sqrt(np.sum(self.data.real**2 + self.data.imag**2, axis=-1))


def fft(f: SpinorField) -> SpinorField:
    if f.space is not Space.PHYSICAL:
        raise ValueError("fft expects a physical-space field")
    ax = f.grid.axes
    a = sfft.ifftshift(f.data, axes=ax)
    a = sfft.fftn(a, axes=ax, workers=_WORKERS)
    return f.like(sfft.fftshift(a, axes=ax) * f.grid.cell, Space.FREQUENCY)


def ifft(f: SpinorField) -> SpinorField:
    if f.space is not Space.FREQUENCY:
        raise ValueError("ifft expects a frequency-space field")
    ax = f.grid.axes
    a = sfft.ifftshift(f.data, axes=ax)
    a = sfft.ifftn(a, axes=ax, workers=_WORKERS)
    return f.like(sfft.fftshift(a, axes=ax) / f.grid.cell, Space.PHYSICAL)


def fft_array(a: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Scalar (or trailing-axis batched) version of :func:`fft` on raw arrays."""
    ax = tuple(range(a.ndim - grid.d, a.ndim))
    out = sfft.fftn(sfft.ifftshift(a, axes=ax), axes=ax, workers=_WORKERS)
    return sfft.fftshift(out, axes=ax) * grid.cell


def ifft_array(a: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    ax = tuple(range(a.ndim - grid.d, a.ndim))
    out = sfft.ifftn(sfft.ifftshift(a, axes=ax), axes=ax, workers=_WORKERS)
    return sfft.fftshift(out, axes=ax) / grid.cell


def to_space(f: SpinorField, space: Space) -> SpinorField:
    if f.space is space:
        return f
    return fft(f) if space is Space.FREQUENCY else ifft(f)


def as_dual_physical(f: SpinorField) -> SpinorField:
    """Reinterpret frequency samples as a physical field on the dual grid."""
    if f.space is not Space.FREQUENCY:
        raise ValueError("expected frequency-space field")
    return SpinorField(f.grid.dual(), f.data, Space.PHYSICAL)


def reflect(a: np.ndarray, d: int) -> np.ndarray:
    """``a(-x)`` on the centred grid ordering (Nyquist row maps to itself)."""
    out = a
    for ax in range(d):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def _cell(f: SpinorField) -> float:
    return f.grid.cell if f.space is Space.PHYSICAL else f.grid.freq_cell


def lp_norm_array(mod: np.ndarray, p: float, weight: float) -> float:
    """Riemann-sum ``L^p`` norm of a nonnegative array with cell ``weight``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if np.isinf(p):
        return float(mod.max()) if mod.size else 0.0
    m = mod.max()
    if m == 0:
        return 0.0
    # rescale before powering to stay clear of under/overflow for large p
    return float(m * (weight * np.sum((mod / m) ** p)) ** (1.0 / p))


def lebesgue_norm(f: SpinorField, p: float) -> float:
    """``|| |f| ||_{L^p}`` with ``|f|`` the pointwise Euclidean modulus.

    Frequency-space fields are integrated against the frequency cell, so
    ``lebesgue_norm(fft(f), p)`` is the Fourier-Lebesgue norm.
    """
    return lp_norm_array(f.modulus(), p, _cell(f))


def inner_product(f: SpinorField, g: SpinorField) -> complex:
    """``int sum_j f_j conj(g_j) dx``."""
    f._check(g)
    return complex(np.sum(f.data * g.data.conj()) * _cell(f))


# --- analytic sampling descriptors -------------------------------------------------


def _as_vec(v, d: int) -> np.ndarray:
    v = np.zeros(d) if v is None else np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape == (1,) and d > 1:
        v = np.full(d, v[0])
    if v.shape != (d,):
        raise ValueError(f"expected length-{d} vector, got shape {v.shape}")
    return v


def _weights(w, n: int) -> np.ndarray:
    if w is None:
        w = np.eye(n, 1).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    if w.size > n:
        raise ValueError(f"{w.size} component weights for a {n}-component field")
    return np.pad(w, (0, n - w.size))


@dataclass(frozen=True)
class Gaussian:
    """``amp * exp(-|x-c|^2/(2 a^2)) * exp(i k.x) * weights``."""

    width: float = 1.0
    center: tuple = None
    modulation: tuple = None
    weights: tuple = None
    amplitude: complex = 1.0

    def evaluate(self, grid: SpectralGrid, n: int) -> np.ndarray:
        c = _as_vec(self.center, grid.d)
        k = _as_vec(self.modulation, grid.d)
        r2 = sum((xa - ca) ** 2 for xa, ca in zip(grid.x, c))
        phase = sum(xa * ka for xa, ka in zip(grid.x, k))
        env = self.amplitude * np.exp(-r2 / (2 * self.width**2) + 1j * phase)
        return env[..., None] * _weights(self.weights, n)


@dataclass(frozen=True)
class Chirp:
    """Gaussian envelope with quadratic phase ``exp(i rate |x-c|^2)``."""

    width: float = 1.0
    rate: float = 0.5
    center: tuple = None
    weights: tuple = None
    amplitude: complex = 1.0

    def evaluate(self, grid: SpectralGrid, n: int) -> np.ndarray:
        c = _as_vec(self.center, grid.d)
        r2 = sum((xa - ca) ** 2 for xa, ca in zip(grid.x, c))
        env = self.amplitude * np.exp(-r2 / (2 * self.width**2) + 1j * self.rate * r2)
        return env[..., None] * _weights(self.weights, n)


@dataclass(frozen=True)
class GaussianSum:
    terms: tuple

    def evaluate(self, grid: SpectralGrid, n: int) -> np.ndarray:
        out = np.zeros(grid.shape + (n,), dtype=complex)
        for t in self.terms:
            out += t.evaluate(grid, n)
        return out


@dataclass(frozen=True)
class PlaneWavePacket:
    """Gaussian packet at carrier ``k`` polarized along a positive-energy
    eigenvector of ``m*beta + alpha.k`` (free Dirac spinor)."""

    carrier: tuple
    width: float = 1.0
    center: tuple = None
    mass: float = 0.0
    amplitude: complex = 1.0

    def evaluate(self, grid: SpectralGrid, n: int) -> np.ndarray:
        from .clifford import build_clifford

        rep = build_clifford(grid.d)
        if rep.n != n:
            raise ValueError(f"packet needs n={rep.n} components in d={grid.d}")
        k = _as_vec(self.carrier, grid.d)
        vals, vecs = np.linalg.eigh(rep.symbol(k, self.mass))
        spinor = vecs[:, np.argmax(vals)]
        g = Gaussian(self.width, self.center, tuple(k), tuple(spinor), self.amplitude)
        return g.evaluate(grid, n)


def sample(descriptor, grid: SpectralGrid, n: int = 2, edge_tol: float = 1e-8) -> SpinorField:
    """Evaluate an analytic descriptor on the grid nodes."""
    data = descriptor.evaluate(grid, n)
    f = SpinorField(grid, data, Space.PHYSICAL)
    mod = f.modulus()
    peak = mod.max()
    if peak > 0:
        edge = mod[grid.boundary_mask()].max()
        if edge > edge_tol * peak:
            warnings.warn(
                f"field is {edge / peak:.1e} of its peak at the box edge; periodic truncation error",
                DomainTruncationWarning,
                stacklevel=2,
            )
    return f


def edge_ratio(f: SpinorField) -> float:
    mod = f.modulus()
    peak = mod.max()
    return float(mod[f.grid.boundary_mask()].max() / peak) if peak > 0 else 0.0
