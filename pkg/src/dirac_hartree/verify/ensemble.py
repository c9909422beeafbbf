"""Seeded random test-function ensembles.

Parameter ranges are clipped to what the grid can represent: every member
must fall below ``1e-10`` (relative) at the box edge and must be resolved
in frequency, i.e. its spectrum must also fall below ``1e-10`` before the
Nyquist frequency.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..grid import Chirp, Gaussian, GaussianSum, SpectralGrid, SpinorField, edge_ratio, sample

# Gaussian tail exp(-z^2/2) < 1e-10  <=>  z > TAIL
TAIL = math.sqrt(2 * math.log(1e10))
FAMILIES = ("gaussian", "sum", "chirp")


@dataclass(frozen=True)
class Ensemble:
    seed: int
    count: int = 6
    families: tuple = FAMILIES
    width_range: tuple = (0.25, 4.0)
    center_fraction: float = 0.125
    modulation_fraction: float = 0.125
    max_terms: int = 4


def _ranges(ens: Ensemble, grid: SpectralGrid):
    L = grid.L
    c_max = ens.center_fraction * L
    k_max = int(ens.modulation_fraction * grid.N)
    nyq = np.pi / grid.h
    xi0 = k_max * grid.dxi * math.sqrt(grid.d)
    lo = max(ens.width_range[0], TAIL / (nyq - xi0), math.sqrt(2) * TAIL / nyq)
    hi = min(ens.width_range[1], (L - c_max - grid.h) / TAIL)
    if lo > hi:
        raise ValueError(f"grid {grid} cannot host the ensemble: width range [{lo:.3g}, {hi:.3g}] is empty")
    return c_max, k_max, lo, hi


def _mixing(rng, n):
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return tuple(w / np.linalg.norm(w))


def _gaussian(rng, grid, n, c_max, k_max, lo, hi, amplitude=1.0):
    width = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    center = tuple(rng.uniform(-c_max, c_max, grid.d))
    k = rng.integers(-k_max, k_max + 1, grid.d) * grid.dxi
    return Gaussian(width, center, tuple(k), _mixing(rng, n), amplitude)


def build_descriptors(ens: Ensemble, grid: SpectralGrid, n: int) -> list:
    """Deterministic descriptor list for ``ens`` on ``grid`` (family-major order)."""
    c_max, k_max, lo, hi = _ranges(ens, grid)
    out = []
    for fam_index, family in enumerate(ens.families):
        rng = np.random.default_rng([ens.seed, grid.d, fam_index])
        for _ in range(ens.count):
            if family == "gaussian":
                out.append(_gaussian(rng, grid, n, c_max, k_max, lo, hi))
            elif family == "sum":
                terms = []
                for _ in range(int(rng.integers(2, ens.max_terms + 1))):
                    amp = complex(rng.uniform(0.5, 1.0) * np.exp(2j * np.pi * rng.uniform()))
                    terms.append(_gaussian(rng, grid, n, c_max, k_max, lo, hi, amp))
                out.append(GaussianSum(tuple(terms)))
            elif family == "chirp":
                width = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
                alpha = 1 / (2 * width**2)
                rate = float(rng.uniform(-1, 1) * alpha)
                center = tuple(rng.uniform(-c_max, c_max, grid.d))
                out.append(Chirp(width, rate, center, _mixing(rng, n)))
            else:
                raise ValueError(f"unknown family {family!r}")
    return out


def scalar_version(desc):
    """Same profile with all component weights collapsed to a single 1."""
    if isinstance(desc, GaussianSum):
        return GaussianSum(tuple(scalar_version(t) for t in desc.terms))
    return dataclasses.replace(desc, weights=(1.0,))


def realize(descriptors, grid: SpectralGrid, n: int, scale: float = 1.0) -> list[SpinorField]:
    fields = []
    for desc in descriptors:
        f = sample(desc, grid, n)
        if edge_ratio(f) > 1e-10:
            raise ValueError(f"ensemble member {desc} does not decay on {grid}")
        fields.append(f * scale if scale != 1.0 else f)
    return fields
