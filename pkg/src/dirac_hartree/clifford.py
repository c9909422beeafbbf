"""Representations of the Dirac anticommutation algebra.

The matrices are built by a fixed recursion on tensor products of Pauli
matrices so that the output is deterministic for every dimension:

* ``G(0) = [ [1] ]``
* odd ``d``:  ``G(d) = [s1 (x) g for g in G(d-1)] + [s3 (x) I]``
* even ``d``: ``G(d) = [s1 (x) g for g in G(d-2)] + [s2 (x) I, s3 (x) I]``

where the last entry of ``G(d)`` is ``beta`` and the first ``d`` are the
``alpha_j``.  ``beta`` is therefore always ``diag(I, -I)``, and ``d = 3``
reproduces the textbook Dirac matrices ``alpha_j = offdiag(s_j, s_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)

MAX_SPINOR_SIZE = 256
RELATION_TOL = 100 * np.finfo(float).eps


class DimensionUnsupported(ValueError):
    """Requested dimension is zero, negative, or exceeds the size cap."""


def spinor_size(d: int) -> int:
    return 2 ** ((d + 1) // 2)


@dataclass(frozen=True, eq=False)
class CliffordRep:
    d: int
    n: int
    alphas: tuple[np.ndarray, ...]
    beta: np.ndarray

    def __post_init__(self):
        for m in (*self.alphas, self.beta):
            m.setflags(write=False)

    @property
    def alpha_stack(self) -> np.ndarray:
        """Alphas as one ``(d, n, n)`` array."""
        return np.stack(self.alphas)

    def symbol(self, xi, m: float = 0.0) -> np.ndarray:
        """``m*beta + sum_j alpha_j xi_j`` for one frequency vector."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.d,):
            raise ValueError(f"expected a length-{self.d} frequency vector, got {xi.shape}")
        return m * self.beta + np.tensordot(xi, self.alpha_stack, axes=1)

    def to_dict(self) -> dict:
        def enc(a):
            return {"re": a.real.tolist(), "im": a.imag.tolist()}

        return {
            "d": self.d,
            "n": self.n,
            "alphas": [enc(a) for a in self.alphas],
            "beta": enc(self.beta),
        }


def _generators(d: int) -> list[np.ndarray]:
    if d == 0:
        return [np.eye(1, dtype=complex)]
    if d % 2 == 1:
        inner = _generators(d - 1)
        eye = np.eye(inner[0].shape[0], dtype=complex)
        return [np.kron(SIGMA1, g) for g in inner] + [np.kron(SIGMA3, eye)]
    inner = _generators(d - 2)
    eye = np.eye(inner[0].shape[0], dtype=complex)
    return [np.kron(SIGMA1, g) for g in inner] + [np.kron(SIGMA2, eye), np.kron(SIGMA3, eye)]


def build_clifford(d: int, max_size: int = MAX_SPINOR_SIZE) -> CliffordRep:
    """Build ``alpha_1..alpha_d, beta`` of size ``2**floor((d+1)/2)``."""
    if int(d) != d or d < 1:
        raise DimensionUnsupported(f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    n = spinor_size(d)
    if n > max_size:
        raise DimensionUnsupported(f"d={d} needs {n}x{n} matrices, above the cap {max_size}")
    gens = _generators(d)
    assert len(gens) == d + 1 and gens[0].shape == (n, n)
    return CliffordRep(d=d, n=n, alphas=tuple(gens[:d]), beta=gens[d])


@dataclass(frozen=True)
class RelationReport:
    beta_square: float
    alpha_beta: float
    alpha_alpha: float
    hermitian: float

    @property
    def max_violation(self) -> float:
        return max(self.beta_square, self.alpha_beta, self.alpha_alpha, self.hermitian)

    def passes(self, tol: float = RELATION_TOL) -> bool:
        return self.max_violation <= tol

    def to_dict(self) -> dict:
        return {
            "beta_square": self.beta_square,
            "alpha_beta": self.alpha_beta,
            "alpha_alpha": self.alpha_alpha,
            "hermitian": self.hermitian,
            "max_violation": self.max_violation,
        }


def check_relations(rep: CliffordRep) -> RelationReport:
    """Max absolute entry of each defect: ``beta^2 - I``, ``alpha_j beta + beta alpha_j``,
    ``alpha_j^2 - I`` and ``alpha_j alpha_k + alpha_k alpha_j`` (``j != k``), plus hermiticity."""
    n = rep.beta.shape[0]
    eye = np.eye(n)
    mats = (*rep.alphas, rep.beta)
    if any(m.shape != (n, n) for m in mats):
        raise ValueError("all matrices must be square and of equal size")

    beta_sq = np.abs(rep.beta @ rep.beta - eye).max()
    ab = max((np.abs(a @ rep.beta + rep.beta @ a).max() for a in rep.alphas), default=0.0)
    # j = k is reported in the form alpha_j^2 - I, like beta^2 - I
    aa = 0.0
    for j, aj in enumerate(rep.alphas):
        for k, ak in enumerate(rep.alphas):
            defect = aj @ aj - eye if j == k else aj @ ak + ak @ aj
            aa = max(aa, np.abs(defect).max())
    herm = max(np.abs(m - m.conj().T).max() for m in mats)
    return RelationReport(float(beta_sq), float(ab), float(aa), float(herm))
