"""Spectral toolkit for the Dirac equation with Hartree-type nonlinearity in modulation spaces."""

__version__ = "0.1.0"

from .clifford import CliffordRep, build_clifford, check_relations
from .grid import SpectralGrid, SpinorField, fft, ifft, inner_product, lebesgue_norm, sample
from .potentials import HartreeParams, hartree_nonlinearity, hartree_potential, riesz_potential
from .propagator import PropagatorParams, apply_propagator, dirac_symbol
from .solver import EvolutionConfig, duhamel_map, picard_solve, split_step_evolve
from .timefreq import NormSpec, Window, modulation_norm, stft

__all__ = [
    "CliffordRep",
    "EvolutionConfig",
    "HartreeParams",
    "NormSpec",
    "PropagatorParams",
    "SpectralGrid",
    "SpinorField",
    "Window",
    "apply_propagator",
    "build_clifford",
    "check_relations",
    "dirac_symbol",
    "duhamel_map",
    "fft",
    "hartree_nonlinearity",
    "hartree_potential",
    "ifft",
    "inner_product",
    "lebesgue_norm",
    "modulation_norm",
    "picard_solve",
    "riesz_potential",
    "sample",
    "split_step_evolve",
    "stft",
]
