"""Local solutions by Picard iteration on the Duhamel formula.

The integral equation is

    psi(t) = U(t) psi0 - i int_0^t U(t - s) A(psi(s)) ds,
    A(psi) = (lambda |.|^-gamma * <psi, beta psi>) beta psi,

i.e. the mild form of ``d/dt psi = -i H psi - i A(psi)``.  The splitting
integrator advances the same equation, so both solvers are comparable
node by node.

Duhamel integrals are evaluated on the uniform time nodes with
``U(t_i - t_j) = U(t_i) U(-t_j)``: the nonlinear terms are pulled back to
``t = 0`` once, summed with cumulative quadrature weights, and pushed
forward once per node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .clifford import build_clifford
from .grid import Space, SpectralGrid, SpinorField, fft_array, ifft_array, lebesgue_norm
from .potentials import HartreeParams, hartree_nonlinearity, hartree_potential
from .propagator import PropagatorParams, propagate_frequency_data
from .timefreq import NormSpec, evaluate_norm

log = logging.getLogger(__name__)

QUADRATURES = ("simpson", "trapezoid")


class ContractionFailed(RuntimeError):
    """Picard iteration did not converge; carries the measured factors."""

    def __init__(self, message: str, report: "ConvergenceReport", trajectory: "Trajectory"):
        super().__init__(message)
        self.report = report
        self.trajectory = trajectory


def default_monitor_spec(d: int, gamma: float) -> NormSpec:
    """``M^{2, 2d/(d+gamma)}``, the widest ``p = 2`` space of the local theory."""
    return NormSpec("mod", p=2.0, q=2 * d / (d + gamma), s=0.0)


@dataclass
class EvolutionConfig:
    grid: SpectralGrid
    gamma: float
    lam: float
    mass: float
    T: float
    n_t: int = 65
    quadrature: str = "simpson"
    picard_tol: float = 1e-10
    picard_max: int = 50
    norm_spec: NormSpec | None = None
    zero_mode: str = "zeta"
    nonlinear: bool = True
    split_substeps: int = 1
    divergence_cap: float = 1e6

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.n_t < 3:
            raise ValueError(f"need at least 3 time nodes, got {self.n_t}")
        if self.quadrature not in QUADRATURES:
            raise ValueError(f"quadrature must be one of {QUADRATURES}")
        if self.quadrature == "simpson" and self.n_t % 2 == 0:
            raise ValueError("Simpson quadrature needs an odd number of time nodes")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.split_substeps < 1:
            raise ValueError("split_substeps must be >= 1")
        self.rep = build_clifford(self.grid.d)
        self.propagator = PropagatorParams(self.mass, self.rep, self.grid)
        # lambda = 0 is representable only through nonlinear=False
        self.hartree = HartreeParams(self.gamma, self.lam if self.lam else 1.0, self.rep, self.zero_mode)
        if self.lam == 0:
            self.nonlinear = False
        if self.norm_spec is None:
            self.norm_spec = default_monitor_spec(self.grid.d, self.gamma)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_t)

    @property
    def dt(self) -> float:
        return self.T / (self.n_t - 1)

    def with_(self, **changes) -> "EvolutionConfig":
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return EvolutionConfig(**kw)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "gamma": self.gamma,
            "lambda": self.lam,
            "mass": self.mass,
            "T": self.T,
            "n_t": self.n_t,
            "quadrature": self.quadrature,
            "picard_tol": self.picard_tol,
            "picard_max": self.picard_max,
            "norm_spec": self.norm_spec.to_dict(),
            "zero_mode": self.zero_mode,
            "nonlinear": self.nonlinear,
            "split_substeps": self.split_substeps,
        }


@dataclass
class Trajectory:
    """Physical-space fields at uniform nodes; ``data[i]`` is ``psi(t_i)``."""

    grid: SpectralGrid
    times: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.data):
            raise ValueError("one field per time node required")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def field(self, i: int) -> SpinorField:
        return SpinorField(self.grid, self.data[i], Space.PHYSICAL)

    @property
    def final(self) -> SpinorField:
        return self.field(-1)

    def norms(self, spec: NormSpec) -> np.ndarray:
        return np.array([evaluate_norm(self.field(i), spec) for i in range(len(self))])

    def distance(self, other: "Trajectory", spec: NormSpec) -> float:
        """``sup_i ||self(t_i) - other(t_i)||``."""
        if not np.array_equal(self.times, other.times):
            raise ValueError("trajectories are on different time nodes")
        diff = self.data - other.data
        return max(evaluate_norm(SpinorField(self.grid, diff[i]), spec) for i in range(len(self)))


def cumulative_weights(n_t: int, dt: float, rule: str = "simpson") -> np.ndarray:
    """``W[i, j]`` with ``int_0^{t_i} g ~= sum_j W[i, j] g(t_j)``.

    Simpson panels over an even number of intervals; an odd count closes
    with a 3/8 panel on the last three intervals, and a single interval
    falls back to the trapezoid.
    """
    W = np.zeros((n_t, n_t))
    for i in range(1, n_t):
        if rule == "trapezoid" or i == 1:
            W[i, : i + 1] = dt
            W[i, 0] = W[i, i] = dt / 2
            continue
        m = i if i % 2 == 0 else i - 3
        for a in range(0, m, 2):
            W[i, a : a + 3] += dt / 3 * np.array([1.0, 4.0, 1.0])
        if m != i:
            W[i, m : m + 4] += 3 * dt / 8 * np.array([1.0, 3.0, 3.0, 1.0])
    return W


def _batch_propagate(data: np.ndarray, ts, config: EvolutionConfig) -> np.ndarray:
    out = np.empty_like(data)
    for i, t in enumerate(ts):
        out[i] = propagate_frequency_data(data[i], t, config.propagator)
    return out


def _fft_nodes(data: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    # (n_t, *grid, n) -> transform over the grid axes
    return np.moveaxis(fft_array(np.moveaxis(data, -1, 1), grid), 1, -1)


def _ifft_nodes(data: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    return np.moveaxis(ifft_array(np.moveaxis(data, -1, 1), grid), 1, -1)


def free_flight(psi0: SpinorField, config: EvolutionConfig) -> Trajectory:
    """``U(t_i) psi0`` at every node."""
    p0 = fft_array(np.moveaxis(psi0.data, -1, 0), config.grid)
    p0 = np.moveaxis(p0, 0, -1)
    t = config.times
    fh = _batch_propagate(np.broadcast_to(p0, (len(t),) + p0.shape).copy(), t, config)
    return Trajectory(config.grid, t, _ifft_nodes(fh, config.grid))


def duhamel_map(psi0: SpinorField, traj: Trajectory, config: EvolutionConfig) -> Trajectory:
    """``Phi(traj)(t_i) = U(t_i) psi0 - i int_0^{t_i} U(t_i - s) A(traj(s)) ds``."""
    t = config.times
    if len(traj) != len(t) or not np.allclose(traj.times, t, rtol=0, atol=1e-14 * config.T):
        raise ValueError("trajectory nodes do not match the configuration")
    grid = config.grid
    p0 = np.moveaxis(fft_array(np.moveaxis(psi0.data, -1, 0), grid), 0, -1)
    base = np.broadcast_to(p0, (len(t),) + p0.shape).copy()
    if config.nonlinear:
        A = np.stack([hartree_nonlinearity(traj.field(i), config.hartree).data for i in range(len(t))])
        B = _batch_propagate(_fft_nodes(A, grid), -t, config)
        W = cumulative_weights(len(t), config.dt, config.quadrature)
        S = np.tensordot(W, B, axes=1)
        base = base - 1j * S
    out = _batch_propagate(base, t, config)
    return Trajectory(grid, t, _ifft_nodes(out, grid))


@dataclass
class ConvergenceReport:
    converged: bool
    iterations: int
    distances: list = field(default_factory=list)
    factors: list = field(default_factory=list)
    residual: float = float("nan")
    reference_norm: float = float("nan")
    init: str = "free"

    @property
    def relative_residual(self) -> float:
        return self.residual / self.reference_norm if self.reference_norm else self.residual

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "distances": [float(x) for x in self.distances],
            "contraction_factors": [float(x) for x in self.factors],
            "residual": float(self.residual),
            "relative_residual": float(self.relative_residual),
            "reference_norm": float(self.reference_norm),
            "init": self.init,
        }


def _zero_trajectory(config: EvolutionConfig, n: int) -> Trajectory:
    data = np.zeros((config.n_t,) + config.grid.shape + (n,), dtype=complex)
    return Trajectory(config.grid, config.times, data)


def picard_iterates(psi0: SpinorField, config: EvolutionConfig, init: str = "free"):
    """Yield ``(traj_k, traj_{k+1}, distance)`` indefinitely."""
    spec = config.norm_spec
    traj = free_flight(psi0, config) if init == "free" else _zero_trajectory(config, psi0.n)
    while True:
        new = duhamel_map(psi0, traj, config)
        yield traj, new, new.distance(traj, spec)
        traj = new


def picard_solve(psi0: SpinorField, config: EvolutionConfig, init: str = "free") -> tuple[Trajectory, ConvergenceReport]:
    """Iterate the Duhamel map until successive iterates agree to ``picard_tol * ||psi0||_X``.

    Raises :class:`ContractionFailed` on non-convergence within
    ``picard_max`` iterations or on divergence past ``divergence_cap``.
    """
    if init not in ("free", "zero"):
        raise ValueError("init must be 'free' or 'zero'")
    spec = config.norm_spec
    ref = evaluate_norm(psi0, spec)
    report = ConvergenceReport(False, 0, reference_norm=ref, init=init)
    scale = ref if ref > 0 else 1.0
    last = None
    for k, (old, new, dist) in enumerate(picard_iterates(psi0, config, init), start=1):
        last = new
        report.iterations = k
        report.distances.append(dist)
        if k > 1:
            prev = report.distances[-2]
            report.factors.append(dist / prev if prev > 0 else 0.0)
        log.debug("picard %d: distance %.3e", k, dist)
        if dist <= config.picard_tol * scale:
            report.converged = True
            break
        if not np.isfinite(dist) or dist > config.divergence_cap * scale or k >= config.picard_max:
            msg = (
                f"Picard iteration failed after {k} iterations (distance {dist:.3e}); "
                f"measured contraction factors {[round(float(f), 4) for f in report.factors]}; "
                "shrink T or the data"
            )
            raise ContractionFailed(msg, report, last)
    report.residual = residual(last, psi0, config)
    return last, report


def residual(traj: Trajectory, psi0: SpinorField, config: EvolutionConfig) -> float:
    """``sup_i ||traj(t_i) - Phi(traj)(t_i)||_X``."""
    return traj.distance(duhamel_map(psi0, traj, config), config.norm_spec)


def split_step_evolve(psi0: SpinorField, config: EvolutionConfig, substeps: int | None = None) -> Trajectory:
    """Strang splitting: half nonlinear step, exact ``U(dt)``, half nonlinear step.

    The nonlinear flow ``d/dt psi = -i V beta psi`` keeps ``<psi, beta psi>``
    fixed, so each half step is the exact rotation ``exp(-i tau V beta)``.
    """
    substeps = substeps or config.split_substeps
    grid, rep = config.grid, config.rep
    dt = config.dt / substeps
    beta = rep.beta

    def kick(data, tau):
        if not config.nonlinear:
            return data
        V = hartree_potential(*(2 * [SpinorField(grid, data)]), config.hartree).real[..., None]
        return np.cos(tau * V) * data - 1j * np.sin(tau * V) * (data @ beta.T)

    psi = psi0.data.copy()
    out = [psi.copy()]
    for _ in range(config.n_t - 1):
        for _ in range(substeps):
            psi = kick(psi, dt / 2)
            ph = np.moveaxis(fft_array(np.moveaxis(psi, -1, 0), grid), 0, -1)
            ph = propagate_frequency_data(ph, dt, config.propagator)
            psi = np.moveaxis(ifft_array(np.moveaxis(ph, -1, 0), grid), 0, -1)
            psi = kick(psi, dt / 2)
        out.append(psi.copy())
    return Trajectory(grid, config.times, np.stack(out))


def charge_drift(traj: Trajectory) -> float:
    """``max_i | ||psi(t_i)||_2 / ||psi(0)||_2 - 1 |``."""
    norms = np.array([lebesgue_norm(traj.field(i), 2) for i in range(len(traj))])
    return float(np.abs(norms / norms[0] - 1).max()) if norms[0] > 0 else 0.0


@dataclass
class MonitorReport:
    times: list
    series: dict
    flags: dict
    factor: float

    @property
    def flagged(self) -> bool:
        return any(self.flags.values())

    def to_dict(self) -> dict:
        return {"times": self.times, "series": self.series, "flags": self.flags, "growth_factor": self.factor}


def blowup_monitor(traj: Trajectory, specs, factor: float = 10.0) -> MonitorReport:
    """Norm series per norm selector; flags nodes whose norm exceeds ``factor`` times
    the initial norm, grows by ``factor`` within one step, or is non-finite."""
    if isinstance(specs, NormSpec):
        specs = [specs]
    series, flags = {}, {}
    for spec in specs:
        vals = traj.norms(spec)
        bad = []
        for i in range(1, len(vals)):
            v, prev = vals[i], vals[i - 1]
            if not np.isfinite(v) or v > factor * vals[0] or (prev > 0 and v > factor * prev):
                bad.append(i)
        series[spec.label()] = [float(v) for v in vals]
        flags[spec.label()] = bad
    return MonitorReport([float(t) for t in traj.times], series, flags, factor)


def contraction_factor(psi0: SpinorField, config: EvolutionConfig, iterations: int = 3) -> list[float]:
    """Ratios of successive Picard distances over the first few maps."""
    dists = []
    for k, (_, _, dist) in enumerate(picard_iterates(psi0, config), start=1):
        dists.append(dist)
        if k > iterations or not np.isfinite(dist) or dist == 0:
            break
    return [b / a if a > 0 else 0.0 for a, b in zip(dists, dists[1:])]


def contraction_sweep(psi0: SpinorField, config: EvolutionConfig, T_values) -> dict:
    """Largest early contraction factor per final time; reports the first
    ``T`` at which it exceeds 1."""
    rows = []
    first = None
    for T in T_values:
        f = contraction_factor(psi0, config.with_(T=float(T)))
        fmax = max(f) if f else 0.0
        rows.append({"T": float(T), "factors": [float(x) for x in f], "max_factor": float(fmax)})
        if first is None and fmax > 1:
            first = float(T)
    return {"rows": rows, "first_T_above_one": first}


def lipschitz_ratio(psi: SpinorField, phi: SpinorField, params: HartreeParams, spec: NormSpec) -> float:
    """``||A psi - A phi||_X / ((|psi|^2 + |psi||phi| + |phi|^2) |psi - phi|)`` in the X norm."""
    a = evaluate_norm(hartree_nonlinearity(psi, params) - hartree_nonlinearity(phi, params), spec)
    npsi, nphi = evaluate_norm(psi, spec), evaluate_norm(phi, spec)
    return a / ((npsi**2 + npsi * nphi + nphi**2) * evaluate_norm(psi - phi, spec))
