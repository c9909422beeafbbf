"""Acceptance criteria 1-8 at their stated tolerances.

Each test records one ``[PASS]`` / ``[FAIL]`` line; the lines are printed in
the terminal summary of the pytest run.
"""

import time

import numpy as np
import pytest

import conftest
from dirac_hartree.clifford import build_clifford, check_relations
from dirac_hartree.grid import Gaussian, SpectralGrid, SpinorField, lebesgue_norm, sample
from dirac_hartree.potentials import riesz_potential
from dirac_hartree.propagator import PropagatorParams, apply_propagator, propagator_matrix
from dirac_hartree.solver import (
    EvolutionConfig,
    charge_drift,
    contraction_factor,
    picard_solve,
    split_step_evolve,
)
from dirac_hartree.timefreq import ModulationParams, Window, modulation_norm, stft
from dirac_hartree.verify import Ensemble, build_descriptors, realize
from dirac_hartree.verify.run import run_all, to_json
from oracles import dense_propagator, riesz_gaussian_1d

EPS = np.finfo(float).eps


def record(num: int, ok: bool, text: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {text}"
    conftest.ACCEPTANCE[num] = line
    print(line)
    assert ok, line


def test_criterion_1_clifford():
    t0 = time.perf_counter()
    worst = max(check_relations(build_clifford(d)).max_violation for d in range(1, 9))
    rep = build_clifford(3)
    s = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    Z, I = np.zeros((2, 2)), np.eye(2)
    exact = all(np.array_equal(a, np.block([[Z, sj], [sj, Z]])) for a, sj in zip(rep.alphas, s))
    exact &= np.array_equal(rep.beta, np.block([[I, Z], [Z, -I]]))
    dt = time.perf_counter() - t0
    record(1, worst <= 100 * EPS and exact and dt < 1,
           f"max violation {worst:.1e} (bound {100 * EPS:.1e}), d=3 exact={exact}, {dt:.2f}s")


def test_criterion_2_propagator():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    err = 0.0
    for k in range(200):
        d = 1 + k % 4
        rep = build_clifford(d)
        xi, t, m = rng.normal(scale=4, size=d), rng.uniform(-10, 10), rng.uniform(0, 3)
        err = max(err, np.abs(propagator_matrix(xi, t, m, rep) - dense_propagator(rep.symbol(xi, m), t)).max())
    g = SpectralGrid(2, 64, 10.0)
    p = PropagatorParams(1.0, build_clifford(2), g)
    psi = sample(Gaussian(1.2, center=(0.5, -1.0), modulation=(2.0, 1.0), weights=(1, 0.3j)), g, 2)
    n0 = lebesgue_norm(psi, 2)
    unit = max(abs(lebesgue_norm(apply_propagator(psi, t, p), 2) / n0 - 1) for t in (0.5, 3.0, 20.0))
    group = lebesgue_norm(apply_propagator(apply_propagator(psi, 1.3, p), 2.1, p) - apply_propagator(psi, 3.4, p), 2) / n0
    dt = time.perf_counter() - t0
    record(2, err < 1e-11 and unit < 1e-10 and group < 1e-10 and dt < 10,
           f"expm error {err:.1e}, unitarity {unit:.1e}, group law {group:.1e}, {dt:.2f}s")


def test_criterion_3_stft_calibration():
    g = SpectralGrid(1, 512, 32.0)
    members = realize(build_descriptors(Ensemble(3, count=50, families=("gaussian",)), g, 2), g, 2)
    const = np.sqrt(2 * np.pi)
    dev = max(abs(modulation_norm(f, ModulationParams(2, 2, 0)) / (const * lebesgue_norm(f, 2)) - 1) for f in members)
    h = SpectralGrid(1, 512, 32.0)
    V = stft(SpinorField(h, np.exp(-h.x2 / 2)), Window(normalize=False))
    x, xi = V.x_points[:, 0][:, None], V.xi_axis[None, :]
    exact = np.sqrt(np.pi) * np.exp(-x**2 / 4 - xi**2 / 4 - 0.5j * x * xi)
    rel = np.abs(V.coeffs[..., 0] - exact).max() / np.abs(exact).max()
    record(3, len(members) == 50 and dev < 0.01 and rel < 1e-8,
           f"M^(2,2)/((2pi)^(1/2)||f||_2) max deviation {dev:.1e} over 50 members, closed-form STFT {rel:.1e}")


def test_criterion_4_riesz():
    t0 = time.perf_counter()
    errs = {}
    for L in (64.0, 128.0):
        g = SpectralGrid(1, 1024, L)
        I = riesz_potential(np.exp(-g.nodes**2 / 2), g, 0.5)
        idx = np.where(np.abs(g.nodes) <= 4)[0][::4]
        errs[L] = max(abs(I[i] - riesz_gaussian_1d(g.nodes[i], 0.5)) / riesz_gaussian_1d(g.nodes[i], 0.5)
                      for i in idx)
    dt = time.perf_counter() - t0
    halving = errs[64.0] / errs[128.0]
    record(4, errs[128.0] < 1e-4 and halving >= 2 and dt < 30,
           f"relative error {errs[128.0]:.1e} at L=128 (|x|<=4), L 64->128 error ratio {halving:.1f}, {dt:.1f}s")


@pytest.fixture(scope="module")
def verify_run():
    t0 = time.perf_counter()
    summary = run_all(1, "quick", "all")
    return summary, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_5_lemma_suite(verify_run):
    summary, dt = verify_run
    checked = [r for r in summary["_reports"] if not r.probe]
    worst_spread = max(r.spread for r in checked)
    worst_drift = max(r.drift for r in checked)
    finite = all(np.isfinite(r.max) for r in checked)
    lemmas = sorted({r.lemma for r in checked})
    record(5, summary["passed"] and finite and dt < 300,
           f"{len(checked) - summary['n_failed']}/{len(checked)} reports over {len(lemmas)} lemmas, "
           f"worst spread {worst_spread:.2f}, worst drift {worst_drift:.3f}, {dt:.0f}s")


def _wellposed_setup():
    g = SpectralGrid(1, 256, 16.0)
    cfg = EvolutionConfig(g, gamma=0.5, lam=1.0, mass=1.0, T=0.1, n_t=65, quadrature="simpson")
    psi0 = sample(Gaussian(1.0, weights=(1, 0.5j)), g, 2)
    return cfg, psi0 * (0.1 / lebesgue_norm(psi0, 2))


def test_criterion_6_wellposedness():
    t0 = time.perf_counter()
    cfg, psi0 = _wellposed_setup()
    traj, rep = picard_solve(psi0, cfg)
    drift = charge_drift(traj)
    split = split_step_evolve(psi0, cfg)
    agree = lebesgue_norm(split.final - traj.final, 2) / lebesgue_norm(traj.final, 2)
    f_full = max(contraction_factor(psi0, cfg))
    f_half = max(contraction_factor(psi0, cfg.with_(T=0.05)))
    scaling = f_half / f_full
    dt = time.perf_counter() - t0
    ok = (rep.converged and max(rep.factors) < 0.5 and rep.residual < 1e-8 and drift < 1e-6
          and agree < 1e-5 and 0.35 <= scaling <= 0.65 and dt < 120)
    record(6, ok, f"{rep.iterations} iterations, factors <= {max(rep.factors):.1e}, residual {rep.residual:.1e}, "
                  f"L2 drift {drift:.1e}, split-step {agree:.1e}, factor(T/2)/factor(T) {scaling:.2f}, {dt:.1f}s")


def test_criterion_7_uniqueness_continuity():
    cfg, psi0 = _wellposed_setup()
    a, _ = picard_solve(psi0, cfg, init="free")
    b, _ = picard_solve(psi0, cfg, init="zero")
    gap = a.distance(b, cfg.norm_spec)
    g = cfg.grid
    phi = sample(Gaussian(0.7, center=(1.0,), modulation=(2.0,), weights=(0.3, 1)), g, 2)
    phi = phi * (1 / lebesgue_norm(phi, 2))
    consts = []
    for delta in (1e-2, 1e-3, 1e-4):
        c, _ = picard_solve(psi0 + phi * delta, cfg)
        consts.append(a.distance(c, cfg.norm_spec) / delta)
    vary = max(consts) / min(consts)
    record(7, gap <= 10 * cfg.picard_tol and vary < 2,
           f"initialization gap {gap:.1e} (bound {10 * cfg.picard_tol:.0e}), "
           f"C(delta) = {', '.join(f'{c:.4f}' for c in consts)}, variation {vary:.3f}")


@pytest.mark.slow
def test_criterion_8_determinism(verify_run):
    first = to_json(verify_run[0])
    second = to_json(run_all(1, "quick", "all"))
    record(8, first == second, f"two seed-1 quick runs, {len(first)} JSON bytes, identical={first == second}")
