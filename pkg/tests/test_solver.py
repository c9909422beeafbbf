import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_hartree.grid import Gaussian, SpectralGrid, SpinorField, lebesgue_norm, sample
from dirac_hartree.potentials import HartreeParams
from dirac_hartree.solver import (
    ContractionFailed,
    EvolutionConfig,
    Trajectory,
    blowup_monitor,
    charge_drift,
    contraction_factor,
    contraction_sweep,
    cumulative_weights,
    duhamel_map,
    free_flight,
    lipschitz_ratio,
    picard_solve,
    residual,
    split_step_evolve,
)
from dirac_hartree.timefreq import NormSpec

GRID = SpectralGrid(1, 256, 16.0)
L2 = NormSpec("lp", p=2)


def datum(l2=0.1, grid=GRID, **kw):
    f = sample(Gaussian(**{"width": 1.0, "weights": (1, 0.5j), **kw}), grid, 2)
    return f * (l2 / lebesgue_norm(f, 2))


def config(**kw):
    base = dict(grid=GRID, gamma=0.5, lam=1.0, mass=1.0, T=0.1, n_t=33)
    base.update(kw)
    return EvolutionConfig(**base)


def rel_l2(a: SpinorField, b: SpinorField) -> float:
    return lebesgue_norm(a - b, 2) / lebesgue_norm(b, 2)


@pytest.mark.parametrize("n_t", [3, 4, 5, 8, 17])
def test_cumulative_weights_exact_on_polynomials(n_t):
    T = 1.3
    t = np.linspace(0, T, n_t)
    dt = t[1]
    W = cumulative_weights(n_t, dt, "simpson")
    cubic = lambda s: 2 - s + 0.5 * s**2 - 0.7 * s**3
    prim = lambda s: 2 * s - s**2 / 2 + s**3 / 6 - 0.7 * s**4 / 4
    got = W @ cubic(t)
    np.testing.assert_allclose(got[2:], prim(t[2:]), atol=1e-13)
    line = lambda s: 1 + 3 * s
    np.testing.assert_allclose((W @ line(t))[1], t[1] + 1.5 * t[1] ** 2, atol=1e-14)
    Wt = cumulative_weights(n_t, dt, "trapezoid")
    np.testing.assert_allclose(Wt @ line(t), t + 1.5 * t**2, atol=1e-13)
    assert np.all(W[0] == 0)


def test_config_validation():
    with pytest.raises(ValueError):
        config(T=0)
    with pytest.raises(ValueError):
        config(n_t=32)
    with pytest.raises(ValueError):
        config(quadrature="midpoint")
    with pytest.raises(ValueError):
        config(gamma=1.0)
    assert config(n_t=32, quadrature="trapezoid").dt == pytest.approx(0.1 / 31)


def test_linear_problem_reduces_to_free_flight():
    cfg = config(lam=0.0)
    psi0 = datum()
    traj, rep = picard_solve(psi0, cfg)
    assert rep.converged and rep.iterations == 1
    np.testing.assert_array_equal(traj.data, free_flight(psi0, cfg).data)


def test_zero_datum_is_fixed_point():
    cfg = config()
    traj, rep = picard_solve(datum() * 0, cfg)
    assert rep.converged and np.all(traj.data == 0)


def test_free_flight_matches_propagator_and_preserves_charge():
    from dirac_hartree.propagator import apply_propagator

    cfg = config(T=2.0)
    psi0 = datum(modulation=(1.5,))
    traj = free_flight(psi0, cfg)
    np.testing.assert_allclose(traj.final.data, apply_propagator(psi0, 2.0, cfg.propagator).data, atol=1e-14)
    assert charge_drift(traj) < 1e-13


def test_small_data_picard_converges_and_matches_splitting():
    cfg = config(n_t=65)
    psi0 = datum()
    traj, rep = picard_solve(psi0, cfg)
    assert rep.converged
    assert all(f < 0.5 for f in rep.factors)
    assert rep.residual < 1e-8
    assert charge_drift(traj) < 1e-6
    split = split_step_evolve(psi0, cfg)
    assert rel_l2(split.final, traj.final) < 1e-5
    assert residual(traj, psi0, cfg) == pytest.approx(rep.residual)


def test_two_initializations_agree():
    cfg = config()
    psi0 = datum()
    a, ra = picard_solve(psi0, cfg, init="free")
    b, rb = picard_solve(psi0, cfg, init="zero")
    assert ra.converged and rb.converged and rb.iterations >= ra.iterations
    assert a.distance(b, cfg.norm_spec) <= 10 * cfg.picard_tol * ra.reference_norm
    with pytest.raises(ValueError):
        picard_solve(psi0, cfg, init="random")


def test_large_data_raises_with_factors():
    cfg = config(T=2.0, lam=1.0, picard_max=8, n_t=17)
    with pytest.raises(ContractionFailed) as info:
        picard_solve(datum(l2=40.0, width=0.3), cfg)
    err = info.value
    assert not err.report.converged and err.report.factors
    assert "contraction factors" in str(err)
    assert isinstance(err.trajectory, Trajectory)


def test_time_quadrature_orders():
    """Both rules converge to the fine Simpson solution, at fourth and second order."""
    psi0 = datum(l2=1.0)
    ref = picard_solve(psi0, config(T=0.5, n_t=129))[0].final
    err = lambda q, n: rel_l2(picard_solve(psi0, config(T=0.5, n_t=n, quadrature=q))[0].final, ref)
    s17, s33 = err("simpson", 17), err("simpson", 33)
    t65, t129 = err("trapezoid", 65), err("trapezoid", 129)
    assert s17 / s33 > 10
    assert 3.5 < t65 / t129 < 4.5
    assert s33 < 1e-6 and t129 < 1e-5


def test_splitting_is_second_order():
    cfg = config(T=0.5, n_t=5)
    psi0 = datum(l2=2.0)
    u = [split_step_evolve(psi0, cfg, substeps=s).final for s in (1, 2, 4, 8)]
    e = [lebesgue_norm(u[i] - u[i + 1], 2) for i in range(3)]
    for a, b in zip(e, e[1:]):
        assert 3.5 < a / b < 4.5


def test_charge_drift_shrinks_with_time_resolution():
    psi0 = datum(l2=1.0)
    drifts = [charge_drift(picard_solve(psi0, config(T=0.5, n_t=n))[0]) for n in (5, 9, 17)]
    assert drifts[0] > drifts[1] > drifts[2]


def test_duhamel_map_rejects_wrong_nodes():
    cfg = config()
    traj = free_flight(datum(), cfg)
    with pytest.raises(ValueError):
        duhamel_map(datum(), traj, cfg.with_(n_t=17))


def test_contraction_factor_scales_with_T():
    psi0 = datum(l2=0.5)
    cfg = config(n_t=17)
    f1 = max(contraction_factor(psi0, cfg.with_(T=0.2)))
    f2 = max(contraction_factor(psi0, cfg.with_(T=0.1)))
    assert 0.35 < f2 / f1 < 0.65
    sweep = contraction_sweep(psi0, cfg, [0.1, 0.2])
    assert [r["T"] for r in sweep["rows"]] == [0.1, 0.2] and sweep["first_T_above_one"] is None


def test_blowup_monitor_flags_growth():
    t = np.linspace(0, 1, 5)
    base = datum().data
    amps = np.array([1, 1.1, 1.3, 50.0, np.inf])
    with np.errstate(invalid="ignore"):
        traj = Trajectory(GRID, t, amps[:, None, None] * base[None])
    rep = blowup_monitor(traj, [L2], factor=10)
    assert rep.flagged and rep.flags[L2.label()] == [3, 4]
    quiet = blowup_monitor(free_flight(datum(), config()), L2)
    assert not quiet.flagged


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(GRID, np.array([0.0, 0.0]), np.zeros((2, 256, 2)))
    with pytest.raises(ValueError):
        Trajectory(GRID, np.array([0.0, 1.0]), np.zeros((3, 256, 2)))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_lipschitz_ratio_bounded(seed):
    rng = np.random.default_rng(seed)
    params = HartreeParams(0.5, 1.0, EvolutionConfig(GRID, 0.5, 1.0, 1.0, 1.0, 3).rep)
    spec = NormSpec("mod", p=2, q=2 / 1.5, x_stride=4)
    psi = datum(l2=rng.uniform(0.1, 3), width=rng.uniform(0.5, 2), center=(rng.uniform(-3, 3),))
    phi = datum(l2=rng.uniform(0.1, 3), width=rng.uniform(0.5, 2), modulation=(rng.integers(-10, 10) * GRID.dxi,))
    r = lipschitz_ratio(psi, phi, params, spec)
    assert np.isfinite(r) and 0 < r < 20
