import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_hartree.clifford import (
    RELATION_TOL,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    CliffordRep,
    DimensionUnsupported,
    build_clifford,
    check_relations,
    spinor_size,
)


def brute_force_violation(alphas, beta):
    """Independent check: every pairwise anticommutator among the d+1 generators."""
    gens = list(alphas) + [beta]
    n = beta.shape[0]
    worst = 0.0
    for a, b in itertools.product(range(len(gens)), repeat=2):
        target = 2 * np.eye(n) if a == b else np.zeros((n, n))
        worst = max(worst, np.abs(gens[a] @ gens[b] + gens[b] @ gens[a] - target).max())
    return worst


@pytest.mark.parametrize("d", range(1, 9))
def test_relations_hold(d):
    rep = build_clifford(d)
    assert rep.n == spinor_size(d) == 2 ** ((d + 1) // 2)
    assert len(rep.alphas) == d
    assert check_relations(rep).passes()
    assert brute_force_violation(rep.alphas, rep.beta) <= RELATION_TOL


def test_three_dimensional_matrices_are_the_standard_dirac_matrices():
    rep = build_clifford(3)
    zero, eye = np.zeros((2, 2)), np.eye(2)
    for a, s in zip(rep.alphas, (SIGMA1, SIGMA2, SIGMA3)):
        np.testing.assert_array_equal(a, np.block([[zero, s], [s, zero]]))
    np.testing.assert_array_equal(rep.beta, np.block([[eye, zero], [zero, -eye]]))


def test_pauli_matrices_literal():
    np.testing.assert_array_equal(SIGMA1, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(SIGMA2, [[0, -1j], [1j, 0]])
    np.testing.assert_array_equal(SIGMA3, [[1, 0], [0, -1]])


def test_low_dimensions():
    r1, r2 = build_clifford(1), build_clifford(2)
    np.testing.assert_array_equal(r1.alphas[0], SIGMA1)
    np.testing.assert_array_equal(r1.beta, SIGMA3)
    np.testing.assert_array_equal(r2.alphas[0], SIGMA1)
    np.testing.assert_array_equal(r2.alphas[1], SIGMA2)
    np.testing.assert_array_equal(r2.beta, SIGMA3)


def test_spinor_size_doubling():
    assert [spinor_size(d) for d in range(1, 6)] == [2, 2, 4, 4, 8]


def test_violation_when_beta_is_identity():
    bad = CliffordRep(1, 2, (SIGMA1.copy(),), np.eye(2, dtype=complex))
    rep = check_relations(bad)
    assert rep.alpha_beta == pytest.approx(2.0)
    assert not rep.passes()


def test_violation_when_alpha_is_doubled():
    bad = CliffordRep(1, 2, (2 * SIGMA1,), SIGMA3.copy())
    rep = check_relations(bad)
    assert rep.alpha_alpha == pytest.approx(3.0)
    assert rep.beta_square == 0 and rep.alpha_beta == 0


@pytest.mark.parametrize("d", [0, -1, 17])
def test_unsupported_dimensions(d):
    with pytest.raises(DimensionUnsupported):
        build_clifford(d)


def test_size_cap_is_configurable():
    with pytest.raises(DimensionUnsupported):
        build_clifford(5, max_size=4)


def test_matrices_are_read_only():
    rep = build_clifford(2)
    with pytest.raises(ValueError):
        rep.beta[0, 0] = 5


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_symbol_squares_to_scalar(d, seed):
    rng = np.random.default_rng(seed)
    rep = build_clifford(d)
    xi = rng.normal(size=d) * 5
    m = abs(rng.normal())
    H = rep.symbol(xi, m)
    target = (m**2 + xi @ xi) * np.eye(rep.n)
    assert np.abs(H @ H - target).max() <= 1e-12 * max(1.0, target[0, 0])
    np.testing.assert_allclose(H, H.conj().T, atol=0)
