from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbslab.gibbs import ising_tables, potts_tables
from gibbslab.info import entropy, mutual_information
from gibbslab.tree import (InvariantViolation, TreeChain, ball_measure, bp_solve,
                           brute_force_root_marginal, chain_from_bp, decay_bound, decay_table,
                           edge_union_shape, joint_at_distance, solve_chain, tree_ball_shape,
                           validate_shape)
from oracles import ising_tree_joint, mutual_info_entropies

BOUNDS = [Fraction(2, 3), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4),
          Fraction(1, 6), Fraction(1, 8), Fraction(1, 12), Fraction(1, 16)]


def test_decay_bound_exact():
    assert [decay_bound(3, k) for k in range(1, 9)] == BOUNDS
    assert decay_bound(4, 3) == Fraction(2, 12)


@pytest.mark.parametrize("beta", [0.1, 0.25, 0.4])
def test_zero_field_joint_matches_closed_form(beta):
    h, J = ising_tables(beta)
    chain, bp = solve_chain(3, J, h)
    assert bp.unique
    for k in range(1, 9):
        assert np.abs(joint_at_distance(chain, k).probs - ising_tree_joint(beta, k)).max() < 1e-12


def test_frozen_mutual_information():
    # frozen from the closed-form joint: beta = 0.4, k = 1
    h, J = ising_tables(0.4)
    chain, _ = solve_chain(3, J, h)
    assert abs(mutual_information(joint_at_distance(chain, 1)) - 0.07402609951425743) < 1e-13


@pytest.mark.parametrize("beta,field", [(0.4, 0.0), (0.3, 0.25), (-0.2, 0.5)])
def test_bp_root_marginal_matches_enumeration(beta, field):
    h, J = ising_tables(beta, field)
    chain, bp = solve_chain(3, J, h)
    ref = brute_force_root_marginal(3, 2, J, h, bp)
    assert np.abs(ref - chain.pi).max() < 1e-10
    assert chain.reversibility_residual() <= 1e-10
    assert chain.stationarity_residual() <= 1e-12


def test_potts_chain():
    h, J = potts_tables(3, 0.2)
    chain, bp = solve_chain(3, J, h)
    assert bp.unique
    assert np.allclose(chain.pi, 1 / 3)
    ref = brute_force_root_marginal(3, 2, J, h, bp)
    assert np.abs(ref - chain.pi).max() < 1e-10


@pytest.mark.parametrize("beta", [1.2, -1.2])
def test_non_uniqueness_detected(beta):
    h, J = ising_tables(beta)
    assert not bp_solve(3, J, h).unique


def test_uniqueness_threshold():
    # ferromagnetic Ising on T_3 is unique iff tanh(beta) <= 1/2
    for beta, expect in [(0.5, True), (0.6, False)]:
        h, J = ising_tables(beta)
        assert bp_solve(3, J, h).unique is expect


def test_shapes():
    assert len(tree_ball_shape(3, 2)) == 10
    assert len(edge_union_shape(3, 1)) == 6
    assert len(edge_union_shape(3, 2)) == 14
    with pytest.raises(ValueError):
        validate_shape([-1, 0, 0, 0, 0], 3)


def test_ball_measure_marginals():
    h, J = ising_tables(0.3, 0.2)
    chain, _ = solve_chain(3, J, h)
    t = ball_measure(chain, edge_union_shape(3, 1))
    assert np.allclose(t.marginal((0, 1)).probs, chain.edge_marginal(), atol=1e-14)
    for leaf in range(2, 6):
        assert np.allclose(t.marginal((leaf,)).probs, chain.pi, atol=1e-14)


def test_invariants_enforced():
    with pytest.raises(InvariantViolation):
        TreeChain((0, 1), 3, [0.5, 0.5], [[0.9, 0.1], [0.3, 0.7]])


def test_decay_table_rows():
    h, J = ising_tables(0.25)
    chain, _ = solve_chain(3, J, h)
    rows = decay_table(chain, 8)
    assert [r.bound for r in rows] == BOUNDS
    assert all(r.passed for r in rows)
    assert all(a.ratio > b.ratio for a, b in zip(rows, rows[1:]))


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-1.0, 1.0), st.integers(3, 5))
def test_chain_invariants_property(beta, field, d):
    h, J = ising_tables(beta, field)
    chain, bp = solve_chain(d, J, h)
    assert chain.reversibility_residual() <= 1e-12
    assert chain.stationarity_residual() <= 1e-12
    for k in (1, 2, 5):
        xi = joint_at_distance(chain, k)
        assert np.allclose(xi.probs.sum(axis=0), chain.pi, atol=1e-12)
        assert abs(mutual_information(xi) - mutual_info_entropies(xi.probs)) < 1e-10
    assert abs(entropy(chain.pi) - entropy(chain.pi[::-1])) < 1e-15
