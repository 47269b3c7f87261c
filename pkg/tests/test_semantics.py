import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argkit import qbaf, semantics
from argkit.semantics import (
    DF_QUAD,
    EULER,
    QUADRATIC_ENERGY,
    SEMANTICS_IDS,
    NonConvergenceError,
    OutOfRangeError,
    dfquad_aggregate,
    dfquad_combine,
    euler_strength,
    evaluate,
    evaluate_iterative,
    qe_strength,
)
from conftest import build_full_tree, make_worked_tree, random_tree

TOL = 1e-9

# frozen against a 40-digit mpmath evaluation of the closed forms
EULER_HALF_E1 = 0.6820876635743718
QE_WORKED_ROOT = 0.4310344827586207
EULER_WORKED_ROOT = 0.4382695803722471

unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestAggregate:
    def test_empty(self):
        assert dfquad_aggregate([]) == 0.0

    def test_two_halves(self):
        # independent product oracle: 1 - (1-a)(1-b)
        assert abs(dfquad_aggregate([0.5, 0.5]) - (1 - 0.5 * 0.5)) < TOL
        assert abs(dfquad_aggregate([0.5, 0.5]) - 0.75) < TOL

    def test_absorbing_one(self):
        assert dfquad_aggregate([1.0, 0.3]) == 1.0

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            dfquad_aggregate([0.5, 1.2])

    @given(st.lists(unit_floats, max_size=8))
    def test_range(self, values):
        assert 0.0 <= dfquad_aggregate(values) <= 1.0

    @given(st.lists(unit_floats, max_size=8), st.randoms(use_true_random=False))
    def test_commutative(self, values, rng):
        shuffled = list(values)
        rng.shuffle(shuffled)
        assert dfquad_aggregate(shuffled) == dfquad_aggregate(values)

    @given(st.lists(unit_floats, max_size=8))
    def test_identity_zero(self, values):
        assert dfquad_aggregate(values + [0.0]) == dfquad_aggregate(values)

    @given(st.lists(unit_floats, max_size=8))
    def test_absorbing_element(self, values):
        assert dfquad_aggregate(values + [1.0]) == 1.0


class TestCombine:
    @pytest.mark.parametrize("x", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_balanced_is_identity(self, x):
        assert dfquad_combine(0.7, x, x) == 0.7

    def test_attack_surplus(self):
        assert abs(dfquad_combine(0.5, 0.8, 0.0) - 0.10) < TOL

    def test_support_surplus(self):
        assert abs(dfquad_combine(0.2, 0.3, 0.7) - 0.52) < TOL

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            dfquad_combine(1.5, 0.5, 0.5)

    def test_monotonicity_grid(self):
        grid = [i / 50 for i in range(51)]
        for tau in grid:
            for vs in grid:
                values = [dfquad_combine(tau, va, vs) for va in grid]
                assert all(a >= b for a, b in zip(values, values[1:])), "not non-increasing in va"
            for va in grid:
                values = [dfquad_combine(tau, va, vs) for vs in grid]
                assert all(a <= b for a, b in zip(values, values[1:])), "not non-decreasing in vs"

    @given(unit_floats, unit_floats, unit_floats)
    def test_range(self, tau, va, vs):
        assert 0.0 <= dfquad_combine(tau, va, vs) <= 1.0


class TestScalarStrengths:
    def test_euler_zero_energy_is_identity(self):
        assert abs(euler_strength(0.5, 0.0) - 0.5) < 1e-12

    def test_euler_dead_base_score(self):
        for energy in (-8.0, -1.0, 0.0, 1.0, 8.0):
            assert euler_strength(0.0, energy) == 0.0

    def test_euler_frozen_value(self):
        assert abs(euler_strength(0.5, 1.0) - EULER_HALF_E1) < 1e-12

    def test_euler_overflow_guard(self):
        assert 0.0 <= euler_strength(0.5, 1e9) <= 1.0
        assert 0.0 <= euler_strength(0.5, -1e9) <= 1.0

    def test_qe_zero_energy_is_identity(self):
        assert qe_strength(0.3, 0.0) == 0.3

    def test_qe_frozen_values(self):
        assert abs(qe_strength(0.5, 1.0) - 0.75) < 1e-12
        assert abs(qe_strength(0.5, -1.0) - 0.25) < 1e-12

    @pytest.mark.parametrize("func", [euler_strength, qe_strength])
    def test_energy_monotonicity_grid(self, func):
        energies = [-8.0 + i / 100 for i in range(1601)]
        for tau in (0.0, 0.25, 0.5, 0.75, 1.0):
            values = [func(tau, energy) for energy in energies]
            assert all(a <= b for a, b in zip(values, values[1:]))
            if func is euler_strength and 0.0 < tau < 1.0:
                assert all(a < b for a, b in zip(values, values[1:])), "euler not strictly increasing"

    @given(unit_floats, st.floats(min_value=-8, max_value=8, allow_nan=False))
    def test_ranges(self, tau, energy):
        assert 0.0 <= euler_strength(tau, energy) <= 1.0
        assert 0.0 <= qe_strength(tau, energy) <= 1.0

    def test_euler_lower_bound_is_tau_squared(self):
        for tau in (0.1, 0.5, 0.9):
            assert euler_strength(tau, -50.0) >= tau * tau - 1e-15


class TestEvaluate:
    @pytest.mark.parametrize("semantics_id", SEMANTICS_IDS)
    def test_single_node(self, semantics_id):
        tree = qbaf.single_claim("claim", 0.4)
        assert evaluate(tree, semantics_id) == {"a0": 0.4}

    def test_worked_tree_dfquad(self, worked_tree):
        strengths = evaluate(worked_tree, DF_QUAD)
        assert abs(strengths["a0"] - 0.30) < TOL
        assert strengths["a1"] == 0.8
        assert strengths["a2"] == 0.4

    def test_worked_tree_quadratic_energy(self, worked_tree):
        assert abs(evaluate(worked_tree, QUADRATIC_ENERGY)["a0"] - QE_WORKED_ROOT) < TOL

    def test_worked_tree_euler(self, worked_tree):
        assert abs(evaluate(worked_tree, EULER)["a0"] - EULER_WORKED_ROOT) < TOL

    @pytest.mark.parametrize("semantics_id", SEMANTICS_IDS)
    def test_leaf_law_exact(self, semantics_id):
        rng = random.Random(11)
        for _ in range(25):
            tree = random_tree(rng, max_children=2)
            strengths = evaluate(tree, semantics_id)
            for argument in tree.arguments:
                if not qbaf.children_of(tree, argument.id):
                    assert strengths[argument.id] == argument.base_score

    def test_balance_law_dfquad(self):
        tree = qbaf.single_claim("claim", 0.37)
        tree = qbaf.add_argument(tree, "a0", qbaf.ATTACK, "against a", 0.3, "user-added")
        tree = qbaf.add_argument(tree, "a0", qbaf.ATTACK, "against b", 0.5, "user-added")
        tree = qbaf.add_argument(tree, "a0", qbaf.SUPPORT, "for a", 0.5, "user-added")
        tree = qbaf.add_argument(tree, "a0", qbaf.SUPPORT, "for b", 0.3, "user-added")
        assert evaluate(tree, DF_QUAD)["a0"] == 0.37

    @pytest.mark.parametrize("semantics_id", [EULER, QUADRATIC_ENERGY])
    def test_zero_energy_law(self, semantics_id):
        for x in (0.0, 0.2, 0.9, 1.0):
            tree = qbaf.single_claim("claim", 0.37)
            tree = qbaf.add_argument(tree, "a0", qbaf.ATTACK, "against", x, "user-added")
            tree = qbaf.add_argument(tree, "a0", qbaf.SUPPORT, "for", x, "user-added")
            assert abs(evaluate(tree, semantics_id)["a0"] - 0.37) < 1e-12

    @pytest.mark.parametrize("semantics_id", SEMANTICS_IDS)
    def test_range_law(self, semantics_id):
        rng = random.Random(13)
        for _ in range(400):
            tree = random_tree(rng, max_children=3)
            assert all(0.0 <= v <= 1.0 for v in evaluate(tree, semantics_id).values())

    @pytest.mark.parametrize("semantics_id", SEMANTICS_IDS)
    def test_child_order_never_matters(self, semantics_id):
        rng = random.Random(17)
        for _ in range(20):
            tree = random_tree(rng, max_children=4)
            reference = evaluate(tree, semantics_id)
            arguments, edges = list(tree.arguments), list(tree.edges)
            rng.shuffle(arguments)
            rng.shuffle(edges)
            shuffled = qbaf.Qbaf(root=tree.root, arguments=tuple(arguments), edges=tuple(edges))
            assert evaluate(shuffled, semantics_id) == reference

    def test_determinism_bytes(self, seven_node_tree):
        first = semantics.to_json(DF_QUAD, evaluate(seven_node_tree, DF_QUAD))
        second = semantics.to_json(DF_QUAD, evaluate(seven_node_tree, DF_QUAD))
        assert first == second

    def test_invalid_tree_rejected(self):
        broken = qbaf.Qbaf(
            root="a0",
            arguments=(
                qbaf.Argument("a0", "claim", 0.5, "claim"),
                qbaf.Argument("a1", "x", 0.5, "user-added"),
            ),
            edges=(qbaf.Edge("a1", "a0", qbaf.ATTACK), qbaf.Edge("a0", "a1", qbaf.ATTACK)),
        )
        with pytest.raises(qbaf.InvariantError):
            evaluate(broken, DF_QUAD)

    def test_unknown_semantics(self, worked_tree):
        with pytest.raises(semantics.UnknownSemanticsError):
            evaluate(worked_tree, "weighted-max")


class TestIterativeOracle:
    def test_single_node_one_iteration(self):
        tree = qbaf.single_claim("claim", 0.4)
        assert evaluate_iterative(tree, DF_QUAD, max_iters=1) == {"a0": 0.4}

    @pytest.mark.parametrize("semantics_id", SEMANTICS_IDS)
    def test_matches_bottom_up_on_random_trees(self, semantics_id):
        rng = random.Random(19)
        for _ in range(80):
            tree = random_tree(rng, max_children=3)
            exact = evaluate(tree, semantics_id)
            iterated = evaluate_iterative(tree, semantics_id, epsilon=1e-12, max_iters=10)
            assert exact.keys() == iterated.keys()
            for key in exact:
                assert abs(exact[key] - iterated[key]) < TOL

    def test_depth2_needs_three_sweeps(self):
        tree = build_full_tree(2, 1, random.Random(3))
        with pytest.raises(NonConvergenceError):
            evaluate_iterative(tree, DF_QUAD, max_iters=1)
        with pytest.raises(NonConvergenceError):
            evaluate_iterative(tree, DF_QUAD, max_iters=2)
        result = evaluate_iterative(tree, DF_QUAD, max_iters=3)
        assert result == evaluate(tree, DF_QUAD)

    def test_parameter_validation(self, worked_tree):
        with pytest.raises(ValueError):
            evaluate_iterative(worked_tree, DF_QUAD, epsilon=0.0)
        with pytest.raises(ValueError):
            evaluate_iterative(worked_tree, DF_QUAD, max_iters=0)


class TestStrengthMapJson:
    def test_sorted_and_canonical(self, worked_tree):
        data = semantics.to_json(DF_QUAD, evaluate(worked_tree, DF_QUAD))
        assert data == b'{"semantics":"df-quad","strengths":{"a0":0.3,"a1":0.8,"a2":0.4}}'
