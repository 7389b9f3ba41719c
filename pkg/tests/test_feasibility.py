from __future__ import annotations

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxlab.coupling import cbd_encoding
from ctxlab.feasibility import (
    Equality,
    FeasibilityProblem,
    check_certificate,
    check_witness,
    solve,
)
from ctxlab.fixtures import pr_box, table3

from oracles import basis_feasible


def test_unique_solution():
    p = FeasibilityProblem.from_dense([[1, 1], [1, -1]], [1, 0])
    r = solve(p)
    assert r.feasible and r.verdict == "feasible"
    assert r.witness == (F(1, 2), F(1, 2))


def test_contradictory_rows_give_certificate():
    p = FeasibilityProblem.from_dense([[1, 1], [1, 1]], [1, 2])
    r = solve(p)
    assert not r.feasible and r.verdict == "infeasible"
    assert r.witness is None
    assert check_certificate(p, r.certificate)


def test_negative_solution_is_infeasible():
    # x1 - x2 = -1 and x1 + x2 = 0 forces x2 = 1/2, x1 = -1/2
    p = FeasibilityProblem.from_dense([[1, -1], [1, 1]], [-1, 0])
    r = solve(p)
    assert not r.feasible
    assert check_certificate(p, r.certificate)


def test_empty_problem_is_feasible():
    assert solve(FeasibilityProblem(3)).witness == (0, 0, 0)
    assert solve(FeasibilityProblem(0)).witness == ()


def test_zero_variables_with_nonzero_rhs():
    p = FeasibilityProblem(0, (Equality({}, F(1)),))
    r = solve(p)
    assert not r.feasible
    assert check_certificate(p, r.certificate)


def test_pr_box_encoding_is_infeasible():
    p = cbd_encoding(pr_box()).problem
    r = solve(p)
    assert not r.feasible
    assert check_certificate(p, r.certificate)


def test_table3_encoding_is_feasible():
    p = cbd_encoding(table3()).problem
    r = solve(p)
    assert r.feasible and check_witness(p, r.witness)


def test_solve_is_deterministic():
    p = cbd_encoding(table3()).problem
    assert solve(p) == solve(p)


def test_problem_rejects_bad_rows():
    with pytest.raises(ValueError):
        FeasibilityProblem(2, (([1, 2, 3], 1),))
    with pytest.raises(ValueError):
        FeasibilityProblem(2, (({5: 1}, 1),))


def test_problem_accepts_tuples_and_drops_zeros():
    p = FeasibilityProblem(3, (([0, 1, 0], "1/2"),))
    assert p.equalities[0].coeffs == {1: F(1)}
    assert p.equalities[0].rhs == F(1, 2)


def test_checkers_reject_wrong_vectors():
    p = FeasibilityProblem.from_dense([[1, 1]], [1])
    assert check_witness(p, [F(1, 2), F(1, 2)])
    assert not check_witness(p, [F(3, 2), F(-1, 2)])
    assert not check_witness(p, [F(1)])
    assert not check_certificate(p, [F(1)])
    assert not check_certificate(p, [F(-1)])  # y^T A < 0


small_int = st.integers(-3, 3)


@st.composite
def problems(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 4))
    rows = [[F(draw(small_int)) for _ in range(n)] for _ in range(m)]
    rhs = [F(draw(small_int), draw(st.integers(1, 4))) for _ in range(m)]
    return rows, rhs


@settings(max_examples=400, deadline=None)
@given(problems())
def test_simplex_matches_basis_enumeration(prob):
    rows, rhs = prob
    p = FeasibilityProblem.from_dense(rows, rhs)
    r = solve(p)
    expected, _ = basis_feasible(list(zip(rows, rhs)), len(rows[0]))
    assert r.feasible == expected
    if r.feasible:
        assert check_witness(p, r.witness)
    else:
        assert check_certificate(p, r.certificate)
