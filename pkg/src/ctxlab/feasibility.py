"""Exact linear feasibility: does ``A x = b, x >= 0`` have a solution?

The solver is a revised phase-1 simplex over ``Fraction`` with Bland's
pivoting rule.  A feasible answer carries a witness vector; an infeasible one
carries a Farkas certificate ``y`` with ``y^T A >= 0`` (every column) and
``y^T b < 0``, which rules out any nonnegative solution.  Both are checked
by re-substitution before :func:`solve` returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import TheoremViolation

ZERO = Fraction(0)


@dataclass(frozen=True)
class Equality:
    coeffs: Mapping[int, Fraction]
    rhs: Fraction
    label: str = ""


@dataclass(frozen=True)
class FeasibilityProblem:
    """Equalities over ``num_vars`` nonnegative variables.

    Rows are sparse: ``coeffs`` maps a variable index to its coefficient.
    """

    num_vars: int
    equalities: tuple = ()

    def __post_init__(self):
        rows = []
        for eq in self.equalities:
            if not isinstance(eq, Equality):
                coeffs, rhs, *rest = eq
                eq = Equality(coeffs, rhs, *rest)
            if not isinstance(eq.coeffs, Mapping):
                if len(eq.coeffs) != self.num_vars:
                    raise ValueError("coefficient vector length differs from num_vars")
                coeffs = {j: Fraction(a) for j, a in enumerate(eq.coeffs) if a != 0}
            else:
                coeffs = {
                    j: (a if isinstance(a, Fraction) else Fraction(a))
                    for j, a in eq.coeffs.items()
                    if a != 0
                }
            if coeffs and (min(coeffs) < 0 or max(coeffs) >= self.num_vars):
                raise ValueError("variable index out of range")
            rows.append(Equality(coeffs, Fraction(eq.rhs), eq.label))
        object.__setattr__(self, "equalities", tuple(rows))

    @classmethod
    def from_dense(cls, matrix: Sequence[Sequence], rhs: Sequence) -> "FeasibilityProblem":
        n = len(matrix[0]) if matrix else 0
        return cls(n, tuple(Equality(dict(enumerate(row)), b) for row, b in zip(matrix, rhs)))

    @property
    def num_rows(self) -> int:
        return len(self.equalities)


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: tuple | None = None
    certificate: tuple | None = None
    pivots: int = 0

    @property
    def verdict(self) -> str:
        return "feasible" if self.feasible else "infeasible"


def check_witness(problem: FeasibilityProblem, x: Sequence[Fraction]) -> bool:
    if len(x) != problem.num_vars or any(v < 0 for v in x):
        return False
    return all(
        sum((a * x[j] for j, a in eq.coeffs.items()), ZERO) == eq.rhs for eq in problem.equalities
    )


def check_certificate(problem: FeasibilityProblem, y: Sequence[Fraction]) -> bool:
    """True iff ``y`` proves infeasibility: ``y^T A >= 0`` and ``y^T b < 0``."""
    if len(y) != problem.num_rows:
        return False
    if sum((yi * eq.rhs for yi, eq in zip(y, problem.equalities)), ZERO) >= 0:
        return False
    combo = [ZERO] * problem.num_vars
    for yi, eq in zip(y, problem.equalities):
        if yi:
            for j, a in eq.coeffs.items():
                combo[j] += yi * a
    return all(v >= 0 for v in combo)


def _lcm_denominators(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, v.denominator)
    return d


class _Phase1:
    """Revised simplex state for ``min sum(a)`` s.t. ``A x + a = b``, ``b >= 0``."""

    def __init__(self, problem: FeasibilityProblem):
        self.m = m = problem.num_rows
        self.n = n = problem.num_vars
        self.sign = [(-1 if eq.rhs < 0 else 1) for eq in problem.equalities]
        self.b = [abs(eq.rhs) for eq in problem.equalities]

        # column-major copies: exact for the ratio test, integer-scaled for pricing
        cols: list[list] = [[] for _ in range(n)]
        for i, eq in enumerate(problem.equalities):
            s = self.sign[i]
            for j, a in eq.coeffs.items():
                cols[j].append((i, a if s > 0 else -a))
        self.cols = cols
        self.int_cols = []
        for col in cols:
            scale = _lcm_denominators(a for _, a in col)
            self.int_cols.append([(i, int(a * scale)) for i, a in col])

        # variables n..n+m-1 are the artificials; basis starts as identity
        self.basis = [n + i for i in range(m)]
        self.binv = [[Fraction(int(i == k)) for k in range(m)] for i in range(m)]
        self.xb = list(self.b)
        self.dropped: set[int] = set()
        self.pivots = 0

    def duals(self) -> list[Fraction]:
        # phase-1 costs are 1 on artificials, 0 elsewhere
        y = [ZERO] * self.m
        for r, var in enumerate(self.basis):
            if var >= self.n:
                row = self.binv[r]
                for k in range(self.m):
                    if row[k]:
                        y[k] += row[k]
        return y

    def entering(self, y: list[Fraction]) -> int | None:
        """Lowest-index variable with negative reduced cost (Bland)."""
        scale = _lcm_denominators(y)
        yi = [int(v * scale) for v in y]
        in_basis = set(self.basis)
        for j in range(self.n):
            if j in in_basis:
                continue
            # reduced cost 0 - y.A_j; scaled by positive factors only
            if sum(yi[i] * a for i, a in self.int_cols[j]) > 0:
                return j
        # artificials outside the basis have been dropped; none can re-enter
        return None

    def column(self, j: int) -> list[tuple[int, Fraction]]:
        if j < self.n:
            return self.cols[j]
        return [(j - self.n, Fraction(1))]

    def step(self, j: int) -> bool:
        col = self.column(j)
        u = [ZERO] * self.m
        for r in range(self.m):
            row = self.binv[r]
            acc = ZERO
            for i, a in col:
                if row[i]:
                    acc += row[i] * a
            u[r] = acc

        leave = None
        best = None
        for r in range(self.m):
            if u[r] > 0:
                ratio = self.xb[r] / u[r]
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and self.basis[r] < self.basis[leave])
                ):
                    best, leave = ratio, r
        if leave is None:
            # unbounded direction cannot occur: phase-1 objective is bounded below
            raise TheoremViolation("phase-1 simplex found an unbounded ray")

        piv = u[leave]
        prow = [v / piv for v in self.binv[leave]]
        self.binv[leave] = prow
        self.xb[leave] = self.xb[leave] / piv
        nz = [k for k in range(self.m) if prow[k]]
        for r in range(self.m):
            if r != leave and u[r]:
                f = u[r]
                row = self.binv[r]
                for k in nz:
                    row[k] -= f * prow[k]
                self.xb[r] -= f * self.xb[leave]

        old = self.basis[leave]
        self.basis[leave] = j
        if old >= self.n:
            # an artificial that leaves is never needed again
            self.dropped.add(old)
        self.pivots += 1
        return True

    def objective(self) -> Fraction:
        return sum((self.xb[r] for r, v in enumerate(self.basis) if v >= self.n), ZERO)


def solve(problem: FeasibilityProblem) -> FeasibilityResult:
    """Decide feasibility exactly; deterministic for a given problem."""
    if problem.num_rows == 0:
        return FeasibilityResult(True, witness=tuple([ZERO] * problem.num_vars))

    state = _Phase1(problem)
    while True:
        y = state.duals()
        j = state.entering(y)
        if j is None:
            break
        state.step(j)

    if state.objective() == 0:
        x = [ZERO] * problem.num_vars
        for r, var in enumerate(state.basis):
            if var < problem.num_vars:
                x[var] = state.xb[r]
        if not check_witness(problem, x):
            raise TheoremViolation("simplex witness failed re-substitution")
        return FeasibilityResult(True, witness=tuple(x), pivots=state.pivots)

    # optimal duals y give y^T A <= 0 < y^T b on the sign-normalised rows;
    # undo the normalisation and negate for the y^T A >= 0 > y^T b form
    y = state.duals()
    cert = tuple(-yi * s for yi, s in zip(y, state.sign))
    if not check_certificate(problem, cert):
        raise TheoremViolation("infeasibility certificate failed verification")
    return FeasibilityResult(False, certificate=cert, pivots=state.pivots)
