"""Independent brute-force oracle for the CbD feasibility question.

Shares no code with the library's encoder or simplex.  The coupling space is
the full product of every (q, c) coordinate's outcome space.  Rows are the
per-context cell masses, total mass, and per (q, c, c') equality masses equal
to ``sum_v min(p_c(v), p_c'(v))``, all computed here from the raw context
tables.

Feasibility is decided by basic solutions: after removing dependent rows,
a nonempty polytope ``{x >= 0 : Ax = b}`` has a vertex, and every vertex is
``x_B = A_B^{-1} b`` for some nonsingular r-column subset B.  So trying all
subsets and checking nonnegativity is exact.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb

ZERO, ONE = Fraction(0), Fraction(1)


class TooLarge(Exception):
    pass


def _marginal(ctx, q, values):
    i = ctx.measured.index(q)
    out = {v: ZERO for v in values}
    for key, p in ctx.mass.items():
        out[key[i]] += p
    return out


def assemble(system):
    """Dense rows ``(coeffs, rhs)`` over the full product space."""
    coords = [(q, ctx.context_id) for ctx in system.contexts for q in ctx.measured]
    spaces = [system.values(q) for q, _ in coords]
    columns = list(product(*spaces))
    rows = []
    for ctx in system.contexts:
        idx = [coords.index((q, ctx.context_id)) for q in ctx.measured]
        for cell in product(*(system.values(q) for q in ctx.measured)):
            coeffs = [ONE if tuple(col[i] for i in idx) == cell else ZERO for col in columns]
            rows.append((coeffs, ctx.mass.get(cell, ZERO)))
    rows.append(([ONE] * len(columns), ONE))
    for q in system.observables:
        cs = [ctx for ctx in system.contexts if q in ctx.measured]
        for a in range(len(cs)):
            for b in range(a + 1, len(cs)):
                ca, cb = cs[a], cs[b]
                ma = _marginal(ca, q, system.values(q))
                mb = _marginal(cb, q, system.values(q))
                alpha = sum((min(ma[v], mb[v]) for v in ma), ZERO)
                ia, ib = coords.index((q, ca.context_id)), coords.index((q, cb.context_id))
                eq = [ONE if col[ia] == col[ib] else ZERO for col in columns]
                rows.append((eq, alpha))
                # total minus equality: the unequal mass, also nonnegative
                rows.append(([ONE - x for x in eq], ONE - alpha))
    return columns, rows


def presolve(columns, rows):
    """Drop columns forced to zero by a nonnegative row with zero rhs."""
    keep = list(range(len(columns)))
    changed = True
    while changed:
        changed = False
        for coeffs, rhs in rows:
            if rhs == 0 and all(coeffs[j] >= 0 for j in keep):
                dead = {j for j in keep if coeffs[j] > 0}
                if dead:
                    keep = [j for j in keep if j not in dead]
                    changed = True
    return keep, [([coeffs[j] for j in keep], rhs) for coeffs, rhs in rows]


def _row_reduce(rows, n):
    """Independent rows of ``[A | b]``; None when the system is inconsistent."""
    basis: list = []  # (pivot column, row)
    for coeffs, rhs in rows:
        r = list(coeffs) + [rhs]
        for piv, br in basis:
            if r[piv]:
                f = r[piv]
                r = [x - f * y for x, y in zip(r, br)]
        nz = next((j for j in range(n) if r[j]), None)
        if nz is None:
            if r[n]:
                return None
            continue
        f = r[nz]
        r = [x / f for x in r]
        # keep previous rows reduced against the new pivot
        basis = [(p, [x - br[nz] * y for x, y in zip(br, r)]) for p, br in basis]
        basis.append((nz, r))
    return [br for _, br in basis]


def _bases(a, b, n, r):
    """Yield ``(columns, x_B)`` for every nonsingular r-column subset.

    Depth-first Gauss-Jordan: columns are added in increasing order and each
    one is pivoted in immediately, so a dependent prefix prunes all of its
    extensions and shared prefixes are eliminated once.
    """
    m0 = [list(row) + [rhs] for row, rhs in zip(a, b)]

    def walk(m, free_rows, chosen, start):
        if len(chosen) == r:
            # every row is a pivot row; x for the pivot of row i is its rhs
            yield chosen, m
            return
        for j in range(start, n - (r - len(chosen)) + 1):
            piv = next((i for i in free_rows if m[i][j]), None)
            if piv is None:
                continue
            f = m[piv][j]
            prow = [x / f for x in m[piv]]
            nm = [prow if i == piv else ([x - row[j] * y for x, y in zip(row, prow)] if row[j] else row) for i, row in enumerate(m)]
            yield from walk(nm, [i for i in free_rows if i != piv], chosen + [(j, piv)], j + 1)

    for chosen, m in walk(m0, list(range(r)), [], 0):
        yield [j for j, _ in chosen], [m[i][n] for _, i in chosen]


def basis_feasible(rows, n, max_subsets: int = 200_000):
    """Exhaustive basic-solution search; returns (feasible, x or None)."""
    reduced = _row_reduce(rows, n)
    if reduced is None:
        return False, None
    r = len(reduced)
    if r == 0:
        return True, [ZERO] * n
    if comb(n, r) > max_subsets:
        raise TooLarge(f"C({n}, {r}) subsets")
    a = [row[:n] for row in reduced]
    b = [row[n] for row in reduced]
    for cols, xb in _bases(a, b, n, r):
        if any(x < 0 for x in xb):
            continue
        x = [ZERO] * n
        for j, v in zip(cols, xb):
            x[j] = v
        return True, x
    return False, None


def cbd_oracle(system, max_subsets: int = 200_000):
    """True iff a multimaximal coupling exists; the witness is checked against every row."""
    columns, rows = assemble(system)
    keep, small = presolve(columns, rows)
    feasible, x = basis_feasible(small, len(keep), max_subsets)
    if feasible:
        for coeffs, rhs in small:
            assert sum((c * v for c, v in zip(coeffs, x)), ZERO) == rhs
    return feasible


def oracle_size(system) -> tuple:
    """(columns after presolve, rank) for tractability filtering."""
    columns, rows = assemble(system)
    keep, small = presolve(columns, rows)
    reduced = _row_reduce(small, len(keep))
    return len(keep), (0 if reduced is None else len(reduced))
