"""Couplings and the three contextuality tests as exact feasibility problems.

The coupling space has one coordinate per ``(q, c)`` pair with q measured in
c, laid out as ``system.pairs``.  Because each coordinate belongs to exactly
one context, a global assignment is just a choice of one assignment per
context, and assignments outside a context's support are forced to zero
mass.  Both problems below are assembled over those support products only.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Mapping

from .errors import CapacityError, DomainMismatch, InputError, TheoremViolation
from .feasibility import Equality, FeasibilityProblem, FeasibilityResult, solve
from .model import (
    coupling_to_model,
    direct_influence,
    hahn_jordan,
    is_aligned,
    is_model_for,
    minimal_influences,
)
from .system import (
    ONE,
    ZERO,
    Check,
    MeasurementSystem,
    is_consistently_connected,
    marginal,
    to_rational,
)

DEFAULT_MAX_VARS = 1 << 20

NONCONTEXTUAL = "noncontextual"
CONTEXTUAL = "contextual"
NOT_APPLICABLE = "not-applicable"


def max_vars() -> int:
    raw = os.environ.get("CTXLAB_MAX_VARS")
    if not raw:
        return DEFAULT_MAX_VARS
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"CTXLAB_MAX_VARS must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Coupling:
    system: MeasurementSystem
    mass: Mapping[tuple, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        mass: dict = {}
        for key, p in dict(self.mass).items():
            p = to_rational(p)
            if p != 0:
                key = tuple(key)
                mass[key] = mass.get(key, ZERO) + p
        object.__setattr__(self, "mass", mass)

    def projection(self, c) -> dict:
        idx = [i for i, (_, cc) in enumerate(self.system.pairs) if cc == c]
        out: dict = {}
        for key, p in self.mass.items():
            sub = tuple(key[i] for i in idx)
            out[sub] = out.get(sub, ZERO) + p
        return out


@dataclass(frozen=True)
class ContextualityVerdict:
    kind: str  # standard | cbd | m
    verdict: str  # noncontextual | contextual | not-applicable
    witness: Any = None
    certificate: tuple | None = None  # ((row label, multiplier), ...)
    minima: dict = field(default_factory=dict)
    size: tuple = (0, 0)  # (variables, equalities) of the solved problem

    @property
    def contextual(self) -> bool:
        return self.verdict == CONTEXTUAL


def _check_layout(coupling: Coupling, system: MeasurementSystem) -> None:
    if coupling.system.pairs != system.pairs:
        raise DomainMismatch("domain mismatch: coupling coordinates differ from the system's (q, c) pairs")
    spaces = [set(system.values(q)) for q, _ in system.pairs]
    for key in coupling.mass:
        if len(key) != len(spaces) or any(v not in sp for v, sp in zip(key, spaces)):
            raise DomainMismatch(f"domain mismatch: assignment {key!r} outside the coupling space")
    if any(p < 0 for p in coupling.mass.values()):
        raise DomainMismatch("coupling has negative mass")


def is_coupling_for(coupling: Coupling, system: MeasurementSystem) -> Check:
    _check_layout(coupling, system)
    bad = [ctx.context_id for ctx in system.contexts if coupling.projection(ctx.context_id) != ctx.mass]
    return Check(not bad, bad)


def _pair_positions(system: MeasurementSystem, q, c, c2) -> tuple[int, int]:
    cs = system.contexts_of(q)
    if c not in cs or c2 not in cs or c == c2:
        raise InputError(f"invalid context pair ({c!r}, {c2!r}) for observable {q!r}")
    pairs = system.pairs
    return pairs.index((q, c)), pairs.index((q, c2))


def equality_probability(coupling: Coupling, q, c, c2) -> Fraction:
    i, k = _pair_positions(coupling.system, q, c, c2)
    return sum((p for key, p in coupling.mass.items() if key[i] == key[k]), ZERO)


def multimax_target(system: MeasurementSystem, q, c, c2) -> Fraction:
    """Largest achievable ``Pr[T_q^c = T_q^c']``: the marginals' overlap."""
    _pair_positions(system, q, c, c2)
    return hahn_jordan(marginal(system, q, c), marginal(system, q, c2)).alpha


def projects_to_system(joint: Mapping[tuple, Fraction], system: MeasurementSystem) -> bool:
    """Does a global distribution over ``system.observables`` reproduce every context?"""
    if any(p < 0 for p in joint.values()) or sum(joint.values(), ZERO) != 1:
        return False
    pos = {q: i for i, q in enumerate(system.observables)}
    for ctx in system.contexts:
        idx = [pos[q] for q in ctx.measured]
        proj: dict = {}
        for key, p in joint.items():
            if p:
                sub = tuple(key[i] for i in idx)
                proj[sub] = proj.get(sub, ZERO) + p
        if proj != ctx.mass:
            return False
    return True


# --- problem assembly -----------------------------------------------------


@dataclass(frozen=True)
class Encoding:
    """An assembled problem plus what is needed to read its witness back."""

    problem: FeasibilityProblem
    columns: tuple  # variable index -> global assignment


def _guard(n: int, what: str) -> None:
    limit = max_vars()
    if n > limit:
        raise CapacityError(f"{what} needs {n} variables (limit {limit}; raise CTXLAB_MAX_VARS to allow)")


def cbd_encoding(system: MeasurementSystem) -> Encoding:
    """Multimaximal-coupling feasibility over the coupling space.

    Rows: one per context support cell, a total-mass row, and for every
    ``(q, c, c')`` the equality mass fixed to the pairwise maximum.  Pinning
    each pair to its own two-variable maximum is exact: a maximal coupling of
    the pair extends to a coupling of the whole system by attaching the other
    coordinates independently, so the grand-coupling maximum equals the pair
    one.
    """
    supports = [list(ctx.mass) for ctx in system.contexts]
    n = 1
    for sup in supports:
        n *= len(sup)
    _guard(n, "CbD test")

    starts = []
    pos = 0
    for ctx in system.contexts:
        starts.append(pos)
        pos += len(ctx.measured)
    columns = tuple(
        tuple(v for key in combo for v in key) for combo in product(*supports)
    )

    one = Fraction(1)
    rows: list[Equality] = []
    for k, ctx in enumerate(system.contexts):
        cell = {key: i for i, key in enumerate(supports[k])}
        lo, hi = starts[k], starts[k] + len(ctx.measured)
        buckets: list[dict] = [{} for _ in supports[k]]
        for j, col in enumerate(columns):
            buckets[cell[col[lo:hi]]][j] = one
        for key, coeffs in zip(supports[k], buckets):
            rows.append(Equality(coeffs, ctx.mass[key], f"context {ctx.context_id!r} cell {list(key)!r}"))
    rows.append(Equality({j: one for j in range(n)}, ONE, "total mass"))

    where = {pair: i for i, pair in enumerate(system.pairs)}
    for q, c, c2 in system.triples():
        i, k = where[q, c], where[q, c2]
        alpha = multimax_target(system, q, c, c2)
        coeffs = {j: one for j, col in enumerate(columns) if col[i] == col[k]}
        rows.append(Equality(coeffs, alpha, f"equal q={q!r} c={c!r} c'={c2!r}"))
    return Encoding(FeasibilityProblem(n, tuple(rows)), columns)


def _global_assignments(system: MeasurementSystem) -> list[tuple]:
    """Assignments to all observables whose every context projection has mass."""
    order = system.observables
    pos = {q: i for i, q in enumerate(order)}
    closing: dict = {}
    for ctx in system.contexts:
        last = max(pos[q] for q in ctx.measured) if ctx.measured else -1
        closing.setdefault(last, []).append(([pos[q] for q in ctx.measured], set(ctx.mass)))

    out: list[tuple] = []
    partial: list = []

    def extend(i: int) -> None:
        if i == len(order):
            out.append(tuple(partial))
            return
        for v in system.values(order[i]):
            partial.append(v)
            if all(tuple(partial[t] for t in idx) in sup for idx, sup in closing.get(i, ())):
                extend(i + 1)
            partial.pop()

    extend(0)
    return out


def standard_encoding(system: MeasurementSystem) -> Encoding:
    """Joint-distribution feasibility over ``prod_q O_q`` (Fine's criterion)."""
    bound = 1
    for q in system.observables:
        bound *= len(system.values(q))
    supp = 1
    for ctx in system.contexts:
        supp *= len(ctx.mass)
    _guard(min(bound, supp), "standard test")

    columns = tuple(_global_assignments(system))
    pos = {q: i for i, q in enumerate(system.observables)}
    one = Fraction(1)
    rows: list[Equality] = []
    for ctx in system.contexts:
        idx = [pos[q] for q in ctx.measured]
        buckets: dict = {key: {} for key in ctx.mass}
        for j, col in enumerate(columns):
            buckets[tuple(col[t] for t in idx)][j] = one
        for key, coeffs in buckets.items():
            rows.append(Equality(coeffs, ctx.mass[key], f"context {ctx.context_id!r} cell {list(key)!r}"))
    rows.append(Equality({j: one for j in range(len(columns))}, ONE, "total mass"))
    return Encoding(FeasibilityProblem(len(columns), tuple(rows)), columns)


def _certificate(enc: Encoding, result: FeasibilityResult) -> tuple:
    return tuple(
        (eq.label, y) for eq, y in zip(enc.problem.equalities, result.certificate) if y != 0
    )


# --- tests -----------------------------------------------------------------


def standard_contextuality_test(system: MeasurementSystem) -> ContextualityVerdict:
    minima = minimal_influences(system)
    if not is_consistently_connected(system).ok:
        return ContextualityVerdict("standard", NOT_APPLICABLE, minima=minima)
    enc = standard_encoding(system)
    result = solve(enc.problem)
    size = (enc.problem.num_vars, enc.problem.num_rows)
    if not result.feasible:
        return ContextualityVerdict("standard", CONTEXTUAL, certificate=_certificate(enc, result), minima=minima, size=size)
    joint = {enc.columns[j]: x for j, x in enumerate(result.witness) if x}
    if not projects_to_system(joint, system):
        raise TheoremViolation("standard-test witness does not project onto the contexts")
    return ContextualityVerdict("standard", NONCONTEXTUAL, witness=joint, minima=minima, size=size)


def cbd_contextuality_test(system: MeasurementSystem) -> ContextualityVerdict:
    minima = minimal_influences(system)
    enc = cbd_encoding(system)
    result = solve(enc.problem)
    size = (enc.problem.num_vars, enc.problem.num_rows)
    if not result.feasible:
        return ContextualityVerdict("cbd", CONTEXTUAL, certificate=_certificate(enc, result), minima=minima, size=size)
    coupling = Coupling(system, {enc.columns[j]: x for j, x in enumerate(result.witness) if x})
    if not is_coupling_for(coupling, system).ok:
        raise TheoremViolation("CbD witness is not a coupling for the system")
    for (q, c, c2), m in minima.items():
        if equality_probability(coupling, q, c, c2) != ONE - m:
            raise TheoremViolation(f"CbD witness is not multimaximal at {(q, c, c2)!r}")
    return ContextualityVerdict("cbd", NONCONTEXTUAL, witness=coupling, minima=minima, size=size)


def m_contextuality_test(system: MeasurementSystem) -> ContextualityVerdict:
    """M-contextuality via the CbD test, with the witness re-checked as a model.

    A noncontextual answer returns a canonical model that reproduces every
    context, attains every minimal direct influence, and is aligned.
    """
    cbd = cbd_contextuality_test(system)
    if cbd.verdict != NONCONTEXTUAL:
        return ContextualityVerdict("m", cbd.verdict, certificate=cbd.certificate, minima=cbd.minima, size=cbd.size)
    model = coupling_to_model(cbd.witness, system)
    if not is_model_for(model, system).ok:
        raise TheoremViolation("converted model does not reproduce the system")
    for (q, c, c2), m in cbd.minima.items():
        if direct_influence(model, q, c, c2) != m:
            raise TheoremViolation(f"converted model misses the minimal influence at {(q, c, c2)!r}")
    if not is_aligned(model).ok:
        raise TheoremViolation("model attaining every minimum is not aligned")
    return ContextualityVerdict("m", NONCONTEXTUAL, witness=model, minima=cbd.minima, size=cbd.size)
