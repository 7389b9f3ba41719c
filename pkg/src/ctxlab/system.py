"""Measurement systems with exact per-context distributions.

A system declares observables with ordered outcome spaces and a list of
contexts; each context measures some observables jointly and carries an
exact rational distribution over their joint assignments.  Whether ``q`` is
measured in ``c`` is read off ``c.measured``; it is never stored twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Hashable, Iterable, Mapping, NamedTuple, Sequence

from .errors import InputError

Symbol = Hashable
Assignment = tuple
Distribution = dict  # value -> Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def to_rational(x: Any) -> Fraction:
    """Parse an exact probability.

    Accepts ``Fraction``, ``int`` and strings such as ``"2/3"`` or ``"0.5"``.
    Floats are rejected: a binary float rarely means the rational the user had
    in mind.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InputError(f"not a probability: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse rational {x!r}") from exc
    raise InputError(f"probabilities must be exact (str, int or Fraction), got {type(x).__name__}: {x!r}")


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


class Check(NamedTuple):
    """Outcome of a structural check: a verdict plus the offending items."""

    ok: bool
    issues: list


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class OutcomeSpace:
    observable_id: Symbol
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class ContextDistribution:
    """Joint distribution of the observables measured in one context.

    ``mass`` is sparse: zero-probability assignments are dropped on
    construction.
    """

    context_id: Symbol
    measured: tuple
    mass: Mapping[Assignment, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "measured", tuple(self.measured))
        mass = {}
        for key, p in dict(self.mass).items():
            key = tuple(key) if isinstance(key, (list, tuple)) else (key,)
            p = to_rational(p)
            if p != 0:
                mass[key] = mass.get(key, ZERO) + p
        object.__setattr__(self, "mass", mass)

    def __contains__(self, q: Symbol) -> bool:
        return q in self.measured

    def total(self) -> Fraction:
        return sum(self.mass.values(), ZERO)


@dataclass(frozen=True)
class MeasurementSystem:
    outcome_spaces: tuple
    contexts: tuple
    metadata: str = ""

    def __post_init__(self):
        object.__setattr__(self, "outcome_spaces", tuple(self.outcome_spaces))
        object.__setattr__(self, "contexts", tuple(self.contexts))

    @classmethod
    def build(
        cls,
        observables: Mapping[Symbol, Sequence],
        contexts: Iterable[tuple[Symbol, Sequence[Symbol], Mapping]],
        metadata: str = "",
    ) -> "MeasurementSystem":
        """Shorthand constructor: ``observables`` maps id -> values, each
        context is ``(id, measured, {assignment: p})``."""
        spaces = [OutcomeSpace(q, tuple(vals)) for q, vals in observables.items()]
        ctxs = [ContextDistribution(cid, tuple(meas), dict(mass)) for cid, meas, mass in contexts]
        return cls(tuple(spaces), tuple(ctxs), metadata)

    @cached_property
    def observables(self) -> tuple:
        return tuple(s.observable_id for s in self.outcome_spaces)

    @cached_property
    def _spaces(self) -> dict:
        return {s.observable_id: s.values for s in self.outcome_spaces}

    @cached_property
    def _contexts(self) -> dict:
        return {c.context_id: c for c in self.contexts}

    @cached_property
    def context_ids(self) -> tuple:
        return tuple(c.context_id for c in self.contexts)

    @cached_property
    def pairs(self) -> tuple:
        """Every ``(q, c)`` with q measured in c, context-major order.

        This is the coordinate layout of the coupling space.
        """
        return tuple((q, c.context_id) for c in self.contexts for q in c.measured)

    def values(self, q: Symbol) -> tuple:
        try:
            return self._spaces[q]
        except KeyError:
            raise InputError(f"unknown observable {q!r}") from None

    def context(self, cid: Symbol) -> ContextDistribution:
        try:
            return self._contexts[cid]
        except KeyError:
            raise InputError(f"unknown context {cid!r}") from None

    def contexts_of(self, q: Symbol) -> tuple:
        self.values(q)
        return tuple(c.context_id for c in self.contexts if q in c.measured)

    def context_pairs(self, q: Symbol) -> list[tuple]:
        """Unordered context pairs ``(c, c')`` measuring q, in context order."""
        cs = self.contexts_of(q)
        return [(cs[i], cs[j]) for i in range(len(cs)) for j in range(i + 1, len(cs))]

    def triples(self) -> list[tuple]:
        """All ``(q, c, c')`` with c before c' and both measuring q."""
        return [(q, c, c2) for q in self.observables for c, c2 in self.context_pairs(q)]


def validate(system: MeasurementSystem) -> list[Violation]:
    out: list[Violation] = []
    seen_q: set = set()
    for i, space in enumerate(system.outcome_spaces):
        path = f"observables[{i}]"
        if space.observable_id in seen_q:
            out.append(Violation(path, f"duplicate id {space.observable_id!r}"))
        seen_q.add(space.observable_id)
        if not space.values:
            out.append(Violation(path, "empty outcome space"))
        if len(set(space.values)) != len(space.values):
            out.append(Violation(path, "outcome values not distinct"))

    spaces = {s.observable_id: set(s.values) for s in system.outcome_spaces}
    seen_c: set = set()
    covered: set = set()
    for i, ctx in enumerate(system.contexts):
        path = f"contexts[{i}]"
        if ctx.context_id in seen_c:
            out.append(Violation(path, f"duplicate id {ctx.context_id!r}"))
        seen_c.add(ctx.context_id)
        if len(set(ctx.measured)) != len(ctx.measured):
            out.append(Violation(path, "observable measured twice"))
        for q in ctx.measured:
            if q not in spaces:
                out.append(Violation(path, f"unknown observable {q!r}"))
        covered.update(ctx.measured)
        for key, p in ctx.mass.items():
            kpath = f"{path}.dist[{list(key)}]"
            if p < 0:
                out.append(Violation(kpath, f"negative mass {p}"))
            if len(key) != len(ctx.measured):
                out.append(Violation(kpath, "assignment length does not match measured observables"))
                continue
            for q, v in zip(ctx.measured, key):
                if q in spaces and v not in spaces[q]:
                    out.append(Violation(kpath, f"value {v!r} not in outcome space of {q!r}"))
        total = ctx.total()
        if total != 1:
            out.append(Violation(f"{path}.dist", f"mass sum ≠ 1 ({total})"))

    for q in system.observables:
        if q not in covered:
            out.append(Violation("observables", f"observable {q!r} is not measured in any context"))
    return out


def marginal(system: MeasurementSystem, q: Symbol, c: Symbol) -> Distribution:
    """Distribution of q within context c, over the full outcome space of q."""
    ctx = system.context(c)
    if q not in ctx.measured:
        raise InputError(f"observable {q!r} not measured in context {c!r}")
    pos = ctx.measured.index(q)
    out = {v: ZERO for v in system.values(q)}
    for key, p in ctx.mass.items():
        out[key[pos]] += p
    return out


def _aligned_supports(d1: Mapping, d2: Mapping, space: Sequence | None) -> list:
    if space is None:
        if set(d1) != set(d2):
            raise InputError("space mismatch: distributions have different outcome sets")
        return list(d1)
    space = list(space)
    allowed = set(space)
    if not set(d1) <= allowed or not set(d2) <= allowed:
        raise InputError("space mismatch: distribution value outside the outcome space")
    return space


def tv_distance(d1: Mapping, d2: Mapping, space: Sequence | None = None) -> Fraction:
    """Total variation distance, ``1 - sum_v min(d1(v), d2(v))``.

    Without ``space`` both maps must list the same values (zeros included,
    as :func:`marginal` returns them).
    """
    vals = _aligned_supports(d1, d2, space)
    overlap = sum((min(d1.get(v, ZERO), d2.get(v, ZERO)) for v in vals), ZERO)
    return ONE - overlap


def is_consistently_connected(system: MeasurementSystem) -> Check:
    bad = []
    for q, c, c2 in system.triples():
        if marginal(system, q, c) != marginal(system, q, c2):
            bad.append((q, c, c2))
    return Check(not bad, bad)


def connection(system: MeasurementSystem, q: Symbol) -> list[tuple]:
    return [(c, marginal(system, q, c)) for c in system.contexts_of(q)]
