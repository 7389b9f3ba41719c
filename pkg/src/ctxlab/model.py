"""Canonical causal models and direct influence.

A canonical model is a finite latent state space with exact probabilities and
deterministic outcome maps ``F[q, c, state]``, defined only where q is
measured in c.  Direct influence ``Δ_{c,c'}(F_q)`` is the probability of the
states on which switching between c and c' changes the value of q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Hashable, Mapping, Sequence

from .errors import CapacityError, DomainMismatch, IncompleteModel, InputError
from .system import (
    ONE,
    ZERO,
    Check,
    ContextDistribution,
    MeasurementSystem,
    _aligned_supports,
    marginal,
    to_rational,
)


@dataclass(frozen=True)
class CanonicalModel:
    states: tuple  # ((state id, probability), ...)
    outcome_map: Mapping[tuple, Hashable]  # (q, c, state) -> value

    def __post_init__(self):
        object.__setattr__(self, "states", tuple((s, to_rational(p)) for s, p in self.states))
        object.__setattr__(self, "outcome_map", dict(self.outcome_map))

    @cached_property
    def state_ids(self) -> tuple:
        return tuple(s for s, _ in self.states)

    @cached_property
    def support(self) -> tuple:
        """States with strictly positive probability."""
        return tuple((s, p) for s, p in self.states if p > 0)

    @cached_property
    def domain(self) -> dict:
        """Observable -> contexts the map covers, in order of first appearance."""
        out: dict = {}
        for q, c, _ in self.outcome_map:
            cs = out.setdefault(q, [])
            if c not in cs:
                cs.append(c)
        return out

    def value(self, q, c, state):
        try:
            return self.outcome_map[q, c, state]
        except KeyError:
            raise IncompleteModel(f"incomplete model: no value for q={q!r}, c={c!r}, state={state!r}") from None

    def check(self) -> list[str]:
        """Internal consistency: a distribution over states and a total map."""
        issues = []
        if any(p < 0 for _, p in self.states):
            issues.append("negative state probability")
        if sum((p for _, p in self.states), ZERO) != 1:
            issues.append("state probabilities do not sum to 1")
        if len(set(self.state_ids)) != len(self.state_ids):
            issues.append("duplicate state id")
        known = set(self.state_ids)
        for q, c, s in self.outcome_map:
            if s not in known:
                issues.append(f"map entry for unknown state {s!r}")
        for q, cs in self.domain.items():
            for c in cs:
                for s in self.state_ids:
                    if (q, c, s) not in self.outcome_map:
                        issues.append(f"map not total: missing (q={q!r}, c={c!r}, state={s!r})")
        return issues


@dataclass(frozen=True)
class HahnJordanDecomposition:
    plus: dict
    minus: dict
    common: dict
    alpha: Fraction


def _check_pair(model: CanonicalModel, q, c, c2) -> None:
    cs = model.domain.get(q, [])
    if c not in cs or c2 not in cs:
        raise InputError(f"invalid context pair ({c!r}, {c2!r}) for observable {q!r}")


def induced_distribution(model: CanonicalModel, system: MeasurementSystem, c) -> ContextDistribution:
    ctx = system.context(c)
    mass: dict = {}
    for s, p in model.support:
        key = tuple(model.value(q, c, s) for q in ctx.measured)
        mass[key] = mass.get(key, ZERO) + p
    return ContextDistribution(c, ctx.measured, mass)


def _check_domain(model: CanonicalModel, system: MeasurementSystem) -> None:
    issues = model.check()
    if issues:
        raise DomainMismatch("domain mismatch: " + "; ".join(issues[:5]))
    measured = set(system.pairs)
    for (q, c, s), v in model.outcome_map.items():
        if (q, c) not in measured:
            raise DomainMismatch(f"domain mismatch: model maps q={q!r} in context {c!r}, which does not measure it")
        if v not in system.values(q):
            raise DomainMismatch(f"domain mismatch: value {v!r} outside outcome space of {q!r}")
    for q, c in system.pairs:
        if q not in model.domain or c not in model.domain[q]:
            raise IncompleteModel(f"incomplete model: no outcome map for q={q!r} in context {c!r}")


def is_model_for(model: CanonicalModel, system: MeasurementSystem) -> Check:
    """Does the model reproduce every context distribution exactly?"""
    _check_domain(model, system)
    bad = [
        ctx.context_id
        for ctx in system.contexts
        if induced_distribution(model, system, ctx.context_id).mass != ctx.mass
    ]
    return Check(not bad, bad)


def direct_influence(model: CanonicalModel, q, c, c2) -> Fraction:
    _check_pair(model, q, c, c2)
    return sum(
        (p for s, p in model.states if model.value(q, c, s) != model.value(q, c2, s)),
        ZERO,
    )


def _context_pairs(model: CanonicalModel, q) -> list[tuple]:
    cs = model.domain[q]
    return [(cs[i], cs[j]) for i in range(len(cs)) for j in range(i + 1, len(cs))]


def is_context_free(model: CanonicalModel) -> bool:
    for q in model.domain:
        for c, c2 in _context_pairs(model, q):
            for s, _ in model.support:
                if model.value(q, c, s) != model.value(q, c2, s):
                    return False
    return True


def is_aligned(model: CanonicalModel) -> Check:
    """Look for hidden influences.

    ``(q, v, c, c')`` is flagged when switching c -> c' moves q onto v for
    some positive-probability state and off v for another.
    """
    flags = []
    for q in model.domain:
        for c, c2 in _context_pairs(model, q):
            into: set = set()
            away: set = set()
            for s, _ in model.support:
                a, b = model.value(q, c, s), model.value(q, c2, s)
                if a != b:
                    away.add(a)
                    into.add(b)
            seen = []
            for s, _ in model.support:
                for v in (model.value(q, c, s), model.value(q, c2, s)):
                    if v not in seen:
                        seen.append(v)
            flags.extend((q, v, c, c2) for v in seen if v in into and v in away)
    return Check(not flags, flags)


def hahn_jordan(d1: Mapping, d2: Mapping, space: Sequence | None = None) -> HahnJordanDecomposition:
    """Split ``d1 - d2`` into disjoint positive and negative parts.

    ``common`` is the overlap ``min(d1, d2)``; its mass ``alpha`` is the
    largest achievable ``Pr[X = Y]`` over couplings of the two.
    """
    vals = _aligned_supports(d1, d2, space)
    plus, minus, common = {}, {}, {}
    for v in vals:
        a, b = d1.get(v, ZERO), d2.get(v, ZERO)
        if a > b:
            plus[v] = a - b
        elif b > a:
            minus[v] = b - a
        if min(a, b) > 0:
            common[v] = min(a, b)
    return HahnJordanDecomposition(plus, minus, common, sum(common.values(), ZERO))


def _pair_marginals(system: MeasurementSystem, q, c, c2):
    cs = system.contexts_of(q)
    if c not in cs or c2 not in cs or c == c2:
        raise InputError(f"invalid context pair ({c!r}, {c2!r}) for observable {q!r}")
    return marginal(system, q, c), marginal(system, q, c2)


def minimal_direct_influence(system: MeasurementSystem, q, c, c2) -> Fraction:
    """Smallest Δ_{c,c'}(F_q) over all models of the system: ``1 - alpha``."""
    d1, d2 = _pair_marginals(system, q, c, c2)
    return ONE - hahn_jordan(d1, d2).alpha


def minimal_influences(system: MeasurementSystem) -> dict:
    return {(q, c, c2): minimal_direct_influence(system, q, c, c2) for q, c, c2 in system.triples()}


def pair_model(d1: Mapping, d2: Mapping, q, c, c2, space: Sequence | None = None) -> CanonicalModel:
    """Two-context model of ``{q in c, q in c'}`` with the least direct influence.

    States are pairs ``(v1, v2)`` read as (value in c, value in c').  The
    overlap sits on the diagonal; the excess of d1 over d2 is paired with the
    excess of d2 over d1 as an independent product scaled by ``1/(1-alpha)``.
    """
    hj = hahn_jordan(d1, d2, space)
    mass: dict = {(v, v): p for v, p in hj.common.items()}
    gap = ONE - hj.alpha
    if gap:
        for v1, p1 in hj.plus.items():
            for v2, p2 in hj.minus.items():
                mass[(v1, v2)] = p1 * p2 / gap
    states = tuple(mass.items())
    fmap = {}
    for (v1, v2), _ in states:
        fmap[q, c, (v1, v2)] = v1
        fmap[q, c2, (v1, v2)] = v2
    return CanonicalModel(states, fmap)


def build_minimal_pair_model(system: MeasurementSystem, q, c, c2) -> CanonicalModel:
    d1, d2 = _pair_marginals(system, q, c, c2)
    return pair_model(d1, d2, q, c, c2)


def context_free_model(system: MeasurementSystem, joint: Mapping[tuple, Fraction]) -> CanonicalModel:
    """Hidden-variable model from a global distribution over all observables.

    ``joint`` is keyed by full assignments in ``system.observables`` order;
    each state is one assignment and every F_q reads its own coordinate.
    """
    states = tuple((key, p) for key, p in joint.items() if p != 0)
    pos = {q: i for i, q in enumerate(system.observables)}
    fmap = {(q, c, key): key[pos[q]] for key, _ in states for q, c in system.pairs}
    return CanonicalModel(states, fmap)


def universal_model(system: MeasurementSystem, max_states: int = 4096) -> CanonicalModel:
    """A model for any system: one independent copy of every context.

    The latent state is a tuple holding one assignment per context, drawn
    independently from each context distribution, and F_q(state, c) reads the
    q coordinate of copy c.  The state space is the product of the context
    supports, so this is only practical for very small systems.
    """
    supports = [list(ctx.mass.items()) for ctx in system.contexts]
    size = 1
    for sup in supports:
        size *= len(sup)
    if size > max_states:
        raise CapacityError(f"universal model needs {size} states (limit {max_states})")
    states = []
    fmap = {}
    for combo in product(*supports):
        sid = tuple(key for key, _ in combo)
        p = ONE
        for _, pc in combo:
            p *= pc
        states.append((sid, p))
        for ctx, key in zip(system.contexts, sid):
            for q, v in zip(ctx.measured, key):
                fmap[q, ctx.context_id, sid] = v
    return CanonicalModel(tuple(states), fmap)


def canonicalize(model: CanonicalModel) -> CanonicalModel:
    """Drop zero-probability states and merge states with identical outcomes.

    A merged state keeps the id of its first member.
    """
    keys = sorted({(q, c) for q, c, _ in model.outcome_map}, key=repr)
    groups: dict = {}
    for s, p in model.support:
        sig = tuple(model.value(q, c, s) for q, c in keys)
        if sig in groups:
            sid, acc = groups[sig]
            groups[sig] = (sid, acc + p)
        else:
            groups[sig] = (s, p)
    states = tuple(groups.values())
    fmap = {(q, c, sid): v for sig, (sid, _) in groups.items() for (q, c), v in zip(keys, sig)}
    return CanonicalModel(states, fmap)


def model_to_coupling(model: CanonicalModel, system: MeasurementSystem):
    """Coupling whose sample space is the model's states: T_q^c = F_q(., c)."""
    from .coupling import Coupling

    ok, bad = is_model_for(model, system)
    if not ok:
        raise DomainMismatch(f"model does not reproduce contexts {bad}")
    mass: dict = {}
    for s, p in model.support:
        key = tuple(model.value(q, c, s) for q, c in system.pairs)
        mass[key] = mass.get(key, ZERO) + p
    return Coupling(system, mass)


def coupling_to_model(coupling, system: MeasurementSystem) -> CanonicalModel:
    """Model whose states are the coupling's support points, numbered from 1."""
    from .coupling import is_coupling_for

    ok, bad = is_coupling_for(coupling, system)
    if not ok:
        raise DomainMismatch(f"coupling does not reproduce contexts {bad}")
    states = []
    fmap = {}
    for i, (key, p) in enumerate(coupling.mass.items(), start=1):
        states.append((i, p))
        for (q, c), v in zip(system.pairs, key):
            fmap[q, c, i] = v
    return CanonicalModel(tuple(states), fmap)
