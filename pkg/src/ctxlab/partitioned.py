"""Observer-partitioned systems, partitioned models and signaling.

A partition assigns every observable to exactly one observer.  A system is
partitionable under it when every context picks exactly one observable per
observer and every such combination occurs exactly once.  In the
partitioned form of a model, observer k's outcome in context c is the value
of whichever observable k measures there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Hashable, Mapping

from .errors import DomainMismatch, InputError
from .model import CanonicalModel
from .system import ZERO, Check, MeasurementSystem, to_rational

NONE = "none"
ALIGNED = "aligned"
HIDDEN = "hidden"


@dataclass(frozen=True)
class Partition:
    observers: tuple
    blocks: Mapping[Hashable, tuple]
    # context id -> {observer: observable}; derived from the contexts when None
    context_map: Mapping | None = None

    @classmethod
    def build(cls, blocks: Mapping, context_map: Mapping | None = None) -> "Partition":
        return cls(tuple(blocks), {k: tuple(v) for k, v in blocks.items()}, context_map)

    @cached_property
    def owner(self) -> dict:
        return {q: k for k in self.observers for q in self.blocks.get(k, ())}


def _structure_issues(measured: Mapping, observables, partition: Partition) -> tuple[list, dict]:
    """Check a context structure against a partition.

    Returns the violations and the resolved map context -> {observer: q}.
    """
    issues = []
    seen: dict = {}
    for k in partition.observers:
        block = partition.blocks.get(k, ())
        if not block:
            issues.append(f"observer {k!r} has an empty block")
        for q in block:
            if q in seen:
                issues.append(f"observable {q!r} belongs to observers {seen[q]!r} and {k!r}")
            seen[q] = k
    extra = set(partition.blocks) - set(partition.observers)
    if extra:
        issues.append(f"blocks for undeclared observers {sorted(map(repr, extra))}")
    for q in observables:
        if q not in seen:
            issues.append(f"observable {q!r} is not assigned to any observer")
    for q in seen:
        if q not in set(observables):
            issues.append(f"partition names unknown observable {q!r}")

    resolved: dict = {}
    for c, qs in measured.items():
        choice: dict = {}
        for q in qs:
            k = seen.get(q)
            if k is None:
                continue
            if k in choice:
                issues.append(f"context {c!r} measures {choice[k]!r} and {q!r}, both of observer {k!r}")
            choice.setdefault(k, q)
        missing = [k for k in partition.observers if k not in choice]
        if missing:
            issues.append(f"context {c!r} measures nothing for observers {missing!r}")
        if partition.context_map is not None:
            declared = _lookup(partition.context_map, c)
            if declared is None:
                issues.append(f"context {c!r} missing from context_map")
            else:
                declared = {k: _lookup(declared, k) for k in partition.observers}
                if declared != choice:
                    issues.append(f"context_map entry for {c!r} disagrees with its measured observables")
        resolved[c] = choice

    combos: dict = {}
    for c, choice in resolved.items():
        key = tuple(choice.get(k) for k in partition.observers)
        if key in combos:
            issues.append(f"contexts {combos[key]!r} and {c!r} make the same choice {key!r}")
        combos[key] = c
    for key in product(*(partition.blocks.get(k, ()) for k in partition.observers)):
        if key not in combos:
            issues.append(f"no context makes the choice {key!r}")
    return issues, resolved


def _lookup(mapping: Mapping, key):
    # JSON round trips turn ids into strings
    if key in mapping:
        return mapping[key]
    return mapping.get(str(key))


def verify_partition(system: MeasurementSystem, partition: Partition) -> Check:
    measured = {ctx.context_id: ctx.measured for ctx in system.contexts}
    issues, _ = _structure_issues(measured, system.observables, partition)
    return Check(not issues, issues)


def context_choices(system: MeasurementSystem, partition: Partition) -> dict:
    """Context id -> {observer: observable}; raises if the partition fails."""
    measured = {ctx.context_id: ctx.measured for ctx in system.contexts}
    issues, resolved = _structure_issues(measured, system.observables, partition)
    if issues:
        raise DomainMismatch("partition verification failed: " + "; ".join(issues))
    return resolved


@dataclass(frozen=True)
class PartitionedModel:
    states: tuple
    partition: Partition
    choices: Mapping  # context id -> {observer: observable}
    outcome_map: Mapping[tuple, Hashable]  # (observer, context, state) -> value

    def __post_init__(self):
        object.__setattr__(self, "states", tuple((s, to_rational(p)) for s, p in self.states))
        object.__setattr__(self, "outcome_map", dict(self.outcome_map))

    @cached_property
    def support(self) -> tuple:
        return tuple((s, p) for s, p in self.states if p > 0)

    @cached_property
    def contexts(self) -> tuple:
        return tuple(self.choices)

    def value(self, k, c, s):
        try:
            return self.outcome_map[k, c, s]
        except KeyError:
            raise InputError(f"no outcome for observer {k!r}, context {c!r}, state {s!r}") from None

    def setting(self, k, c):
        try:
            return self.choices[c][k]
        except KeyError:
            raise InputError(f"unknown context {c!r} or observer {k!r}") from None

    def pairs(self, k) -> list[tuple]:
        """Context pairs (c, c') with c before c' where k's choice agrees."""
        cs = self.contexts
        return [
            (cs[i], cs[j])
            for i in range(len(cs))
            for j in range(i + 1, len(cs))
            if self.choices[cs[i]][k] == self.choices[cs[j]][k]
        ]


def to_partitioned(model: CanonicalModel, partition: Partition) -> PartitionedModel:
    measured: dict = {}
    for q, c, _ in model.outcome_map:
        qs = measured.setdefault(c, [])
        if q not in qs:
            qs.append(q)
    issues, choices = _structure_issues(measured, tuple(model.domain), partition)
    if issues:
        raise DomainMismatch("partition verification failed: " + "; ".join(issues))
    fmap = {
        (k, c, s): model.value(q, c, s)
        for c, choice in choices.items()
        for k, q in choice.items()
        for s in model.state_ids
    }
    return PartitionedModel(model.states, partition, choices, fmap)


def from_partitioned(pmodel: PartitionedModel) -> CanonicalModel:
    fmap = {
        (pmodel.setting(k, c), c, s): v for (k, c, s), v in pmodel.outcome_map.items()
    }
    return CanonicalModel(pmodel.states, fmap)


def _check_pair(pmodel: PartitionedModel, k, c, c2) -> None:
    if k not in pmodel.partition.observers:
        raise InputError(f"unknown observer {k!r}")
    if c == c2 or pmodel.setting(k, c) != pmodel.setting(k, c2):
        raise InputError(f"invalid pair: observer {k!r} measures different observables in {c!r} and {c2!r}")


def signaling(pmodel: PartitionedModel, k, c, c2) -> Fraction:
    """Probability that the other observers' switch from c to c' changes k's outcome."""
    _check_pair(pmodel, k, c, c2)
    return sum(
        (p for s, p in pmodel.states if pmodel.value(k, c, s) != pmodel.value(k, c2, s)),
        ZERO,
    )


def has_no_signaling(pmodel: PartitionedModel) -> bool:
    return all(
        signaling(pmodel, k, c, c2) == 0
        for k in pmodel.partition.observers
        for c, c2 in pmodel.pairs(k)
    )


def classify_signals(pmodel: PartitionedModel) -> dict:
    """Label each ``(k, v, c, c')`` as none, aligned or hidden.

    Hidden means the switch moves k's outcome onto v for some states and off
    v for others; aligned means only one of the two happens.
    """
    out: dict = {}
    for k in pmodel.partition.observers:
        for c, c2 in pmodel.pairs(k):
            into: set = set()
            away: set = set()
            values: list = []
            for s, _ in pmodel.support:
                a, b = pmodel.value(k, c, s), pmodel.value(k, c2, s)
                for v in (a, b):
                    if v not in values:
                        values.append(v)
                if a != b:
                    away.add(a)
                    into.add(b)
            for v in values:
                if v in into and v in away:
                    out[k, v, c, c2] = HIDDEN
                elif v in into or v in away:
                    out[k, v, c, c2] = ALIGNED
                else:
                    out[k, v, c, c2] = NONE
    return out


def has_hidden_signals(pmodel: PartitionedModel) -> bool:
    return HIDDEN in classify_signals(pmodel).values()
