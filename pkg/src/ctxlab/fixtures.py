"""Built-in example systems and models.

Four binary (±1) observables on a cycle of four contexts:
``1 = {1, 2}``, ``2 = {2, 3}``, ``3 = {3, 4}``, ``4 = {1, 4}``.  Within
contexts 1-3 the two outcomes are always equal; in context 4 they always
differ.
"""

from __future__ import annotations

from fractions import Fraction

from .model import CanonicalModel
from .system import MeasurementSystem

PM = (1, -1)
CYCLE = ((1, (1, 2)), (2, (2, 3)), (3, (3, 4)), (4, (1, 4)))


def _cycle_system(p_plus: dict, label: str) -> MeasurementSystem:
    """Perfect (anti)correlation cycle with ``Pr[value = 1]`` per context."""
    contexts = []
    for cid, meas in CYCLE:
        p = Fraction(p_plus[cid])
        if cid == 4:
            mass = {(1, -1): p, (-1, 1): 1 - p}
        else:
            mass = {(1, 1): p, (-1, -1): 1 - p}
        contexts.append((cid, meas, mass))
    return MeasurementSystem.build({q: PM for q in (1, 2, 3, 4)}, contexts, label)


def pr_box() -> MeasurementSystem:
    """Uniform marginals; maximally violates the CHSH bound."""
    return _cycle_system({c: Fraction(1, 2) for c in (1, 2, 3, 4)}, "PR box")


def table3() -> MeasurementSystem:
    """Same correlations as the PR box with unbalanced marginals.

    ``Pr[=1]`` is 2/3, 1/3, 2/3, 1/2 in contexts 1-4.
    """
    probs = {1: Fraction(2, 3), 2: Fraction(1, 3), 3: Fraction(2, 3), 4: Fraction(1, 2)}
    return _cycle_system(probs, "inconsistently connected, M-noncontextual")


def table4_model() -> CanonicalModel:
    """Six equiprobable states attaining every minimal influence of the table3 system."""
    rows = {
        (1, 1): (1, 1, 1, 1, -1, -1),
        (2, 1): (1, 1, 1, 1, -1, -1),
        (2, 2): (1, 1, -1, -1, -1, -1),
        (3, 2): (1, 1, -1, -1, -1, -1),
        (3, 3): (1, 1, -1, -1, 1, 1),
        (4, 3): (1, 1, -1, -1, 1, 1),
        (4, 4): (1, -1, -1, -1, 1, 1),
        (1, 4): (-1, 1, 1, 1, -1, -1),
    }
    states = tuple((s, Fraction(1, 6)) for s in range(1, 7))
    fmap = {(q, c, s): row[s - 1] for (q, c), row in rows.items() for s in range(1, 7)}
    return CanonicalModel(states, fmap)


def pr_box_model() -> CanonicalModel:
    """Uniform λ ∈ {-1, 1}; every F is λ except F_4(λ, 4) = -λ."""
    states = ((-1, Fraction(1, 2)), (1, Fraction(1, 2)))
    fmap = {}
    for cid, meas in CYCLE:
        for q in meas:
            for lam, _ in states:
                fmap[q, cid, lam] = -lam if (q, cid) == (4, 4) else lam
    return CanonicalModel(states, fmap)


def pr_box_partition():
    """Observer 1 chooses 1 or 3, observer 2 chooses 2 or 4."""
    from .partitioned import Partition

    return Partition.build({1: (1, 3), 2: (2, 4)})


SYSTEMS = {"pr-box": pr_box, "table3": table3}
MODELS = {"table4": table4_model, "pr-box-model": pr_box_model}
PARTITIONS = {"pr-box-partition": pr_box_partition}
