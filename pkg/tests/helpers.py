"""Random generators for property tests.

Every probability is ``k / D`` with ``D <= 24``, built by dropping D unit
masses onto randomly chosen outcomes, so supports come out sparse.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from ctxlab.model import CanonicalModel, induced_distribution
from ctxlab.system import MeasurementSystem

PM = (1, -1)
MAX_DEN = 24


def random_composition(rng: random.Random, keys: list, max_support: int | None = None, max_den: int = MAX_DEN) -> dict:
    """Random distribution over ``keys`` with denominator at most ``max_den``."""
    pool = list(keys)
    if max_support is not None and len(pool) > max_support:
        pool = rng.sample(pool, rng.randint(1, max_support))
    d = rng.randint(1, max_den)
    counts: dict = {}
    for _ in range(d):
        k = rng.choice(pool)
        counts[k] = counts.get(k, 0) + 1
    return {k: Fraction(n, d) for k, n in counts.items()}


def random_shape(rng: random.Random, max_obs: int = 4, max_ctx: int = 4, max_size: int = 4) -> tuple:
    """``(observables, [(cid, measured)])`` with every observable measured somewhere."""
    n = rng.randint(1, max_obs)
    obs = list(range(1, n + 1))
    while True:
        k = rng.randint(1, max_ctx)
        contexts = []
        for cid in range(1, k + 1):
            size = rng.randint(1, min(max_size, n))
            contexts.append((cid, tuple(sorted(rng.sample(obs, size)))))
        if {q for _, m in contexts for q in m} == set(obs):
            return obs, contexts


def cyclic_shape(n: int) -> tuple:
    obs = list(range(1, n + 1))
    return obs, [(i, (i, i % n + 1) if i < n else (1, n)) for i in obs]


def random_system(rng: random.Random, shape: tuple | None = None, max_support: int | None = 4) -> MeasurementSystem:
    obs, contexts = shape or random_shape(rng)
    built = [
        (cid, meas, random_composition(rng, list(product(PM, repeat=len(meas))), max_support))
        for cid, meas in contexts
    ]
    return MeasurementSystem.build({q: PM for q in obs}, built, "random")


def near_cycle_system(rng: random.Random, n: int | None = None) -> MeasurementSystem:
    """Binary n-cycle whose contexts lean to perfect (anti)correlation.

    These sit close to the contextual boundary, so the verdicts are mixed.
    """
    n = n or rng.randint(2, 4)
    obs, contexts = cyclic_shape(n)
    built = []
    for cid, meas in contexts:
        anti = rng.random() < 0.35
        same, differ = [(1, 1), (-1, -1)], [(1, -1), (-1, 1)]
        keys = differ if anti else same
        if rng.random() < 0.3:
            keys = same + differ
        built.append((cid, meas, random_composition(rng, keys)))
    return MeasurementSystem.build({q: PM for q in obs}, built, "near-cycle")


def random_model_for_shape(rng: random.Random, shape: tuple, max_states: int = 6) -> CanonicalModel:
    obs, contexts = shape
    states = list(range(1, rng.randint(1, max_states) + 1))
    probs = random_composition(rng, states)
    fmap = {(q, cid, s): rng.choice(PM) for cid, meas in contexts for q in meas for s in states}
    return CanonicalModel(tuple((s, probs.get(s, Fraction(0))) for s in states), fmap)


def induced_system(model: CanonicalModel, shape: tuple) -> MeasurementSystem:
    obs, contexts = shape
    skeleton = MeasurementSystem.build(
        {q: PM for q in obs}, [(cid, meas, {tuple(1 for _ in meas): 1}) for cid, meas in contexts]
    )
    built = [(cid, meas, induced_distribution(model, skeleton, cid).mass) for cid, meas in contexts]
    return MeasurementSystem.build({q: PM for q in obs}, built, "induced")


def random_model_and_system(rng: random.Random, shape: tuple | None = None) -> tuple:
    shape = shape or random_shape(rng)
    model = random_model_for_shape(rng, shape)
    return model, induced_system(model, shape)


def projected_system(rng: random.Random, shape: tuple | None = None) -> tuple:
    """Consistently connected system from a random global distribution."""
    obs, contexts = shape or random_shape(rng)
    joint = random_composition(rng, list(product(PM, repeat=len(obs))))
    pos = {q: i for i, q in enumerate(obs)}
    built = []
    for cid, meas in contexts:
        mass: dict = {}
        for key, p in joint.items():
            sub = tuple(key[pos[q]] for q in meas)
            mass[sub] = mass.get(sub, Fraction(0)) + p
        built.append((cid, meas, mass))
    return MeasurementSystem.build({q: PM for q in obs}, built, "projected"), joint


def chsh_system(e: tuple) -> MeasurementSystem:
    """Uniform-marginal CHSH cycle with correlations ``E_c = E[M_a M_b]``."""
    contexts = []
    for (cid, meas), ec in zip(cyclic_shape(4)[1], e):
        ec = Fraction(ec)
        mass = {(a, b): (1 + a * b * ec) / 4 for a in PM for b in PM}
        contexts.append((cid, meas, mass))
    return MeasurementSystem.build({q: PM for q in (1, 2, 3, 4)}, contexts, f"chsh {e}")


def chsh_value(e: tuple) -> Fraction:
    """Largest CHSH combination over the odd sign patterns."""
    best = None
    for signs in product((1, -1), repeat=4):
        if signs.count(-1) % 2 == 1:
            s = sum(Fraction(x) * sg for x, sg in zip(e, signs))
            best = s if best is None else max(best, s)
    return best


# criterion number -> one-line pass/fail summary, printed at the end of the run
ACCEPTANCE_LINES: dict = {}
