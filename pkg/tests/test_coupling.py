from __future__ import annotations

import random
from fractions import Fraction as F
from itertools import product

import pytest

from ctxlab.coupling import (
    CONTEXTUAL,
    NONCONTEXTUAL,
    NOT_APPLICABLE,
    Coupling,
    cbd_contextuality_test,
    cbd_encoding,
    equality_probability,
    is_coupling_for,
    m_contextuality_test,
    max_vars,
    multimax_target,
    projects_to_system,
    standard_contextuality_test,
    standard_encoding,
)
from ctxlab.errors import CapacityError, DomainMismatch, InputError
from ctxlab.feasibility import check_certificate
from ctxlab.fixtures import pr_box, pr_box_model, table3, table4_model
from ctxlab.model import (
    canonicalize,
    direct_influence,
    is_aligned,
    is_context_free,
    is_model_for,
    minimal_influences,
    model_to_coupling,
)
from ctxlab.system import MeasurementSystem

from helpers import near_cycle_system, projected_system, random_model_and_system, random_system

PM = (1, -1)


def product_coupling(system):
    """Independent copies of every context: always a coupling."""
    mass = {}
    for combo in product(*(ctx.mass.items() for ctx in system.contexts)):
        key = tuple(v for k, _ in combo for v in k)
        p = F(1)
        for _, pc in combo:
            p *= pc
        mass[key] = p
    return Coupling(system, mass)


def certificate_vector(system, verdict, encoding=cbd_encoding):
    problem = encoding(system).problem
    labels = dict(verdict.certificate)
    return problem, [labels.get(eq.label, F(0)) for eq in problem.equalities]


# --- couplings ------------------------------------------------------------------------


def test_is_coupling_for_examples():
    assert is_coupling_for(model_to_coupling(table4_model(), table3()), table3()).ok
    for s in (pr_box(), table3()):
        assert is_coupling_for(product_coupling(s), s) == (True, [])


def test_perturbed_coupling_is_rejected():
    c = product_coupling(table3())
    key = next(iter(c.mass))
    other = tuple(-v if i == 0 else v for i, v in enumerate(key))
    mass = dict(c.mass)
    moved = min(mass[key], F(1, 100))
    mass[key] -= moved
    mass[other] = mass.get(other, 0) + moved
    ok, bad = is_coupling_for(Coupling(table3(), mass), table3())
    # coordinate 0 is (q=1, c=1): only context 1 sees the change
    assert not ok and bad == [1]


def test_coupling_layout_errors():
    with pytest.raises(DomainMismatch):
        is_coupling_for(Coupling(table3(), {(0,) * 8: 1}), table3())
    with pytest.raises(DomainMismatch):
        is_coupling_for(product_coupling(pr_box()), MeasurementSystem.build({1: PM}, [(1, (1,), {(1,): 1})]))


def test_equality_probability_examples():
    assert equality_probability(model_to_coupling(table4_model(), table3()), 1, 1, 4) == F(5, 6)
    assert equality_probability(model_to_coupling(pr_box_model(), pr_box()), 4, 3, 4) == 0
    with pytest.raises(InputError, match="invalid context pair"):
        equality_probability(product_coupling(pr_box()), 1, 1, 2)


def test_multimax_target_examples():
    assert multimax_target(table3(), 2, 1, 2) == F(2, 3)
    assert all(multimax_target(pr_box(), q, c, c2) == 1 for q, c, c2 in pr_box().triples())
    s = MeasurementSystem.build({"q": ("a", "b")}, [(1, ("q",), {("a",): 1}), (2, ("q",), {("b",): 1})])
    assert multimax_target(s, "q", 1, 2) == 0


def test_degenerate_observable_targets_are_one():
    s = MeasurementSystem.build({"q": ("only",)}, [(1, ("q",), {("only",): 1}), (2, ("q",), {("only",): 1})])
    assert multimax_target(s, "q", 1, 2) == 1
    assert cbd_contextuality_test(s).verdict == NONCONTEXTUAL


# --- standard test ------------------------------------------------------------------------


def test_standard_test_examples():
    v = standard_contextuality_test(pr_box())
    assert v.verdict == CONTEXTUAL and v.witness is None
    problem, y = certificate_vector(pr_box(), v, standard_encoding)
    assert check_certificate(problem, y)
    assert standard_contextuality_test(table3()).verdict == NOT_APPLICABLE


def test_standard_test_product_system_is_noncontextual():
    m = {1: {(1,): F(1, 3), (-1,): F(2, 3)}, 2: {(1,): F(1, 4), (-1,): F(3, 4)}, 3: {(1,): 1}}

    def ctx(cid, qs):
        mass = {}
        for combo in product(*(m[q].items() for q in qs)):
            p = F(1)
            for _, pq in combo:
                p *= pq
            mass[tuple(k[0] for k, _ in combo)] = p
        return (cid, qs, mass)

    s = MeasurementSystem.build({q: PM for q in m}, [ctx("a", (1, 2)), ctx("b", (2, 3)), ctx("c", (1, 3))])
    v = standard_contextuality_test(s)
    assert v.verdict == NONCONTEXTUAL
    assert projects_to_system(v.witness, s)


def test_projects_to_system_rejects_wrong_distributions():
    s = pr_box()
    assert not projects_to_system({(1, 1, 1, 1): 1}, s)
    assert not projects_to_system({(1, 1, 1, 1): F(1, 2)}, s)


# --- CbD and M tests --------------------------------------------------------------------


def test_cbd_examples():
    v = cbd_contextuality_test(pr_box())
    assert v.verdict == CONTEXTUAL
    problem, y = certificate_vector(pr_box(), v)
    assert check_certificate(problem, y)
    assert all(label for label, _ in v.certificate)

    v = cbd_contextuality_test(table3())
    assert v.verdict == NONCONTEXTUAL
    assert v.minima == minimal_influences(table3())
    assert is_coupling_for(v.witness, table3()).ok

    single = MeasurementSystem.build({1: PM, 2: PM}, [("c", (1, 2), {(1, -1): F(1, 3), (-1, 1): F(2, 3)})])
    v = cbd_contextuality_test(single)
    assert v.verdict == NONCONTEXTUAL and v.witness.mass == single.context("c").mass


def test_m_examples():
    v = m_contextuality_test(table3())
    assert v.verdict == NONCONTEXTUAL
    assert is_model_for(v.witness, table3()).ok and is_aligned(v.witness).ok
    assert [direct_influence(v.witness, *t) for t in table3().triples()] == [F(1, 6), F(1, 3), F(1, 3), F(1, 6)]
    assert m_contextuality_test(pr_box()).verdict == CONTEXTUAL


def test_m_witness_on_noncontextual_connected_system_is_context_free():
    rng = random.Random(1)
    for _ in range(30):
        s, _ = projected_system(rng)
        v = m_contextuality_test(s)
        assert v.verdict == NONCONTEXTUAL
        assert is_context_free(canonicalize(v.witness))


def test_encoding_sizes_are_reported():
    v = cbd_contextuality_test(table3())
    assert v.size == (16, 13)


def test_capacity_guard(monkeypatch):
    monkeypatch.setenv("CTXLAB_MAX_VARS", "10")
    assert max_vars() == 10
    with pytest.raises(CapacityError, match="CTXLAB_MAX_VARS"):
        cbd_contextuality_test(table3())
    monkeypatch.setenv("CTXLAB_MAX_VARS", "lots")
    with pytest.raises(InputError):
        max_vars()
    monkeypatch.delenv("CTXLAB_MAX_VARS")
    assert max_vars() == 1 << 20


# --- properties ------------------------------------------------------------------------------


def test_aligned_minimal_models_give_multimaximal_couplings():
    # the converse direction: an aligned model attains every minimum, so its
    # coupling meets every multimax target and the CbD test must agree
    rng = random.Random(8)
    seen = 0
    for _ in range(400):
        model, s = random_model_and_system(rng)
        if not is_aligned(model).ok:
            continue
        seen += 1
        c = model_to_coupling(model, s)
        for q, c1, c2 in s.triples():
            assert equality_probability(c, q, c1, c2) == multimax_target(s, q, c1, c2)
        assert cbd_contextuality_test(s).verdict == NONCONTEXTUAL
    assert seen > 50


def test_deleting_a_context_never_creates_contextuality():
    rng = random.Random(4)
    checked = 0
    for i in range(300):
        s = near_cycle_system(rng) if i % 2 else random_system(rng)
        if len(s.contexts) < 2 or cbd_contextuality_test(s).verdict != NONCONTEXTUAL:
            continue
        for drop in s.context_ids:
            kept = [c for c in s.contexts if c.context_id != drop]
            observed = {q for c in kept for q in c.measured}
            spaces = [sp for sp in s.outcome_spaces if sp.observable_id in observed]
            sub = MeasurementSystem(tuple(spaces), tuple(kept))
            assert cbd_contextuality_test(sub).verdict == NONCONTEXTUAL
            checked += 1
    assert checked > 100


def test_every_witness_reverifies():
    rng = random.Random(12)
    for i in range(200):
        s = near_cycle_system(rng) if i % 2 else random_system(rng)
        cbd = cbd_contextuality_test(s)
        if cbd.verdict == NONCONTEXTUAL:
            assert is_coupling_for(cbd.witness, s).ok
        else:
            problem, y = certificate_vector(s, cbd)
            assert check_certificate(problem, y)
        std = standard_contextuality_test(s)
        if std.verdict == NONCONTEXTUAL:
            assert projects_to_system(std.witness, s)
