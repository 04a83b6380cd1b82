import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eok.errors import DomainError
from eok.formula import Assignment, Clause, Formula, sign_pattern_weights
from eok.solver import check_assignment, enumerate_solutions
from eok.structure import (EQUAL, UNEQUAL, Edge, LabeledGraph, VariablePartition, build_H, classify_clause,
                           formula_components, parity_consistent, partition, path_via_formula_components,
                           path_via_H)

from conftest import random_formula

A = Assignment.from_string


def part(n, v0=(), v1=(), v2=(), v3=()):
    return VariablePartition(n, frozenset(v0), frozenset(v1), frozenset(v2), frozenset(v3))


def test_partition_examples():
    p = partition(A("0101"), A("0011"))
    assert (p.v0, p.v1, p.v2, p.v3) == ({1}, {3}, {2}, {4})
    assert (p.a, p.b, p.c, p.d) == (1, 1, 1, 1) and p.alpha == 0.25
    same = partition(A("0110"), A("0110"))
    assert not same.v1 and not same.v2
    opp = partition(A("0110"), A("1001"))
    assert not opp.v0 and not opp.v3
    with pytest.raises(DomainError):
        partition(A("01"), A("011"))


def test_classify_examples():
    assert classify_clause(Clause((1, 3, 4)), part(5, v0={1}, v1={3}, v2={4})).tag == "C1"
    assert classify_clause(Clause((1, 3, 4)), part(5, v0={1}, v1={3}, v2={4})).i == 0
    c2 = classify_clause(Clause((-2, -3, -4)), part(5, v3={2}, v1={3}, v2={4}))
    assert (c2.tag, c2.i) == ("C2", 1)
    c3 = classify_clause(Clause((1, 3, -5)), part(5, v0={1}, v1={3, 5}))
    assert (c3.tag, c3.i) == ("C3", 0)
    c4 = classify_clause(Clause((-1, 3, -5)), part(5, v3={1}, v2={3, 5}))
    assert (c4.tag, c4.i) == ("C4", 1)
    # a positive V3 literal or three disagreeing variables give no edge
    assert classify_clause(Clause((1, 3, 4)), part(5, v3={1}, v1={3}, v2={4})).tag is None
    assert classify_clause(Clause((1, 3, 4)), part(5, v1={1, 3}, v2={4})).tag is None


def test_build_H_examples():
    f1 = Formula(4, 3, 0.5, (Clause((1, 3, 4)),))
    h = build_H(f1, A("0001"), A("0010"))
    assert h.edges == (Edge(3, 4, UNEQUAL, 0),)
    f3 = Formula(5, 3, 0.5, (Clause((1, 3, -5)),))
    h3 = build_H(f3, A("00000"), A("00101"))
    assert h3.edges == (Edge(3, 5, EQUAL, 0),)
    same = build_H(f1, A("0001"), A("0001"))
    assert same.vertices == () and same.edges == ()
    with pytest.raises(DomainError):
        build_H(f1, A("0000"), A("0001"))


def test_parity_examples():
    tri = lambda labels: LabeledGraph((1, 2, 3), tuple(Edge(x, y, lab, i) for i, ((x, y), lab)
                                                       in enumerate(zip([(1, 2), (2, 3), (1, 3)], labels))))
    assert not parity_consistent(tri([EQUAL, EQUAL, UNEQUAL]))
    assert parity_consistent(tri([EQUAL, EQUAL, EQUAL]))
    path = LabeledGraph((1, 2, 3), (Edge(1, 2, UNEQUAL, 0), Edge(2, 3, UNEQUAL, 1)))
    assert parity_consistent(path)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(1, 7), st.integers(1, 7), st.booleans()), max_size=15))
def test_parity_matches_brute_force_colouring(raw):
    edges = tuple(Edge(x, y, UNEQUAL if u else EQUAL, i) for i, (x, y, u) in enumerate(raw) if x != y)
    g = LabeledGraph(tuple(range(1, 8)), edges)
    brute = any(all((col[e.x - 1] != col[e.y - 1]) == (e.label == UNEQUAL) for e in edges)
                for col in itertools.product((0, 1), repeat=7))
    assert parity_consistent(g) == brute


def test_formula_components_examples():
    f = Formula(5, 3, 0.5, (Clause((1, 2, 3)), Clause((3, 4, 5))))
    assert formula_components(f) == ([[1, 2, 3, 4, 5]], 5)
    g = Formula(6, 3, 0.5, (Clause((1, 2, 3)), Clause((4, 5, 6))))
    assert formula_components(g) == ([[1, 2, 3], [4, 5, 6]], 3)
    e = formula_components(Formula(4, 3, 0.5))
    assert e.parts == [[1], [2], [3], [4]] and e.largest == 1


def test_path_via_components_examples():
    f = Formula(6, 3, 0.5, (Clause((1, 2, 3)), Clause((4, 5, 6))))
    path = path_via_formula_components(f, A("100100"), A("010010"))
    assert [str(a) for a in path] == ["100100", "010100", "010010"]
    assert path_via_formula_components(f, A("100100"), A("100100")) == [A("100100")]
    e = Formula(2, 3, 0.5)
    assert [str(a) for a in path_via_formula_components(e, A("00"), A("11"))] == ["00", "10", "11"]


def test_path_via_H_examples():
    f1 = Formula(4, 3, 0.5, (Clause((1, 3, 4)),))
    res = path_via_H(f1, A("0001"), A("0010"))
    assert res.valid and [str(a) for a in res.path] == ["0001", "0010"] and res.max_step == 2
    same = path_via_H(f1, A("0001"), A("0001"))
    assert same.valid and same.path == (A("0001"),) and same.max_step == 0


def test_dot_and_json_export():
    f1 = Formula(4, 3, 0.5, (Clause((1, 3, 4)),))
    h = build_H(f1, A("0001"), A("0010"))
    assert h.to_dict() == {"vertices": [3, 4], "edges": [{"x": 3, "y": 4, "label": "unequal", "clause": 0}]}
    assert "3 -- 4" in h.to_dot()


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(4, 11), ratio=st.floats(0.1, 0.9),
       k=st.integers(3, 4), eps=st.sampled_from([0.1, 0.3, 0.5]))
def test_pair_properties_on_random_instances(seed, n, ratio, k, eps):
    f = random_formula(random.Random(seed), n, max(1, int(ratio * n)), k, eps)
    sols = enumerate_solutions(f).solutions
    for a in sols[:5]:
        p = partition(a, a)
        assert all(classify_clause(c, p).tag is None for c in f.clauses)
    for a, b in itertools.islice(itertools.combinations(sols, 2), 300):
        h = build_H(f, a, b)
        assert parity_consistent(h)
        for e in h.edges:
            assert (a.value(e.x) != a.value(e.y)) == (e.label == UNEQUAL)
        comps = formula_components(f)
        path = path_via_formula_components(f, a, b)
        assert all(check_assignment(f, x) for x in path)
        assert all((x.bits ^ y.bits).bit_count() <= comps.largest for x, y in zip(path, path[1:]))
        res = path_via_H(f, a, b)
        assert res.valid and res.path[-1] == b


def test_same_class_edge_frequencies_uniform():
    """Condition the constant-probability model on a fixed pair satisfying.

    Inclusions are independent, so conditioning keeps each clause that both
    assignments satisfy with its usual probability and drops the rest.
    """
    k, eps, n = 3, 0.5, 10
    a = Assignment.from_values([0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
    b = Assignment.from_values([0, 0, 1, 1, 1, 0, 0, 0, 1, 1])
    pt = partition(a, b)
    r = 0.8 / math.comb(k, 2)  # shattering density with c = 0.8 at eps = 1/2
    p = r * n / math.comb(n, k)
    weights = sign_pattern_weights(k, eps)
    allowed, probs = [], []
    for vs in itertools.combinations(range(1, n + 1), k):
        for pat in range(2**k):
            cl = Clause(tuple(-v if pat >> j & 1 else v for j, v in enumerate(vs)))
            one = Formula(n, k, eps, (cl,))
            if check_assignment(one, a) and check_assignment(one, b):
                allowed.append(cl)
                probs.append(p * weights[pat])
    probs = np.array(probs)
    same_pairs = [tuple(sorted(x)) for grp in (pt.v1, pt.v2) for x in itertools.combinations(sorted(grp), 2)]
    rng = np.random.default_rng(2024)
    trials = 4000
    hits = {pr: 0 for pr in same_pairs}
    for _ in range(trials):
        keep = np.nonzero(rng.random(len(allowed)) < probs)[0]
        f = Formula(n, k, eps, tuple(allowed[i] for i in keep))
        present = {(e.x, e.y) for e in build_H(f, a, b).edges if e.label == EQUAL}
        for pr in same_pairs:
            hits[pr] += pr in present
    pooled = sum(hits.values()) / (trials * len(same_pairs))
    se = math.sqrt(pooled * (1 - pooled) / trials)
    assert pooled > 0
    for pr, h in hits.items():
        assert abs(h / trials - pooled) <= 4 * se, (pr, h / trials, pooled)
