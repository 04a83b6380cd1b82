import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eok.errors import DomainError
from eok.formula import Assignment, Clause, Formula
from eok.solver import (PartialAssignment, SolutionSet, check_assignment, enumerate_solutions, is_satisfiable,
                        propagate)

from conftest import brute_solutions, random_formula


def test_check_assignment_examples(single_clause):
    assert check_assignment(single_clause, Assignment.from_string("100"))
    assert not check_assignment(single_clause, Assignment.from_string("110"))
    assert not check_assignment(single_clause, Assignment.from_string("000"))
    with pytest.raises(DomainError):
        check_assignment(single_clause, Assignment.from_string("10"))


def test_propagate_rules(single_clause):
    pa = PartialAssignment(3)
    pa.assign(1, 1)
    assert propagate(single_clause, pa) is None
    assert pa.values[1:] == [1, 0, 0]
    assert pa.trail[0] == (1, 1, None)
    assert sorted(pa.trail[1:]) == [(2, 0, 0), (3, 0, 0)]

    pa = PartialAssignment(3)
    pa.assign(1, 0)
    pa.assign(2, 0)
    assert propagate(single_clause, pa) is None
    assert pa.values[3] == 1 and pa.trail[-1] == (3, 1, 0)

    pa = PartialAssignment(3)
    pa.assign(1, 1)
    pa.assign(2, 1)
    assert propagate(single_clause, pa) == 0


def test_propagate_all_false_conflict(single_clause):
    pa = PartialAssignment(3)
    for v in (1, 2, 3):
        pa.assign(v, 0)
    assert propagate(single_clause, pa) == 0


def test_enumerate_examples(single_clause, two_clauses):
    assert [str(a) for a in enumerate_solutions(single_clause)] == ["001", "010", "100"]
    assert [str(a) for a in enumerate_solutions(two_clauses)] == ["0011", "0100", "1000"]
    unsat = Formula(3, 3, 0.5, (Clause((1, 2, 3)), Clause((-1, -2, -3))))
    assert brute_solutions(unsat) == []
    assert len(enumerate_solutions(unsat)) == 0
    assert not is_satisfiable(unsat)


def test_is_satisfiable_examples(single_clause):
    assert is_satisfiable(Formula(2, 3, 0.5))
    assert len(enumerate_solutions(Formula(2, 3, 0.5))) == 4
    assert is_satisfiable(single_clause)


def test_limit_truncates():
    f = Formula(6, 3, 0.5, (Clause((1, 2, 3)),))  # 3 * 8 = 24 solutions
    full = enumerate_solutions(f)
    assert len(full) == 24 and full.complete
    part = enumerate_solutions(f, limit=10)
    assert len(part) == 10 and not part.complete
    assert set(part.bit_set) <= set(full.bit_set)
    exact = enumerate_solutions(f, limit=24)
    assert exact.complete and len(exact) == 24


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(3, 12), ratio=st.floats(0, 1.5), k=st.integers(3, 4),
       eps=st.sampled_from([0.0, 0.2, 0.5]))
def test_oracle_equivalence(seed, n, ratio, k, eps):
    if n < k:
        n = k
    f = random_formula(random.Random(seed), n, int(ratio * n), k, eps)
    sols = enumerate_solutions(f)
    assert [str(a) for a in sols] == brute_solutions(f)
    assert sols.complete


def test_clause_restrictions_pairwise_distance_two():
    rng = random.Random(0)
    for k in (3, 4, 5, 6):
        for _ in range(50):
            lits = tuple(v if rng.random() < 0.5 else -v for v in range(1, k + 1))
            f = Formula(k, k, 0.5, (Clause(lits),))
            sols = enumerate_solutions(f).solutions
            assert len(sols) == k
            for a, b in itertools.combinations(sols, 2):
                assert (a.bits ^ b.bits).bit_count() == 2


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(4, 10), m=st.integers(1, 8))
def test_propagation_soundness(seed, n, m):
    rng = random.Random(seed)
    f = random_formula(rng, n, m)
    pa = PartialAssignment(n)
    decided = rng.sample(range(1, n + 1), rng.randint(1, 3))
    for v in decided:
        pa.assign(v, rng.randint(0, 1))
    conflict = propagate(f, pa)
    sols = [str(a) for a in enumerate_solutions(f)]
    consistent = [s for s in sols if all(int(s[v - 1]) == pa.values[v] for v in decided)]
    if conflict is not None:
        assert consistent == []
    else:
        for s in consistent:
            assert all(int(s[v - 1]) == val for v, val, _ in pa.trail)


def test_solution_text_roundtrip(two_clauses):
    s = enumerate_solutions(two_clauses)
    text = s.to_text()
    assert text.splitlines()[0] == "s eok 4 3 1"
    back = SolutionSet.from_text(text)
    assert back.solutions == s.solutions and back.complete


def test_free_variables_doubled():
    f = Formula(5, 3, 0.5, (Clause((1, 3, 5)),))
    sols = enumerate_solutions(f)
    assert len(sols) == 12
    assert [str(a) for a in sols] == brute_solutions(f)
