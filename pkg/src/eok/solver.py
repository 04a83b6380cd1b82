"""Exact enumeration of exactly-one satisfying assignments.

Backtracking over the clause variables with exactly-one propagation; variables
that occur in no clause are expanded afterwards by Cartesian doubling.
"""
from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from eok.errors import DomainError, EnumerationTimeout
from eok.formula import Assignment, Formula

DEFAULT_LIMIT = 2**22

DECISION = None


def check_assignment(f: Formula, a: Assignment) -> bool:
    if a.n != f.n:
        raise DomainError(f"assignment has {a.n} variables, formula has {f.n}")
    x = a.bits
    for vm, nm in f.masks:
        if ((x ^ nm) & vm).bit_count() != 1:
            return False
    return True


def satisfies_mask(f: Formula, x: int) -> bool:
    for vm, nm in f.masks:
        if ((x ^ nm) & vm).bit_count() != 1:
            return False
    return True


@dataclass
class PartialAssignment:
    """Per-variable value in {1, 0, None}; ``values[0]`` is unused.

    ``trail`` records ``(var, value, reason)`` where reason is ``None`` for a
    decision and the forcing clause id otherwise.
    """

    n: int
    values: list = field(default=None)
    trail: list = field(default_factory=list)

    def __post_init__(self):
        if self.values is None:
            self.values = [None] * (self.n + 1)

    def assign(self, var: int, value: int, reason: int | None = DECISION) -> None:
        if self.values[var] is not None:
            raise DomainError(f"variable {var} already assigned")
        self.values[var] = value
        self.trail.append((var, value, reason))

    def undo_to(self, depth: int) -> None:
        while len(self.trail) > depth:
            var, _, _ = self.trail.pop()
            self.values[var] = None

    def is_total(self) -> bool:
        return all(v is not None for v in self.values[1:])


def _propagate_queue(f: Formula, pa: PartialAssignment, queue: list[int]) -> int | None:
    values = pa.values
    clauses = f.clauses
    occ = f.occurrences
    queued = set(queue)
    while queue:
        cid = queue.pop()
        queued.discard(cid)
        n_true = 0
        unset = []
        for lit in clauses[cid].literals:
            v = values[abs(lit)]
            if v is None:
                unset.append(lit)
            elif (v == 1) == (lit > 0):
                n_true += 1
        if n_true >= 2:
            return cid
        if n_true == 1:
            forced = [(abs(lit), 0 if lit > 0 else 1) for lit in unset]
        elif not unset:
            return cid
        elif len(unset) == 1:
            lit = unset[0]
            forced = [(abs(lit), 1 if lit > 0 else 0)]
        else:
            continue
        for var, val in forced:
            pa.assign(var, val, cid)
            for other in occ[var]:
                if other not in queued:
                    queued.add(other)
                    queue.append(other)
    return None


def propagate(f: Formula, pa: PartialAssignment) -> int | None:
    """Run exactly-one propagation on ``pa`` in place until fixpoint.

    Returns the id of a conflicting clause (two true literals, or all
    literals false), or None when the result is consistent.
    """
    return _propagate_queue(f, pa, list(range(f.m)))


@dataclass(frozen=True)
class SolutionSet:
    n: int
    solutions: tuple[Assignment, ...]
    complete: bool = True
    formula_id: str = ""

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def __contains__(self, a: Assignment) -> bool:
        return a.bits in self.bit_set

    @cached_property
    def bit_set(self) -> frozenset[int]:
        return frozenset(a.bits for a in self.solutions)

    @cached_property
    def array(self) -> np.ndarray:
        if self.n > 64:
            raise DomainError("array view needs n <= 64")
        return np.array([a.bits for a in self.solutions], dtype=np.uint64)

    @classmethod
    def from_bits(cls, n: int, bits, complete: bool = True, formula_id: str = "") -> SolutionSet:
        return cls(n, tuple(Assignment(n, int(b)) for b in sorted(set(bits))), complete, formula_id)

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"s eok {self.n} {len(self.solutions)} {int(self.complete)}\n")
        for a in self.solutions:
            out.write(str(a) + "\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> SolutionSet:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise DomainError("empty solution text")
        head = lines[0].split()
        if len(head) != 5 or head[:2] != ["s", "eok"]:
            raise DomainError("malformed solution header")
        n, count, complete = int(head[2]), int(head[3]), head[4] == "1"
        sols = [Assignment.from_string(s) for s in lines[1:]]
        if len(sols) != count or any(a.n != n for a in sols):
            raise DomainError("solution count or width does not match header")
        return cls(n, tuple(sols), complete)


class _Stop(Exception):
    pass


def _enumerate_bits(f: Formula, limit: int, deadline: float | None) -> tuple[list[int], bool]:
    n = f.n
    occ = f.occurrences
    clause_vars = [v for v in range(1, n + 1) if occ[v]]
    free = [v for v in range(1, n + 1) if not occ[v]]
    # most occurrences first, ties by smallest index
    order = sorted(clause_vars, key=lambda v: (-len(occ[v]), v))
    free_bits = [1 << (n - v) for v in free]

    pa = PartialAssignment(n)
    found: list[int] = []
    nodes = 0

    def emit(base: int) -> None:
        batch = [base]
        for b in free_bits:
            batch += [x | b for x in batch]
            if len(found) + len(batch) // 2 > limit:
                break
        for x in batch:
            found.append(x)
            if len(found) > limit:
                raise _Stop

    def dfs(pos: int) -> None:
        nonlocal nodes
        nodes += 1
        if deadline is not None and not nodes & 1023 and time.monotonic() > deadline:
            raise EnumerationTimeout
        values = pa.values
        while pos < len(order) and values[order[pos]] is not None:
            pos += 1
        if pos == len(order):
            base = 0
            for v in clause_vars:
                if values[v]:
                    base |= 1 << (n - v)
            emit(base)
            return
        var = order[pos]
        depth = len(pa.trail)
        for val in (0, 1):
            pa.assign(var, val)
            if _propagate_queue(f, pa, list(occ[var])) is None:
                dfs(pos + 1)
            pa.undo_to(depth)

    if propagate(f, pa) is not None:
        return [], True
    try:
        dfs(0)
    except _Stop:
        found.sort()
        return found[:limit], False
    found.sort()
    return found, True


def enumerate_solutions(f: Formula, limit: int | None = DEFAULT_LIMIT,
                        deadline: float | None = None) -> SolutionSet:
    """All satisfying assignments, sorted lexicographically.

    When more than ``limit`` solutions exist, the first ``limit`` found are
    returned with ``complete=False``.  ``deadline`` is a ``time.monotonic()``
    value after which :class:`EnumerationTimeout` is raised.
    """
    if limit is None:
        limit = 2 ** (f.n + 1)
    if limit < 0:
        raise DomainError("limit must be non-negative")
    bits, complete = _enumerate_bits(f, limit, deadline)
    return SolutionSet(f.n, tuple(Assignment(f.n, b) for b in bits), complete)


def is_satisfiable(f: Formula) -> bool:
    return len(enumerate_solutions(f, limit=1)) > 0


def brute_force_solutions(f: Formula) -> SolutionSet:
    """Filter all 2^n assignments; reference oracle for small n."""
    return SolutionSet(f.n, tuple(Assignment(f.n, x) for x in range(2**f.n) if satisfies_mask(f, x)))
