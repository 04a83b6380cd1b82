"""Formula hypergraph components, the labeled disagreement graph H of a solution
pair, and the component-flip paths built from them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from eok.errors import DomainError, InvariantViolation
from eok.formula import Assignment, Clause, Formula, var_mask
from eok.solver import check_assignment
from eok.unionfind import ParityUnionFind, UnionFind

EQUAL = "equal"
UNEQUAL = "unequal"


@dataclass(frozen=True)
class VariablePartition:
    n: int
    v0: frozenset[int]
    v1: frozenset[int]
    v2: frozenset[int]
    v3: frozenset[int]

    @property
    def a(self) -> int:
        return len(self.v0)

    @property
    def b(self) -> int:
        return len(self.v1)

    @property
    def c(self) -> int:
        return len(self.v2)

    @property
    def d(self) -> int:
        return len(self.v3)

    @property
    def alpha(self) -> float:
        return self.a / self.n

    @property
    def beta(self) -> float:
        return self.b / self.n

    @property
    def gamma(self) -> float:
        return self.c / self.n

    @property
    def delta(self) -> float:
        return self.d / self.n

    @property
    def disagreement(self) -> frozenset[int]:
        return self.v1 | self.v2


def partition(a: Assignment, b: Assignment) -> VariablePartition:
    """V0: both 0, V1: a=0 b=1, V2: a=1 b=0, V3: both 1."""
    if a.n != b.n:
        raise DomainError(f"length mismatch: {a.n} vs {b.n}")
    sets: list[set[int]] = [set(), set(), set(), set()]
    for v in range(1, a.n + 1):
        sets[2 * a.value(v) + b.value(v)].add(v)
    # index 2*A+B: 0 -> V0, 1 -> V1, 2 -> V2, 3 -> V3
    return VariablePartition(a.n, *(frozenset(x) for x in sets))


@dataclass(frozen=True)
class ClauseType:
    tag: str | None  # "C1".."C4", or None
    i: int  # number of V3 variables in the clause


def classify_clause(cl: Clause, part: VariablePartition) -> ClauseType:
    """Edge type of a clause with respect to a solution pair's partition.

    A clause induces an H edge when exactly two of its variables disagree,
    every V0 literal is positive and every V3 literal negated.
    """
    i = sum(1 for x in cl.literals if abs(x) in part.v3)
    special = []
    for x in cl.literals:
        v = abs(x)
        if v in part.v0:
            if x < 0:
                return ClauseType(None, i)
        elif v in part.v3:
            if x > 0:
                return ClauseType(None, i)
        else:
            special.append(x)
    if len(special) != 2:
        return ClauseType(None, i)
    in1 = [abs(z) in part.v1 for z in special]
    neg = [z < 0 for z in special]
    if in1[0] != in1[1]:
        if not neg[0] and not neg[1]:
            return ClauseType("C1", i)
        if neg[0] and neg[1]:
            return ClauseType("C2", i)
    elif neg[0] != neg[1]:
        return ClauseType("C3" if in1[0] else "C4", i)
    return ClauseType(None, i)


@dataclass(frozen=True)
class Edge:
    x: int
    y: int
    label: str
    clause: int


@dataclass(frozen=True)
class LabeledGraph:
    """Multigraph on variables with equal/unequal labelled edges."""

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]

    def components(self) -> list[list[int]]:
        index = {v: i for i, v in enumerate(self.vertices)}
        uf = UnionFind(len(self.vertices))
        for e in self.edges:
            uf.union(index[e.x], index[e.y])
        return [[self.vertices[i] for i in g] for g in uf.groups()]

    def largest_component(self) -> int:
        return max((len(c) for c in self.components()), default=0)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"x": e.x, "y": e.y, "label": e.label, "clause": e.clause} for e in self.edges],
        }

    def to_dot(self, name: str = "H") -> str:
        lines = [f"graph {name} {{"]
        lines += [f"  {v};" for v in self.vertices]
        for e in self.edges:
            style = "solid" if e.label == EQUAL else "dashed"
            sym = "=" if e.label == EQUAL else "!="
            lines.append(f'  {e.x} -- {e.y} [label="{sym} c{e.clause}", style={style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_H(f: Formula, a: Assignment, b: Assignment) -> LabeledGraph:
    """H graph of a satisfying pair: one edge per clause of type C1..C4."""
    if not check_assignment(f, a) or not check_assignment(f, b):
        raise DomainError("build_H needs two satisfying assignments")
    part = partition(a, b)
    edges = []
    for cid, cl in enumerate(f.clauses):
        ct = classify_clause(cl, part)
        if ct.tag is None:
            continue
        x, y = sorted(v for v in cl.variables if v in part.disagreement)
        edges.append(Edge(x, y, UNEQUAL if ct.tag in ("C1", "C2") else EQUAL, cid))
    return LabeledGraph(tuple(sorted(part.disagreement)), tuple(edges))


def parity_consistent(h: LabeledGraph) -> bool:
    """Whether the labels admit a 2-colouring (no cycle with odd unequal count)."""
    index = {v: i for i, v in enumerate(h.vertices)}
    for e in h.edges:
        for v in (e.x, e.y):
            if v not in index:
                index[v] = len(index)
    uf = ParityUnionFind(len(index))
    for e in h.edges:
        if not uf.relate(index[e.x], index[e.y], 1 if e.label == UNEQUAL else 0):
            return False
    return True


class Components(NamedTuple):
    parts: list[list[int]]
    largest: int


def formula_components(f: Formula) -> Components:
    """Connected components of the formula hypergraph; isolated variables are singletons."""
    uf = UnionFind(f.n + 1)
    for c in f.clauses:
        vs = c.variables
        for v in vs[1:]:
            uf.union(vs[0], v)
    parts = uf.groups(range(1, f.n + 1))
    return Components(parts, max((len(p) for p in parts), default=0))


def _flip_path(f: Formula, start: Assignment, blocks: list[list[int]], target: Assignment):
    path = [start]
    cur = start.bits
    for blk in blocks:
        m = var_mask(f.n, blk)
        cur = (cur & ~m) | (target.bits & m)
        path.append(Assignment(f.n, cur))
    return path


def path_via_formula_components(f: Formula, p: Assignment, q: Assignment) -> list[Assignment]:
    """Walk from p to q rewriting one hypergraph component at a time.

    Components are visited in ascending order of their smallest variable.
    Raises :class:`InvariantViolation` should any intermediate fail to satisfy f.
    """
    if not check_assignment(f, p) or not check_assignment(f, q):
        raise DomainError("path endpoints must both satisfy the formula")
    diff = p.bits ^ q.bits
    blocks = [c for c in formula_components(f).parts if var_mask(f.n, c) & diff]
    path = _flip_path(f, p, blocks, q)
    for step in path:
        if not check_assignment(f, step):
            raise InvariantViolation(f"intermediate {step} of component path does not satisfy the formula")
    if path[-1] != q:
        raise InvariantViolation("component path does not end at the target")
    return path


@dataclass(frozen=True)
class HPath:
    """Result of :func:`path_via_H`.

    ``valid`` is False when some intermediate fails; then ``path`` stops at
    the offending assignment and ``counterexample`` names it.
    """

    path: tuple[Assignment, ...]
    max_step: int
    valid: bool
    counterexample: Assignment | None = None


def path_via_H(f: Formula, a: Assignment, b: Assignment) -> HPath:
    """Walk from a to b flipping whole connected components of H at once."""
    h = build_H(f, a, b)
    if not parity_consistent(h):
        raise InvariantViolation("H of two satisfying assignments has a contradictory cycle")
    blocks = h.components()
    path = _flip_path(f, a, blocks, b)
    for idx, step in enumerate(path):
        if not check_assignment(f, step):
            return HPath(tuple(path[: idx + 1]), max((len(x) for x in blocks), default=0), False, step)
    return HPath(tuple(path), max((len(x) for x in blocks), default=0), True)
