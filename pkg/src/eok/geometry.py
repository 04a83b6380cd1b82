"""Geometry of a solution set: overlaps, l-clusters, holes and covers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from eok.errors import DomainError
from eok.formula import Assignment, Formula, hamming, mask_vars
from eok.solver import SolutionSet, check_assignment
from eok.unionfind import UnionFind

_BLOCK_CELLS = 1 << 22


def overlap(a: Assignment, b: Assignment) -> Fraction:
    d = hamming(a, b)
    if a.n == 0:
        return Fraction(1)
    return Fraction(a.n - d, a.n)


def _as_array(s: SolutionSet) -> np.ndarray:
    return s.array


def _distance_blocks(arr: np.ndarray):
    """Yield ``(row_offset, distances)`` blocks of the pairwise Hamming matrix.

    Only the strict upper triangle is meaningful; callers mask ``j > i``.
    """
    size = len(arr)
    rows = max(1, _BLOCK_CELLS // max(size, 1))
    for start in range(0, size, rows):
        block = arr[start:start + rows]
        yield start, np.bitwise_count(block[:, None] ^ arr[None, :])


def _upper(start: int, shape: tuple[int, int]) -> np.ndarray:
    i = np.arange(start, start + shape[0])[:, None]
    j = np.arange(shape[1])[None, :]
    return j > i


@dataclass(frozen=True)
class OverlapStats:
    n: int
    histogram: tuple[int, ...]  # index i = number of agreeing variables
    pair_count: int
    min_overlap: Fraction | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "histogram": list(self.histogram),
            "pair_count": self.pair_count,
            "min_overlap": None if self.min_overlap is None else [self.min_overlap.numerator,
                                                                  self.min_overlap.denominator],
        }


def overlap_stats(s: SolutionSet) -> OverlapStats:
    """Exact histogram of agreement counts over unordered distinct pairs.

    ``min_overlap`` is None when fewer than two solutions exist.
    """
    n = s.n
    hist = np.zeros(n + 1, dtype=np.int64)
    if len(s) >= 2:
        arr = _as_array(s)
        for start, d in _distance_blocks(arr):
            hist += np.bincount(n - d[_upper(start, d.shape)], minlength=n + 1)[: n + 1]
    pairs = len(s) * (len(s) - 1) // 2
    nz = np.nonzero(hist)[0]
    min_ov = Fraction(int(nz[0]), n) if len(nz) and n else None
    if len(nz) and not n:
        min_ov = Fraction(1)
    return OverlapStats(n, tuple(int(x) for x in hist), pairs, min_ov)


@dataclass(frozen=True)
class ClusterReport:
    l: int
    components: tuple[tuple[Assignment, ...], ...]
    largest_component_size: int
    is_single_cluster: bool

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "components": [[str(a) for a in c] for c in self.components],
            "component_sizes": [len(c) for c in self.components],
            "largest_component_size": self.largest_component_size,
            "is_single_cluster": self.is_single_cluster,
        }


def _ball_size(n: int, l: int) -> int:
    return sum(math.comb(n, j) for j in range(1, min(l, n) + 1))


def _components_pairwise(arr: np.ndarray, l: int) -> UnionFind:
    uf = UnionFind(len(arr))
    for start, d in _distance_blocks(arr):
        ii, jj = np.nonzero((d <= l) & _upper(start, d.shape))
        for i, j in zip((ii + start).tolist(), jj.tolist()):
            uf.union(i, j)
    return uf


def _components_probe(bits: list[int], n: int, l: int) -> UnionFind:
    index = {b: i for i, b in enumerate(bits)}
    flips = [sum(1 << p for p in pos)
             for j in range(1, min(l, n) + 1) for pos in combinations(range(n), j)]
    uf = UnionFind(len(bits))
    for i, b in enumerate(bits):
        for fl in flips:
            j = index.get(b ^ fl)
            if j is not None and j > i:
                uf.union(i, j)
    return uf


def cluster_components(s: SolutionSet, l: int, method: str = "auto") -> ClusterReport:
    """Components of the graph on ``s`` joining solutions at distance <= l.

    ``method`` is ``pairwise`` (union-find over all pair distances),
    ``probe`` (look up every point of each solution's radius-l ball) or
    ``auto``.
    """
    if l < 1:
        raise DomainError(f"l must be >= 1, got {l}")
    size = len(s)
    if size == 0:
        return ClusterReport(l, (), 0, False)
    if method == "auto":
        method = "probe" if _ball_size(s.n, l) * 4 < size else "pairwise"
    if method == "pairwise":
        uf = _components_pairwise(_as_array(s), l)
    elif method == "probe":
        uf = _components_probe([a.bits for a in s.solutions], s.n, l)
    else:
        raise DomainError(f"unknown method {method!r}")
    groups = uf.groups()
    comps = tuple(tuple(s.solutions[i] for i in g) for g in groups)
    largest = max(len(c) for c in comps)
    return ClusterReport(l, comps, largest, len(comps) == 1)


def min_connect_l(s: SolutionSet, method: str = "auto") -> int | None:
    """Smallest l making ``s`` a single l-cluster; None when |s| < 2."""
    if len(s) < 2:
        return None
    lo, hi = 1, max(s.n, 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if cluster_components(s, mid, method).is_single_cluster:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class HoleRecord:
    a: Assignment
    b: Assignment
    size: int

    def to_dict(self) -> dict:
        return {"a": str(self.a), "b": str(self.b), "size": self.size}


def _between_count(arr: np.ndarray, a: int, b: int, full: int) -> int:
    keep = np.uint64(full & ~(a ^ b))
    return int(np.count_nonzero((arr & keep) == np.uint64(a & int(keep))))


def is_hole(f: Formula, a: Assignment, b: Assignment, s: SolutionSet) -> bool:
    """True iff a, b are at distance >= 2 and no other solution lies on a geodesic."""
    if not check_assignment(f, a) or not check_assignment(f, b):
        raise DomainError("hole endpoints must both satisfy the formula")
    if hamming(a, b) < 2:
        return False
    full = (1 << s.n) - 1
    if s.n <= 64:
        # a and b both satisfy the geodesic test themselves
        return _between_count(_as_array(s), a.bits, b.bits, full) - (a in s) - (b in s) == 0
    keep = full & ~(a.bits ^ b.bits)
    target = a.bits & keep
    return not any((c.bits & keep) == target and c.bits not in (a.bits, b.bits) for c in s)


def _holes_by_submask_counts(arr: np.ndarray, n: int, lo: int) -> list[tuple[int, int]]:
    """Hole pairs via subset-sum counts over the 2^n cube, one endpoint at a time.

    With T = {c ^ a : c in S}, the pair (a, a ^ t) is a hole exactly when t is a
    minimal nonzero member of T under the submask order.
    """
    size = 1 << n
    pairs = []
    for a in arr.tolist():
        t = arr ^ np.uint64(a)
        cnt = np.zeros(size, dtype=np.int32)
        cnt[t.astype(np.int64)] = 1
        cnt[0] = 0
        for bit in range(n):
            cnt = cnt.reshape(-1, 2, 1 << bit)
            cnt[:, 1, :] += cnt[:, 0, :]
            cnt = cnt.reshape(size)
        hit = t[(cnt[t.astype(np.int64)] == 1) & (np.bitwise_count(t) >= lo) & ((t ^ np.uint64(a)) > np.uint64(a))]
        pairs += [(a, a ^ int(x)) for x in hit.tolist()]
    return pairs


def find_holes(f: Formula, s: SolutionSet, min_size: int = 2, method: str = "auto") -> list[HoleRecord]:
    """All hole pairs of size >= min_size, largest first, then lexicographic.

    ``method`` is "pairwise" (scan each far-enough pair), "submask" (subset-sum
    counts over the cube, n <= 22) or "auto" (whichever is cheaper).
    """
    if method not in ("auto", "pairwise", "submask"):
        raise DomainError(f"unknown method {method!r}")
    lo = max(min_size, 2)
    if len(s) < 2 or lo > s.n:
        return []
    arr = _as_array(s)
    if method == "submask" and s.n > 22:
        raise DomainError("submask method needs n <= 22")
    if method == "auto":
        method = "submask" if s.n <= 22 and (s.n + 1) * (1 << s.n) < len(s) ** 2 else "pairwise"
    if method == "submask":
        pairs = _holes_by_submask_counts(arr, s.n, lo)
    else:
        full = (1 << s.n) - 1
        pairs = []
        for start, d in _distance_blocks(arr):
            ii, jj = np.nonzero((d >= lo) & _upper(start, d.shape))
            for i, j in zip((ii + start).tolist(), jj.tolist()):
                a, b = s.solutions[i].bits, s.solutions[j].bits
                if _between_count(arr, a, b, full) == 2:
                    pairs.append((a, b))
    out = [HoleRecord(Assignment(s.n, a), Assignment(s.n, b), (a ^ b).bit_count()) for a, b in pairs]
    out.sort(key=lambda h: (-h.size, h.a.bits, h.b.bits))
    return out


def agreement_is_cover(f: Formula, a: Assignment, b: Assignment) -> tuple[frozenset[int], bool]:
    """Agreement set of (a, b) and whether every clause meets it."""
    if a.n != b.n or a.n != f.n:
        raise DomainError("assignment lengths must match the formula")
    agree = ((1 << f.n) - 1) & ~(a.bits ^ b.bits)
    covers = all(vm & agree for vm, _ in f.masks)
    return frozenset(mask_vars(f.n, agree)), covers


def min_cover_size(f: Formula) -> int:
    """Minimum number of variables meeting every clause (exact branch and bound)."""
    masks = sorted({vm for vm, _ in f.masks})
    if not masks:
        return 0

    def packing_bound(chosen: int) -> int:
        # pairwise disjoint uncovered clauses each need their own variable
        used = 0
        count = 0
        for vm in masks:
            if not vm & chosen and not vm & used:
                used |= vm
                count += 1
        return count

    # greedy upper bound
    chosen, best = 0, 0
    while True:
        uncovered = [vm for vm in masks if not vm & chosen]
        if not uncovered:
            break
        tally: dict[int, int] = {}
        for vm in uncovered:
            x = vm
            while x:
                low = x & -x
                tally[low] = tally.get(low, 0) + 1
                x ^= low
        pick = max(tally, key=lambda bit: (tally[bit], bit))
        chosen |= pick
        best += 1

    def search(chosen: int, size: int) -> None:
        nonlocal best
        first = next((vm for vm in masks if not vm & chosen), None)
        if first is None:
            best = min(best, size)
            return
        if size + packing_bound(chosen) >= best:
            return
        x = first
        while x:
            low = x & -x
            search(chosen | low, size + 1)
            x ^= low

    search(0, 0)
    return best
