from __future__ import annotations


class UnionFind:
    """Disjoint sets over 0..size-1 with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size
        self.count = size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.count -= 1
        return True

    def groups(self, members=None) -> list[list[int]]:
        """Sets as sorted lists, ordered by smallest member."""
        out: dict[int, list[int]] = {}
        for x in (range(len(self.parent)) if members is None else members):
            out.setdefault(self.find(x), []).append(x)
        return sorted((sorted(g) for g in out.values()), key=lambda g: g[0])


class ParityUnionFind:
    """Union-find that tracks each element's parity relative to its root.

    ``relate(x, y, d)`` records value(x) xor value(y) == d and returns False
    when that contradicts earlier relations.
    """

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.parity = [0] * size

    def find(self, x: int) -> tuple[int, int]:
        p = 0
        path = []
        while self.parent[x] != x:
            path.append(x)
            p ^= self.parity[x]
            x = self.parent[x]
        root = x
        # compress, fixing parities from the top of the path downwards
        acc = p
        for node in path:
            old = self.parity[node]
            self.parity[node] = acc
            self.parent[node] = root
            acc ^= old
        return root, p

    def relate(self, x: int, y: int, d: int) -> bool:
        rx, px = self.find(x)
        ry, py = self.find(y)
        if rx == ry:
            return (px ^ py) == d
        self.parent[ry] = rx
        self.parity[ry] = px ^ py ^ d
        return True
