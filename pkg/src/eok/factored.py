"""Solution sets as products over formula-hypergraph components.

Clauses never straddle two components, so the solution set is the Cartesian
product of the components' solution sets.  Several observables of the full
set follow exactly from the factors without materialising the product:

* the count is the product of factor counts;
* the largest pairwise distance is the sum of the factors' largest distances;
* the minimal connecting radius is the largest factor radius (a path in the
  product projects onto a path in every factor, and factors can be walked
  one at a time);
* a hole differs in exactly one component, where it is a hole of that
  factor (otherwise rewriting one component gives a solution in between).

Tests cross-check every one of these against direct computation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from eok.formula import Assignment, Formula
from eok.geometry import find_holes, min_connect_l
from eok.solver import SolutionSet, enumerate_solutions
from eok.structure import formula_components


@dataclass(frozen=True)
class Factor:
    variables: tuple[int, ...]  # original variable indices, ascending
    formula: Formula  # restricted, renumbered 1..len(variables)
    solutions: SolutionSet


class FactoredSolutions:
    def __init__(self, f: Formula, limit: int | None = None, deadline: float | None = None):
        self.formula = f
        self.factors: list[Factor] = []
        for part in formula_components(f).parts:
            sub, old = f.restrict(part)
            sols = enumerate_solutions(sub, limit=limit, deadline=deadline)
            self.factors.append(Factor(tuple(old), sub, sols))

    @property
    def n(self) -> int:
        return self.formula.n

    @property
    def complete(self) -> bool:
        return all(fc.solutions.complete for fc in self.factors)

    @property
    def count(self) -> int:
        return math.prod(len(fc.solutions) for fc in self.factors)

    def _lift(self, fc: Factor, bits: int) -> int:
        m = len(fc.variables)
        out = 0
        for j, v in enumerate(fc.variables):
            if (bits >> (m - 1 - j)) & 1:
                out |= 1 << (self.n - v)
        return out

    def max_distance(self) -> int | None:
        if self.count < 2:
            return None
        total = 0
        for fc in self.factors:
            if len(fc.solutions) >= 2:
                arr = fc.solutions.array
                total += max(int(np.bitwise_count(arr ^ x).max()) for x in arr)
        return total

    def min_connect_l(self) -> int | None:
        if self.count < 2:
            return None
        return max(min_connect_l(fc.solutions) for fc in self.factors if len(fc.solutions) >= 2)

    def hole_count(self, min_size: int) -> int:
        total = self.count
        if total < 2:
            return 0
        out = 0
        for fc in self.factors:
            size = len(fc.solutions)
            if size < 2:
                continue
            holes = find_holes(fc.formula, fc.solutions, min_size)
            out += len(holes) * (total // size)
        return out

    def materialize(self) -> SolutionSet:
        bits = [0]
        for fc in self.factors:
            lifted = [self._lift(fc, a.bits) for a in fc.solutions]
            bits = [x | y for x in bits for y in lifted]
        if self.count == 0:
            bits = []
        return SolutionSet.from_bits(self.n, bits, self.complete)

    def sample(self, rng: np.random.Generator) -> Assignment:
        """A uniformly random solution (requires count > 0)."""
        out = 0
        for fc in self.factors:
            sols = fc.solutions.solutions
            out |= self._lift(fc, sols[int(rng.integers(len(sols)))].bits)
        return Assignment(self.n, out)
