"""Exactly-one k-clause formulas, assignments, random ensembles and the text format.

Bit layout: an assignment over n variables is an int in which variable ``v``
(1-based) lives at bit ``n - v``.  Variable 1 is therefore the most
significant bit, the bitstring prints with variable 1 leftmost, and integer
order coincides with lexicographic order of the bitstrings.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from eok.errors import DomainError, FormulaParseError

# Above this many variable sets the constant-probability generator stops
# sweeping every candidate clause and samples per-pattern counts instead.
SWEEP_LIMIT = 10**7


@dataclass(frozen=True, order=True)
class Assignment:
    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0 or self.bits < 0 or self.bits >> self.n:
            raise DomainError(f"bits {self.bits} do not fit in {self.n} variables")

    @classmethod
    def from_string(cls, s: str) -> Assignment:
        s = s.strip()
        if any(ch not in "01" for ch in s):
            raise DomainError(f"not a bitstring: {s!r}")
        return cls(len(s), int(s, 2) if s else 0)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> Assignment:
        """Build from a per-variable 0/1 sequence (index 0 is variable 1)."""
        return cls.from_string("".join("1" if v else "0" for v in values))

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b") if self.n else ""

    def __len__(self) -> int:
        return self.n

    def value(self, var: int) -> int:
        if not 1 <= var <= self.n:
            raise DomainError(f"variable {var} out of range 1..{self.n}")
        return (self.bits >> (self.n - var)) & 1

    def flipped(self, variables: Iterable[int]) -> Assignment:
        return Assignment(self.n, self.bits ^ var_mask(self.n, variables))


def var_bit(n: int, var: int) -> int:
    return 1 << (n - var)


def var_mask(n: int, variables: Iterable[int]) -> int:
    m = 0
    for v in variables:
        m |= 1 << (n - v)
    return m


def mask_vars(n: int, mask: int) -> list[int]:
    """Variables (ascending) whose bits are set in ``mask``."""
    return [v for v in range(1, n + 1) if (mask >> (n - v)) & 1]


def hamming(a: Assignment, b: Assignment) -> int:
    if a.n != b.n:
        raise DomainError(f"length mismatch: {a.n} vs {b.n}")
    return (a.bits ^ b.bits).bit_count()


@dataclass(frozen=True)
class Clause:
    """k signed literals, DIMACS style: ``-v`` is the negation of variable v."""

    literals: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(int(x) for x in self.literals))
        if any(x == 0 for x in self.literals):
            raise DomainError("literal 0 is not a variable")
        if len({abs(x) for x in self.literals}) != len(self.literals):
            raise DomainError(f"repeated variable in clause {self.literals}")

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(abs(x) for x in self.literals)

    @property
    def negations(self) -> int:
        return sum(1 for x in self.literals if x < 0)

    def __len__(self) -> int:
        return len(self.literals)


@dataclass(frozen=True)
class Provenance:
    model: str = "file"  # counting | constant_prob | file
    param: float | None = None
    seed: int | None = None


@dataclass(frozen=True)
class Formula:
    n: int
    k: int
    epsilon: float
    clauses: tuple[Clause, ...] = ()
    provenance: Provenance = field(default_factory=Provenance, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(
            c if isinstance(c, Clause) else Clause(tuple(c)) for c in self.clauses))
        if self.k < 3:
            raise DomainError(f"k must be >= 3, got {self.k}")
        if not 0.0 <= self.epsilon <= 0.5:
            raise DomainError(f"epsilon must lie in [0, 1/2], got {self.epsilon}")
        if self.n < 0:
            raise DomainError("n must be non-negative")
        for i, c in enumerate(self.clauses):
            if len(c) != self.k:
                raise DomainError(f"clause {i} has {len(c)} literals, expected {self.k}")
            for v in c.variables:
                if not 1 <= v <= self.n:
                    raise DomainError(f"clause {i}: variable {v} out of range 1..{self.n}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @cached_property
    def masks(self) -> tuple[tuple[int, int], ...]:
        """Per clause ``(variable mask, negated-variable mask)``."""
        out = []
        for c in self.clauses:
            vm = nm = 0
            for x in c.literals:
                b = 1 << (self.n - abs(x))
                vm |= b
                if x < 0:
                    nm |= b
            out.append((vm, nm))
        return tuple(out)

    @cached_property
    def occurrences(self) -> tuple[tuple[int, ...], ...]:
        """``occurrences[v]`` lists the clause ids containing variable v (index 0 unused)."""
        occ: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i, c in enumerate(self.clauses):
            for v in c.variables:
                occ[v].append(i)
        return tuple(tuple(o) for o in occ)

    def restrict(self, variables: Sequence[int]) -> tuple[Formula, list[int]]:
        """Sub-formula of the clauses lying inside ``variables``, renumbered 1..len.

        Returns the sub-formula and the list mapping new index - 1 to the old
        variable.  Clauses touching variables outside the set are dropped.
        """
        old = sorted(variables)
        new_of = {v: i + 1 for i, v in enumerate(old)}
        sub = []
        for c in self.clauses:
            if all(abs(x) in new_of for x in c.literals):
                sub.append(Clause(tuple(new_of[abs(x)] * (1 if x > 0 else -1) for x in c.literals)))
        return Formula(len(old), self.k, self.epsilon, tuple(sub), self.provenance), old


@dataclass(frozen=True)
class ModelParams:
    n: int
    k: int
    epsilon: float
    seed: int = 0
    r: float | None = None
    p: float | None = None

    def __post_init__(self):
        if (self.r is None) == (self.p is None):
            raise DomainError("exactly one of r (counting) or p (constant probability) is required")
        if self.r is not None and not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")
        if not 0.0 <= self.epsilon <= 0.5:
            raise DomainError(f"epsilon must lie in [0, 1/2], got {self.epsilon}")
        if self.k < 3:
            raise DomainError(f"k must be >= 3, got {self.k}")
        if self.n < self.k:
            raise DomainError(f"need n >= k, got n={self.n}, k={self.k}")


# ---------------------------------------------------------------- thresholds

def _check_threshold_args(k: int, epsilon: float) -> None:
    if k < 3:
        raise DomainError(f"k must be >= 3, got {k}")
    if not 0.0 < epsilon <= 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2], got {epsilon}")


def threshold_r(k: int, epsilon: float) -> float:
    """Satisfiability threshold clause density, counting model."""
    _check_threshold_args(k, epsilon)
    return 1.0 / (4.0 * epsilon * (1.0 - epsilon)) / math.comb(k, 2)


def threshold_p_coefficient(k: int, epsilon: float) -> float:
    """Coefficient C with threshold_p = C * n**(1-k)."""
    _check_threshold_args(k, epsilon)
    return math.factorial(k - 2) / (2.0 * epsilon * (1.0 - epsilon))


def threshold_p(k: int, epsilon: float, n: int) -> float:
    """Satisfiability threshold clause probability, constant probability model."""
    coef = threshold_p_coefficient(k, epsilon)
    if n < k:
        raise DomainError(f"need n >= k, got n={n}, k={k}")
    return coef * float(n) ** (1 - k)


# ---------------------------------------------------------------- generators

def sign_pattern_weights(k: int, epsilon: float) -> np.ndarray:
    """Probability of each ordered sign pattern; bit j of the index negates slot j."""
    w = np.empty(2**k)
    for s in range(2**k):
        i = s.bit_count()
        w[s] = epsilon**i * (1.0 - epsilon) ** (k - i)
    return w


def _largest_remainder(total: int, weights: np.ndarray) -> list[int]:
    quotas = total * weights / weights.sum()
    counts = np.floor(quotas).astype(int)
    rest = total - int(counts.sum())
    # stable sort keeps ties in pattern-index order
    order = np.argsort(-(quotas - counts), kind="stable")
    for idx in order[:rest]:
        counts[idx] += 1
    return [int(c) for c in counts]


def _distinct_variable_rows(rng: np.random.Generator, n: int, k: int, m: int) -> np.ndarray:
    rows = rng.integers(1, n + 1, size=(m, k))
    while m:
        s = np.sort(rows, axis=1)
        bad = (s[:, 1:] == s[:, :-1]).any(axis=1)
        nbad = int(bad.sum())
        if not nbad:
            break
        rows[bad] = rng.integers(1, n + 1, size=(nbad, k))
    return rows


def _signed(rows: np.ndarray, patterns: np.ndarray, k: int) -> tuple[Clause, ...]:
    neg = (patterns[:, None] >> np.arange(k)[None, :]) & 1
    lits = np.where(neg == 1, -rows, rows)
    return tuple(Clause(tuple(int(x) for x in row)) for row in lits)


def clause_count(params: ModelParams) -> int:
    """round(r*n), halves rounded up."""
    return int(math.floor(params.r * params.n + 0.5))


def gen_counting(params: ModelParams, mode: str = "multinomial") -> Formula:
    """Counting model: exactly round(r*n) clauses, drawn with replacement.

    ``multinomial``: each clause negates each slot independently with
    probability epsilon.  ``exact-counts``: each ordered sign pattern gets the
    largest-remainder rounding of m * eps^i (1-eps)^(k-i) clauses.
    """
    if params.r is None:
        raise DomainError("gen_counting needs params.r")
    n, k, eps = params.n, params.k, params.epsilon
    m = clause_count(params)
    rng = np.random.default_rng(params.seed)
    if mode == "multinomial":
        neg = rng.random((m, k)) < eps
        patterns = (neg * (1 << np.arange(k))).sum(axis=1) if m else np.zeros(0, dtype=int)
    elif mode == "exact-counts":
        counts = _largest_remainder(m, sign_pattern_weights(k, eps))
        patterns = np.repeat(np.arange(2**k), counts)
        patterns = rng.permutation(patterns)
    else:
        raise DomainError(f"unknown counting mode {mode!r}")
    rows = _distinct_variable_rows(rng, n, k, m)
    clauses = _signed(rows, np.asarray(patterns, dtype=np.int64), k)
    return Formula(n, k, eps, clauses, Provenance("counting", params.r, params.seed))


def gen_constant_prob(params: ModelParams) -> Formula:
    """Constant probability model: every signed clause kept independently.

    A clause with i negated literals is kept with probability p*eps^i*(1-eps)^(k-i).
    """
    if params.p is None:
        raise DomainError("gen_constant_prob needs params.p")
    n, k, eps, p = params.n, params.k, params.epsilon, params.p
    probs = p * sign_pattern_weights(k, eps)
    if probs.max() > 1.0:
        raise DomainError(f"inclusion probability {probs.max()} exceeds 1")
    rng = np.random.default_rng(params.seed)
    total = math.comb(n, k)
    clauses: list[Clause] = []
    if p == 0.0:
        pass
    elif total <= SWEEP_LIMIT:
        combos = itertools.combinations(range(1, n + 1), k)
        chunk = 1 << 16
        while True:
            block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
            if not len(block):
                break
            keep = rng.random((len(block), len(probs))) < probs
            rows, pats = np.nonzero(keep)
            clauses.extend(_signed(block[rows], pats.astype(np.int64), k))
    else:
        for pat, prob in enumerate(probs):
            count = int(rng.binomial(total, prob))
            seen: set[tuple[int, ...]] = set()
            while len(seen) < count:
                row = tuple(sorted(int(x) for x in rng.choice(n, size=k, replace=False) + 1))
                seen.add(row)
            for row in sorted(seen):
                clauses.extend(_signed(np.array([row]), np.array([pat]), k))
    return Formula(n, k, eps, tuple(clauses), Provenance("constant_prob", p, params.seed))


def generate(params: ModelParams, mode: str = "multinomial") -> Formula:
    if params.r is not None:
        return gen_counting(params, mode)
    return gen_constant_prob(params)


# ---------------------------------------------------------------- text format

def _format_epsilon(eps: float) -> str:
    short = f"{eps:.6f}"
    return short if float(short) == eps else repr(float(eps))


def write_formula(f: Formula) -> str:
    out = io.StringIO()
    pv = f.provenance
    if pv.model != "file":
        out.write(f"c provenance {pv.model} {pv.param!r} {pv.seed}\n")
    out.write(f"p eok {f.n} {f.m} {f.k} {_format_epsilon(f.epsilon)}\n")
    for c in f.clauses:
        out.write(" ".join(str(x) for x in c.literals) + " 0\n")
    return out.getvalue()


def parse_formula(text: str) -> Formula:
    header = None
    provenance = Provenance()
    clauses: list[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 5 and parts[1] == "provenance":
                try:
                    provenance = Provenance(parts[2], float(parts[3]), int(parts[4]))
                except ValueError:
                    raise FormulaParseError(lineno, "malformed provenance comment") from None
            continue
        if line.startswith("p"):
            if header is not None:
                raise FormulaParseError(lineno, "duplicate header")
            parts = line.split()
            if len(parts) != 6 or parts[1] != "eok":
                raise FormulaParseError(lineno, "malformed header, expected 'p eok <n> <m> <k> <epsilon>'")
            try:
                n, m, k, eps = int(parts[2]), int(parts[3]), int(parts[4]), float(parts[5])
            except ValueError:
                raise FormulaParseError(lineno, "malformed header numbers") from None
            if k < 3 or n < 0 or m < 0 or not 0.0 <= eps <= 0.5:
                raise FormulaParseError(lineno, "header values out of range")
            header = (n, m, k, eps)
            continue
        if header is None:
            raise FormulaParseError(lineno, "clause before header")
        n, m, k, eps = header
        try:
            nums = [int(x) for x in line.split()]
        except ValueError:
            raise FormulaParseError(lineno, "non-integer literal") from None
        if not nums or nums[-1] != 0:
            raise FormulaParseError(lineno, "clause must end with 0")
        lits = nums[:-1]
        if 0 in lits:
            raise FormulaParseError(lineno, "literal 0 inside clause")
        if len(lits) != k:
            raise FormulaParseError(lineno, f"clause has {len(lits)} literals, expected {k}")
        if len({abs(x) for x in lits}) != k:
            raise FormulaParseError(lineno, "repeated variable")
        if any(abs(x) > n for x in lits):
            raise FormulaParseError(lineno, f"variable index out of range 1..{n}")
        clauses.append(Clause(tuple(lits)))
    if header is None:
        raise FormulaParseError(0, "missing header")
    n, m, k, eps = header
    if len(clauses) != m:
        raise FormulaParseError(0, f"header announces {m} clauses, found {len(clauses)}")
    return Formula(n, k, eps, tuple(clauses), provenance)
