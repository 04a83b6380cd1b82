"""Closed-form bounds, special constants and roots for random epsilon-1-in-k SAT.

Probability bounds are evaluated in log space; :func:`hole_prob_bound_exact`
re-evaluates the hole bound with exact rationals (plus a high precision
exponential) as an independent cross-check.

Code-to-formula mapping for the hole bound with overlap count i:

    log C(n, i) + i log 2
      + (n - i - 1) log(2^(2-k) [lam] (i/n)^(k-2) (1 - i/n))
      - log(n - i)
      - lam n / C(k,2) * (1 - (k C(i,k) + 2 C(i,k-2) C(n-i,2)) / (2^k C(n,k)))

where ``[lam]`` is present only with ``lambda_in_bracket=True``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
from scipy.optimize import bisect

from eok.errors import DomainError

QUOTED_EPSILON_C = 0.2726
SCAN_POINTS = 10_000


def lambda_c(c: float) -> float:
    """Component-size coefficient 3 / (1 - c)^2 for the H graph."""
    if not 0.0 <= c < 1.0:
        raise DomainError(f"need 0 <= c < 1, got {c}")
    return 3.0 / (1.0 - c) ** 2


def condition_one(q: float, epsilon: float, k: int) -> bool:
    """2 [q (1 - eps)]^(k-2) <= 1."""
    if not (0.0 <= q <= 1.0 and 0.0 <= epsilon <= 1.0):
        raise DomainError("q and epsilon must lie in [0, 1]")
    return 2.0 * (q * (1.0 - epsilon)) ** (k - 2) <= 1.0


def shattering_density(c: float, epsilon: float, k: int) -> float:
    """Clause/variable ratio c / (max(4e(1-e), e^2+(1-e)^2) C(k,2))."""
    w = max(4 * epsilon * (1 - epsilon), epsilon**2 + (1 - epsilon) ** 2)
    return c / (w * math.comb(k, 2))


def shattering_c(r: float, epsilon: float, k: int) -> float:
    """Inverse of :func:`shattering_density`."""
    w = max(4 * epsilon * (1 - epsilon), epsilon**2 + (1 - epsilon) ** 2)
    return r * w * math.comb(k, 2)


def mu_bounds(n: int, a: int, d: int, p: float, epsilon: float, k: int) -> tuple[float, float]:
    """Upper bounds on the equal-edge and unequal-edge probabilities of H."""
    if a < 0 or d < 0 or a + d > n:
        raise DomainError("need a, d >= 0 and a + d <= n")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    base = (a * (1 - epsilon) + d * epsilon) ** (k - 2) / math.factorial(k - 2)
    mu_eq = p * (epsilon**2 + (1 - epsilon) ** 2) * base
    mu_neq = 4 * p * epsilon * (1 - epsilon) * base
    return mu_eq, mu_neq


def mu_residual(epsilon: float) -> float:
    return epsilon**2 + (1 - epsilon) ** 2 - 4 * epsilon * (1 - epsilon)


def epsilon_0() -> float:
    return (3 - math.sqrt(3)) / 6


def epsilon_0_roots() -> tuple[float, float]:
    """Both roots of 6e^2 - 6e + 1 = 0."""
    return (3 - math.sqrt(3)) / 6, (3 + math.sqrt(3)) / 6


def cubic(x: float) -> float:
    return 2 * x**3 - 2 * x**2 + 3 * x - 1


@dataclass(frozen=True)
class EpsilonC:
    root: float
    residual: float
    quoted: float
    quoted_residual: float

    @property
    def discrepancy(self) -> float:
        return self.root - self.quoted

    def to_dict(self) -> dict:
        return {"root": self.root, "residual": self.residual, "quoted": self.quoted,
                "quoted_residual": self.quoted_residual, "discrepancy": self.discrepancy}


def epsilon_c() -> EpsilonC:
    """Real root of 2x^3 - 2x^2 + 3x - 1 in (0, 1), next to the quoted 0.2726."""
    root = bisect(cubic, 0.0, 1.0, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)
    return EpsilonC(root, cubic(root), QUOTED_EPSILON_C, cubic(QUOTED_EPSILON_C))


def connected_prob_bound(n: int, c: float) -> float:
    """c^(n-1) / n, an upper bound on Pr[G(n, c/n) connected]."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if not 0.0 < c < 1.0:
        raise DomainError(f"need 0 < c < 1, got {c}")
    return c ** (n - 1) / n


def cover_exponent(lam: float, c: float, k: int) -> float:
    """h(lam) = c (1-lam)^k - lam ln(1/lam) - (1-lam) ln(1/(1-lam))."""
    if not 0.0 < lam < 0.5:
        raise DomainError(f"need 0 < lambda < 1/2, got {lam}")
    return c * (1 - lam) ** k - lam * math.log(1 / lam) - (1 - lam) * math.log(1 / (1 - lam))


def _first_root(fn: Callable[[float], float], grid: np.ndarray, xtol: float) -> float | None:
    """Smallest sign change of fn along ``grid``, refined by bisection."""
    prev_x, prev = grid[0], fn(grid[0])
    if prev == 0.0:
        return float(prev_x)
    for x in grid[1:]:
        cur = fn(x)
        if cur == 0.0:
            return float(x)
        if (prev < 0) != (cur < 0):
            return bisect(fn, prev_x, x, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
        prev_x, prev = x, cur
    return None


def q_c(c: float, k: int) -> float:
    """Largest q <= 1/2 with cover_exponent > 0 on all of (0, q)."""
    if not c > 0:
        raise DomainError(f"need c > 0, got {c}")
    grid = np.linspace(0.5 / SCAN_POINTS, 0.5, SCAN_POINTS)[:-1]
    root = _first_root(lambda x: cover_exponent(x, c, k), grid, xtol=1e-15)
    return 0.5 if root is None else root


def _log_hole_terms(n: int, i: int, lam: float, k: int, lambda_in_bracket: bool) -> float:
    m = n - i
    if i == 0 and k > 2:
        return -math.inf
    log_binom = math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(m + 1)
    inner = (2.0 - k) * math.log(2) + (k - 2) * math.log(i / n) + math.log(1 - i / n)
    if lambda_in_bracket:
        inner += math.log(lam)
    frac = (k * math.comb(i, k) + 2 * math.comb(i, k - 2) * math.comb(m, 2)) / (2**k * math.comb(n, k))
    expo = -lam * n / math.comb(k, 2) * (1 - frac)
    return log_binom + i * math.log(2) + (m - 1) * inner - math.log(m) + expo


def log_hole_prob_bound(n: int, i: int, lam: float, k: int, lambda_in_bracket: bool = False) -> float:
    if not 0 <= i <= n or n < k:
        raise DomainError("need 0 <= i <= n and n >= k")
    if i == n:
        # a pair with full overlap is one assignment, never a hole
        return -math.inf
    return _log_hole_terms(n, i, lam, k, lambda_in_bracket)


def hole_prob_bound(n: int, i: int, lam: float, k: int, lambda_in_bracket: bool = False) -> float:
    """Upper bound on the probability of a hole between solutions of overlap count i."""
    return math.exp(log_hole_prob_bound(n, i, lam, k, lambda_in_bracket))


def hole_prob_bound_exact(n: int, i: int, lam: float, k: int, lambda_in_bracket: bool = False,
                          digits: int = 60) -> mpmath.mpf:
    """Same bound with exact rationals; only the final exponential is irrational."""
    if not 0 <= i <= n or n < k:
        raise DomainError("need 0 <= i <= n and n >= k")
    if i == n:
        return mpmath.mpf(0)
    m = n - i
    lam_q = Fraction(lam)
    inner = Fraction(1, 2 ** (k - 2)) * Fraction(i, n) ** (k - 2) * (1 - Fraction(i, n))
    if lambda_in_bracket:
        inner *= lam_q
    rational = Fraction(math.comb(n, i) * 2**i) * inner ** (m - 1) / m
    frac = Fraction(k * math.comb(i, k) + 2 * math.comb(i, k - 2) * math.comb(m, 2),
                    2**k * math.comb(n, k))
    expo = -lam_q * n / math.comb(k, 2) * (1 - frac)
    with mpmath.workdps(digits):
        return (mpmath.mpf(rational.numerator) / rational.denominator
                * mpmath.exp(mpmath.mpf(expo.numerator) / expo.denominator))


def _hole_poly(x, k):
    return (k * x**k + k * (k - 1) * x ** (k - 2) * (1 - x) ** 2) / 2**k


def make_f(lam: float, k: int) -> Callable[[float], float]:
    """f_k(x) = lam^(1-x) (x/2)^((k-2)(1-x)-x) exp(-lam (1 - P(x)) / C(k,2))."""
    ck2 = math.comb(k, 2)

    def f(x: float) -> float:
        return (lam ** (1 - x) * (x / 2) ** ((k - 2) * (1 - x) - x)
                * math.exp(-lam * (1 - _hole_poly(x, k)) / ck2))

    return f


def make_g(lam: float, k: int) -> Callable[[float], float]:
    """g_k(x) = (1-x) ln lam + ((k-2)(1-x) - x) ln(x/2) - lam (1 - P(x)) / C(k,2)."""
    ck2 = math.comb(k, 2)
    log_lam = math.log(lam)

    def g(x: float) -> float:
        return ((1 - x) * log_lam + ((k - 2) * (1 - x) - x) * math.log(x / 2)
                - lam / ck2 * (1 - _hole_poly(x, k)))

    return g


def f_g_and_root(lam: float, k: int):
    """Return ``(f_k, g_k, x_k)``; x_k is the smallest root of g_k in (0, 1) or None."""
    if not 0.0 < lam < 1.0:
        raise DomainError(f"need 0 < lambda < 1, got {lam}")
    if k < 3:
        raise DomainError(f"k must be >= 3, got {k}")
    f, g = make_f(lam, k), make_g(lam, k)
    grid = np.linspace(1.0 / SCAN_POINTS, 1.0, SCAN_POINTS)
    return f, g, _first_root(g, grid, xtol=1e-12)


def stirling_braces(alpha: float, lam: float, k: int) -> float:
    """Unsimplified per-n base of the Stirling-approximated hole bound."""
    ck2 = math.comb(k, 2)
    num = (2**alpha * ((alpha / 2) ** (k - 2) * lam * (1 - alpha)) ** (1 - alpha)
           * math.exp(-lam * (1 - _hole_poly(alpha, k)) / ck2))
    return num / (alpha**alpha * (1 - alpha) ** (1 - alpha))


def stirling_form_check(alpha: float, lam: float, k: int) -> float:
    """Relative difference between the raw braces base and f_k(alpha)."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"need 0 <= alpha < 1, got {alpha}")
    if alpha == 0.0:
        return 0.0
    raw = stirling_braces(alpha, lam, k)
    simple = make_f(lam, k)(alpha)
    if raw == 0.0 and simple == 0.0:
        return 0.0
    return abs(raw - simple) / max(abs(raw), abs(simple))
