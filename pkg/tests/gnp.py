"""Vectorized G(n, p) connectivity sampling for the Monte Carlo checks."""
import itertools

import numpy as np


def sample_edges(rng: np.random.Generator, n: int, p: float, size: int) -> np.ndarray:
    """Boolean (size, C(n,2)) edge indicators in itertools.combinations order."""
    return rng.random((size, n * (n - 1) // 2)) < p


def connected_mask(edges: np.ndarray, n: int) -> np.ndarray:
    """Which sampled graphs are connected, by bitmask flood fill from vertex 0."""
    size = edges.shape[0]
    adj = np.zeros((size, n), dtype=np.uint32)
    for e, (x, y) in enumerate(itertools.combinations(range(n), 2)):
        on = edges[:, e]
        adj[on, x] |= np.uint32(1 << y)
        adj[on, y] |= np.uint32(1 << x)
    reach = np.ones(size, dtype=np.uint32)
    for _ in range(n - 1):
        nxt = reach.copy()
        for v in range(n):
            has = (reach >> np.uint32(v)) & np.uint32(1)
            nxt |= adj[:, v] * has
        reach = nxt
    return reach == np.uint32((1 << n) - 1)


def connected_frequency(rng: np.random.Generator, n: int, p: float, samples: int, chunk: int = 200_000) -> float:
    hits, done = 0, 0
    while done < samples:
        size = min(chunk, samples - done)
        hits += int(connected_mask(sample_edges(rng, n, p, size), n).sum())
        done += size
    return hits / samples
