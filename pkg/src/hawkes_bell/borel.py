"""Borel distribution: cumulants by the Bell recursion, PMF, and a branching sampler.

The Borel law is the total progeny (root included) of a Galton-Watson tree
with Poisson(mu) offspring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell_poly import MAX_ORDER, block_type_counts
from .errors import SimulationError

NODE_CAP = 10**6


@dataclass(frozen=True)
class BorelParams:
    mu: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"Borel parameter mu={self.mu} must lie in (0, 1)")


def borel_cumulants(params: BorelParams, order: int) -> list[float]:
    """First ``order`` cumulants of Borel(mu).

    kappa_1 = 1/(1-mu), then for n >= 2
    kappa_n = mu/(1-mu) * sum_{k=2}^n B_{n,k}(kappa_1, ..., kappa_{n-k+1}).
    The right side only involves orders below n.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order {order} outside [1, {MAX_ORDER}]")
    mu = params.mu
    ratio = mu / (1.0 - mu)
    kappa = [1.0 / (1.0 - mu)]
    for n in range(2, order + 1):
        acc = 0.0
        for k in range(2, n + 1):
            # integer set-partition counts keep the Bell coefficients exact
            for sizes, count in block_type_counts(n, k):
                acc += count * math.prod(kappa[s - 1] for s in sizes)
        kappa.append(ratio * acc)
    return kappa


def borel_pmf(params: BorelParams, n: int) -> float:
    """P(X = n) = exp(-mu n) (mu n)^(n-1) / n!."""
    if n < 1:
        raise ValueError(f"Borel support starts at 1, got n={n}")
    mu = params.mu
    if n <= 50:
        return math.exp(-mu * n) * (mu * n) ** (n - 1) / math.factorial(n)
    return math.exp(-mu * n + (n - 1) * math.log(mu * n) - math.lgamma(n + 1))


def borel_sample(params: BorelParams, rng: np.random.Generator) -> int:
    """Total progeny of one Poisson(mu) Galton-Watson tree, root counted.

    Walks the tree breadth first; a generation of size g has Poisson(mu * g)
    children in total.
    """
    total = 1
    generation = 1
    while generation:
        generation = int(rng.poisson(params.mu * generation))
        total += generation
        if total > NODE_CAP:
            raise SimulationError(f"Borel tree exceeded {NODE_CAP} nodes (mu={params.mu})")
    return total


def borel_sample_many(params: BorelParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`borel_sample` for ``size`` independent trees."""
    total = np.ones(size, dtype=np.int64)
    generation = np.ones(size, dtype=np.int64)
    while True:
        alive = np.flatnonzero(generation)
        if alive.size == 0:
            return total
        generation[alive] = rng.poisson(params.mu * generation[alive])
        total += generation
        if total.max() > NODE_CAP:
            raise SimulationError(f"Borel tree exceeded {NODE_CAP} nodes (mu={params.mu})")
