"""Monte Carlo simulation of the exponential-kernel Hawkes process.

Two exact samplers are provided: the Poisson cluster (branching)
construction and Ogata thinning. Both are vectorised over a block of
replications. Replication ``r`` always belongs to block ``r // BLOCK_SIZE``
and every block draws from its own stream keyed by ``(seed, block)``, so
results do not depend on how many worker threads process the blocks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SimulationError
from .exp_poly import KernelParams

EVENT_CAP = 10**7
BLOCK_SIZE = 4096
N_BATCHES = 32
METHODS = ("cluster", "thinning")

# column order of SampleStats.std_errors
STAT_NAMES = ("k1", "k2", "k3", "k4", "mean_intensity", "joint_mean")


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _cluster_block(params: KernelParams, n_reps: int, rng: np.random.Generator):
    """Event times and replication labels for ``n_reps`` cluster-process paths."""
    n_imm = rng.poisson(params.nu * params.t, size=n_reps)
    reps = np.repeat(np.arange(n_reps), n_imm)
    times = rng.uniform(0.0, params.t, size=reps.size)
    reps, times = descendants_of(params, reps, times, rng)
    _check_cap(reps, n_reps)
    return reps, times


def descendants_of(params: KernelParams, labels: np.ndarray, roots: np.ndarray, rng: np.random.Generator):
    """Grow the branching cascade of each root inside ``[0, t]``.

    Returns ``(labels, times)`` for the roots and all their descendants; each
    descendant carries the label of its root.
    """
    t, ratio, b = params.t, params.branching_ratio, params.b
    reps, times = np.asarray(labels), np.asarray(roots, dtype=float)
    all_reps, all_times = [reps], [times]
    total, cap = reps.size, EVENT_CAP * max(1, np.unique(reps).size)
    while reps.size:
        n_kids = rng.poisson(ratio, size=reps.size)
        parents = np.repeat(np.arange(reps.size), n_kids)
        kid_times = times[parents] + rng.exponential(1.0 / b, size=parents.size)
        # descendants of a child past t are also past t
        keep = kid_times <= t
        reps, times = reps[parents[keep]], kid_times[keep]
        all_reps.append(reps)
        all_times.append(times)
        total += reps.size
        if total > cap:
            raise SimulationError("event cap exceeded in cluster simulation")
    return np.concatenate(all_reps), np.concatenate(all_times)


def _thinning_block(params: KernelParams, n_reps: int, rng: np.random.Generator):
    """Ogata thinning run in lockstep over ``n_reps`` independent paths.

    Between events the excitation only decays, so ``nu + excitation`` at the
    current time bounds the intensity until the next accepted point.
    """
    nu, a, b, t = params.nu, params.a, params.b, params.t
    now = np.zeros(n_reps)
    excite = np.zeros(n_reps)
    active = np.arange(n_reps)
    if nu == 0.0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    all_reps, all_times = [], []
    total = 0
    while active.size:
        bound = nu + excite[active]
        step = rng.exponential(1.0, size=active.size) / bound
        now[active] += step
        excite[active] *= np.exp(-b * step)
        accept = rng.uniform(size=active.size) * bound <= nu + excite[active]
        inside = now[active] <= t
        hit = active[accept & inside]
        excite[hit] += a
        all_reps.append(hit)
        all_times.append(now[hit])
        total += hit.size
        if total > EVENT_CAP * n_reps:
            raise SimulationError("event cap exceeded in thinning simulation")
        active = active[inside]
    reps, times = np.concatenate(all_reps), np.concatenate(all_times)
    _check_cap(reps, n_reps)
    return reps, times


def _check_cap(reps: np.ndarray, n_reps: int) -> None:
    if reps.size and np.bincount(reps, minlength=n_reps).max() > EVENT_CAP:
        raise SimulationError(f"a replication exceeded {EVENT_CAP} events")


_SAMPLERS = {"cluster": _cluster_block, "thinning": _thinning_block}


def simulate_cluster(params: KernelParams, rng: np.random.Generator) -> np.ndarray:
    """One path on ``[0, t]`` by the branching construction; sorted event times.

    Immigrants are Poisson(nu t) uniform on ``[0, t]``; every event has
    Poisson(a/b) children at Exponential(b) delays.
    """
    _, times = _cluster_block(params, 1, rng)
    return np.sort(times)


def simulate_thinning(params: KernelParams, rng: np.random.Generator) -> np.ndarray:
    """One path on ``[0, t]`` by Ogata thinning; sorted event times."""
    _, times = _thinning_block(params, 1, rng)
    return np.sort(times)


def evaluate_path(events: Sequence[float], t_eval: float, params: KernelParams) -> tuple[int, float]:
    """``(N_t, lambda_t)`` at ``t_eval``; ``lambda_t`` is the excitation only (no ``nu``)."""
    ev = np.asarray(events, dtype=float)
    ev = ev[ev <= t_eval]
    intensity = float(params.a * np.exp(-params.b * (t_eval - ev)).sum()) if ev.size else 0.0
    return int(ev.size), intensity


def k_statistics(values) -> np.ndarray:
    """Unbiased estimates ``k_1..k_4`` of the first four cumulants."""
    x = np.asarray(values, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError(f"k-statistics need at least 4 values, got {n}")
    mean = x.mean()
    d = x - mean
    d2 = d * d
    m2 = d2.mean()
    m3 = (d2 * d).mean()
    m4 = (d2 * d2).mean()
    k2 = n * m2 / (n - 1)
    k3 = n * n * m3 / ((n - 1) * (n - 2))
    k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3))
    return np.array([mean, k2, k3, k4])


@dataclass(frozen=True)
class SimConfig:
    params: KernelParams
    t_grid: tuple[float, ...]
    samples: int
    seed: int = 0
    method: str = "cluster"

    def __post_init__(self):
        grid = tuple(float(x) for x in self.t_grid)
        object.__setattr__(self, "t_grid", grid)
        if not grid:
            raise ValueError("t_grid is empty")
        if list(grid) != sorted(grid) or grid[0] < 0 or grid[-1] > self.params.t:
            raise ValueError(f"t_grid must be sorted within [0, {self.params.t}]")
        if self.samples < max(4, N_BATCHES * 4):
            raise ValueError(f"need at least {N_BATCHES * 4} samples (4 per batch), got {self.samples}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SampleStats:
    """Per grid time: k-statistics of ``N_t``, means of ``lambda_t`` and ``lambda_t N_t``.

    ``std_errors[g]`` follows :data:`STAT_NAMES`; ``skewness`` and
    ``excess_kurtosis`` carry ``(estimate, se)`` pairs.
    """

    t_grid: tuple[float, ...]
    samples: int
    count_kstats: np.ndarray  # (len(t_grid), 4)
    intensity_mean: np.ndarray
    joint_mean: np.ndarray
    std_errors: np.ndarray  # (len(t_grid), 6)
    skewness: np.ndarray = field(default=None)  # (len(t_grid), 2)
    excess_kurtosis: np.ndarray = field(default=None)


def _simulate_block(config: SimConfig, block: int) -> tuple[np.ndarray, np.ndarray]:
    start = block * BLOCK_SIZE
    n = min(BLOCK_SIZE, config.samples - start)
    reps, times = _SAMPLERS[config.method](config.params, n, block_rng(config.seed, block))
    grid = config.t_grid
    counts = np.empty((len(grid), n), dtype=np.int64)
    intensity = np.empty((len(grid), n))
    a, b = config.params.a, config.params.b
    for g, te in enumerate(grid):
        mask = times <= te
        r = reps[mask]
        counts[g] = np.bincount(r, minlength=n)
        intensity[g] = np.bincount(r, weights=a * np.exp(-b * (te - times[mask])), minlength=n)
    return counts, intensity


def _threads() -> int:
    raw = os.environ.get("HAWKES_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return min(8, os.cpu_count() or 1)


def simulate_grid(config: SimConfig, threads: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Raw ``(counts, intensities)`` arrays of shape ``(len(t_grid), samples)``."""
    n_blocks = math.ceil(config.samples / BLOCK_SIZE)
    threads = threads or _threads()
    if threads == 1:
        parts = [_simulate_block(config, k) for k in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda k: _simulate_block(config, k), range(n_blocks)))
    counts = np.concatenate([p[0] for p in parts], axis=1)
    intensity = np.concatenate([p[1] for p in parts], axis=1)
    return counts, intensity


def _batch_se(values: np.ndarray) -> float:
    return float(values.std(ddof=1) / math.sqrt(values.size))


def summarize(counts: np.ndarray, intensity: np.ndarray, t_grid: Sequence[float]) -> SampleStats:
    """k-statistics and means per grid time with 32-batch standard errors."""
    n_grid, n = counts.shape
    batches = np.array_split(np.arange(n), N_BATCHES)
    kst = np.empty((n_grid, 4))
    lam = np.empty(n_grid)
    joint = np.empty(n_grid)
    se = np.empty((n_grid, 6))
    skew = np.empty((n_grid, 2))
    kurt = np.empty((n_grid, 2))
    for g in range(n_grid):
        c = counts[g].astype(float)
        lg = intensity[g]
        prod = lg * c
        kst[g] = k_statistics(c)
        lam[g] = lg.mean()
        joint[g] = prod.mean()
        bk = np.array([k_statistics(c[idx]) for idx in batches])
        blam = np.array([lg[idx].mean() for idx in batches])
        bjoint = np.array([prod[idx].mean() for idx in batches])
        se[g, :4] = [_batch_se(bk[:, r]) for r in range(4)]
        se[g, 4] = _batch_se(blam)
        se[g, 5] = _batch_se(bjoint)
        with np.errstate(divide="ignore", invalid="ignore"):
            bskew = bk[:, 2] / bk[:, 1] ** 1.5
            bkurt = bk[:, 3] / bk[:, 1] ** 2
            skew[g] = (kst[g, 2] / kst[g, 1] ** 1.5, _batch_se(bskew))
            kurt[g] = (kst[g, 3] / kst[g, 1] ** 2, _batch_se(bkurt))
    return SampleStats(tuple(t_grid), n, kst, lam, joint, se, skew, kurt)


def run(config: SimConfig, threads: int | None = None) -> SampleStats:
    """Simulate ``config.samples`` replications and aggregate per grid time."""
    counts, intensity = simulate_grid(config, threads)
    return summarize(counts, intensity, config.t_grid)
