"""Monte Carlo verification of the quadrature-based expectations.

One point is rejection-sampled from Omega and one from its complement;
the exact two-point closed form is averaged.  Estimates are reproducible:
shard ``i`` draws from ``Philox(SeedSequence(seed, spawn_key=(i,)))``, and
shards are merged in index order, so results are bit-identical for a fixed
(seed, n_samples, shard_count) regardless of the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .discrepancy import l2sq_two_points_batch
from .regions import Point, Region

_PROPOSAL_CAP_PER_POINT = 1_000_000
_BATCH = 65_536

THREADS_ENV_VAR = "JITTERPART_THREADS"


class DegenerateRegionError(RuntimeError):
    """Rejection sampling exceeded the proposal cap."""


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    std_error: float
    n_samples: int
    seed: int
    shard_count: int = 1


def _rng_for_shard(seed: int, shard: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(shard,))))


def sample_pair(region: Region, rng: np.random.Generator) -> tuple[Point, Point]:
    """One point uniform on Omega, one on the complement, by rejection."""
    if region.area is None:
        x1, y1, x2, y2 = rng.random(4)
        return (float(x1), float(y1)), (float(x2), float(y2))
    points = []
    for want_inside in (True, False):
        used = 0
        while True:
            x, y = rng.random(2)
            used += 1
            inside = bool(np.atleast_1d(region.contains(x, y))[0])
            if inside == want_inside:
                points.append((float(x), float(y)))
                break
            if used > _PROPOSAL_CAP_PER_POINT:
                raise DegenerateRegionError(
                    f"no acceptance after {used} proposals (inside={want_inside})"
                )
    return points[0], points[1]


def _sample_batch(region: Region, rng: np.random.Generator, n: int, want_inside: bool):
    """n accepted points, batched rejection in stream order."""
    xs, ys = [], []
    got = 0
    proposals = 0
    cap = _PROPOSAL_CAP_PER_POINT * max(n, 1)
    while got < n:
        m = min(_BATCH, max(1024, 4 * (n - got)))
        pts = rng.random((m, 2))
        proposals += m
        mask = np.asarray(region.contains(pts[:, 0], pts[:, 1]), dtype=bool)
        if not want_inside:
            mask = ~mask
        take = pts[mask][: n - got]
        xs.append(take[:, 0])
        ys.append(take[:, 1])
        got += take.shape[0]
        if proposals > cap or (got == 0 and proposals >= _PROPOSAL_CAP_PER_POINT):
            raise DegenerateRegionError(f"no acceptance after {proposals} proposals")
    return np.concatenate(xs), np.concatenate(ys)


def _shard_sums(region: Region, seed: int, shard: int, n: int) -> tuple[float, float]:
    rng = _rng_for_shard(seed, shard)
    if region.area is None:
        pts = rng.random((n, 4))
        vals = l2sq_two_points_batch(pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 3])
    else:
        x1, y1 = _sample_batch(region, rng, n, True)
        x2, y2 = _sample_batch(region, rng, n, False)
        vals = l2sq_two_points_batch(x1, y1, x2, y2)
    return math.fsum(vals.tolist()), math.fsum((vals * vals).tolist())


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def estimate_expected_l2sq(region: Region, n_samples: int, seed: int,
                           shard_count: int = 1) -> MCEstimate:
    """Mean two-point discrepancy over ``n_samples`` independent pairs."""
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    if shard_count < 1:
        raise ValueError(f"shard_count must be >= 1, got {shard_count}")
    base, extra = divmod(n_samples, shard_count)
    sizes = [base + (1 if i < extra else 0) for i in range(shard_count)]
    workers = min(_worker_count(), shard_count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(lambda i: _shard_sums(region, seed, i, sizes[i]),
                                 range(shard_count)))
    else:
        sums = [_shard_sums(region, seed, i, sizes[i]) for i in range(shard_count)]
    total = math.fsum(s for s, _ in sums)
    total_sq = math.fsum(q for _, q in sums)
    mean = total / n_samples
    variance = max(total_sq - n_samples * mean * mean, 0.0) / max(n_samples - 1, 1)
    return MCEstimate(
        mean=mean,
        std_error=math.sqrt(variance / n_samples),
        n_samples=n_samples,
        seed=seed,
        shard_count=shard_count,
    )
