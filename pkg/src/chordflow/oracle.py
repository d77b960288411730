"""Brute-force references: Monte Carlo potentials, random-line chord integrals
and finite-difference derivatives.

Random numbers come from counter-based Philox streams.  Sample block ``k``
always uses the stream keyed by ``seed`` with block counter ``k``, and block
statistics are combined in block order, so splitting the blocks over shards
reproduces the single-shard estimate bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body import ConvexBody, cast_rays
from .errors import CoverageError, ParameterError
from .riesz import PotentialSpec
from .sphere import SPHERE_AREA, UNIT_BALL_VOLUME, make_s2_grid, pairwise_sum, trig_eval

BLOCK = 1 << 15


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    samples: int
    seed: int


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent stream for one sample block (counter high word = block)."""
    seed = int(seed) & ((1 << 64) - 1)
    counter = np.array([0, 0, 0, int(block)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def _blocks(samples: int):
    nblk = (samples + BLOCK - 1) // BLOCK
    return [(k, min(BLOCK, samples - k * BLOCK)) for k in range(nblk)]


def run_blocks(fn, samples: int, seed: int, shards: int = 1):
    """Evaluate ``fn(rng, count) -> values`` over all blocks.

    Returns per-block ``(sum, sum of squares)`` in block order.  ``shards``
    only changes how blocks are grouped, never the result.
    """
    blocks = _blocks(samples)
    per_shard = -(-len(blocks) // max(1, shards))
    stats = []
    for s in range(0, len(blocks), per_shard):
        for k, count in blocks[s:s + per_shard]:
            vals = np.asarray(fn(block_generator(seed, k), count), dtype=float)
            stats.append((pairwise_sum(vals), pairwise_sum(vals * vals)))
    return stats


def _summarise(stats, samples, scale, seed):
    total = pairwise_sum(np.array([s for s, _ in stats]))
    total_sq = pairwise_sum(np.array([s2 for _, s2 in stats]))
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return McEstimate(scale * mean, scale * np.sqrt(var / samples), samples, int(seed))


def _membership(body: ConvexBody, refine: int = 4):
    """Directions and support values for the point-membership test.

    The support inequalities are imposed on a grid ``refine`` times finer
    than the body's, using the interpolated support function.
    """
    if body.dim == 2:
        n = body.grid.size * refine
        theta = 2.0 * np.pi * np.arange(n) / n
        a, b = body.support.coef
        return np.column_stack([np.cos(theta), np.sin(theta)]), trig_eval(a, b, theta)[0]
    nt, nphi = body.grid.shape
    fine = make_s2_grid(nt * refine, nphi * refine)
    return fine.nodes, body.support.evaluator.value(fine.nodes)


def mc_volume_potential(body: ConvexBody, spec: PotentialSpec, z, samples: int, seed: int,
                        shards: int = 1) -> McEstimate:
    """Rejection-sampling estimate of the body integral
    ``int omega((y-z)/|y-z|) phi(y) |y-z|^(a-n) dy``."""
    if samples < 10_000:
        raise ParameterError("Monte Carlo potentials need at least 1e4 samples")
    z = np.asarray(z, dtype=float)
    n = body.dim
    eye = np.eye(n)
    hi = body.support.value_at(eye)
    lo = -body.support.value_at(-eye)
    box = float(np.prod(hi - lo))
    coarse_dirs, coarse_h = body.grid.nodes, body.h
    dirs, hvals = _membership(body)
    margin = 0.05 * body.max_h
    accepted = [0]

    def fn(rng, count):
        y = lo + (hi - lo) * rng.random((count, n))
        # The fine test only matters within a thin shell of the coarse polytope
        gap = np.max(y @ coarse_dirs.T - coarse_h, axis=1)
        inside = gap <= 0.0
        shell = np.flatnonzero(inside & (gap > -margin))
        inside[shell] = np.max(y[shell] @ dirs.T - hvals, axis=1) <= 0.0
        accepted[0] += int(np.count_nonzero(inside))
        d = y[inside] - z
        r = np.linalg.norm(d, axis=1)
        vals = np.zeros(count)
        ok = r > 0.0
        rr = r[ok]
        w = spec.omega_at(d[ok] / rr[:, None]) * spec.phi_at(y[inside][ok]) * rr ** (spec.a - n)
        sub = np.zeros(np.count_nonzero(inside))
        sub[ok] = w
        vals[inside] = sub
        return vals

    stats = run_blocks(fn, samples, seed, shards)
    if accepted[0] < 0.01 * samples:
        raise CoverageError("acceptance rate below 1%: bounding box is degenerate")
    return _summarise(stats, samples, box, seed)


def _random_directions(rng, count, n):
    if n == 2:
        ang = 2.0 * np.pi * rng.random(count)
        return np.column_stack([np.cos(ang), np.sin(ang)])
    v = rng.standard_normal((count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def chord_lengths(body: ConvexBody, base, u) -> np.ndarray:
    """Length of the chord cut from the line ``base + s u`` (0 on a miss)."""
    fwd, _ = cast_rays(body, base, u, extended=True)
    bwd, _ = cast_rays(body, base, -u, extended=True)
    x = fwd + bwd
    return np.where(np.isfinite(x) & (x > 0.0), x, 0.0)


def mc_chord_integral(body: ConvexBody, q: float, lines: int, seed: int, radius: float | None = None,
                      shards: int = 1) -> McEstimate:
    """Random-line estimate of I_q from the parallel X-ray representation."""
    if lines < 10_000:
        raise ParameterError("Monte Carlo chord integrals need at least 1e4 lines")
    if not q >= 0.0:
        raise ParameterError(f"q must be nonnegative, got {q}")
    n = body.dim
    if radius is None:
        radius = 1.01 * body.max_h
    if radius < float(np.max(body.radial)):
        raise CoverageError("base disk does not cover the body")

    def fn(rng, count):
        u = _random_directions(rng, count, n)
        if n == 2:
            perp = np.column_stack([-u[:, 1], u[:, 0]])
            base = (radius * (2.0 * rng.random(count) - 1.0))[:, None] * perp
        else:
            helper = np.where(np.abs(u[:, [0]]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
            e1 = np.cross(u, helper)
            e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
            e2 = np.cross(u, e1)
            r = radius * np.sqrt(rng.random(count))
            ang = 2.0 * np.pi * rng.random(count)
            base = (r * np.cos(ang))[:, None] * e1 + (r * np.sin(ang))[:, None] * e2
        return chord_lengths(body, base, u) ** q

    area = 2.0 * radius if n == 2 else np.pi * radius**2
    scale = SPHERE_AREA[n] * area / (n * UNIT_BALL_VOLUME[n])
    return _summarise(run_blocks(fn, lines, seed, shards), lines, scale, seed)


def fd_derivative(g, at: float, step: float, order: int = 1) -> float:
    """Fourth-order central difference of ``g`` at ``at``."""
    if not step > 0.0:
        raise ParameterError("finite-difference step must be positive")
    s = float(step)
    x = float(at)
    if order == 1:
        return (g(x - 2 * s) - 8.0 * g(x - s) + 8.0 * g(x + s) - g(x + 2 * s)) / (12.0 * s)
    if order == 2:
        return (-g(x - 2 * s) + 16.0 * g(x - s) - 30.0 * g(x) + 16.0 * g(x + s) - g(x + 2 * s)) / (12.0 * s * s)
    raise ParameterError("order must be 1 or 2")
