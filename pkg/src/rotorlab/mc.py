"""Monte Carlo cross-validation of the exact moment engines.

Sampling is sharded with a counter-based generator (Philox keyed by
(seed, shard index)), so an estimate is a deterministic function of
(seed, samples) alone: shards could be farmed out to any number of workers
and the partial sums still combine in fixed shard order to bit-identical
results.  Gaussian spins are drawn through the float Cholesky factor of the
exact rational covariance, converted once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import ratlin
from .algebra import GAUSSIAN, SPHERE, DotPolynomial, Pair, frac, validate_pair
from .errors import InputError

SHARD_SIZE = 1 << 15


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def sigmas_from(self, target: float) -> float:
        """Distance from a target value in stderr units (inf when stderr 0)."""
        if self.stderr == 0.0:
            return 0.0 if self.mean == target else math.inf
        return abs(self.mean - target) / self.stderr


def _shard_rng(seed: int, shard: int) -> np.random.Generator:
    key = np.array([seed % (1 << 64), shard], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform point on S^{n-1} via a normalized Gaussian draw."""
    if n < 2:
        raise InputError(f"sphere sampling needs n >= 2, got {n}")
    vec = rng.standard_normal(n)
    return vec / np.linalg.norm(vec)


def _sphere_batch(dims, rng: np.random.Generator, count: int) -> np.ndarray:
    """(count, sites, n) array of independent uniform unit spins."""
    raw = rng.standard_normal((count, dims.sites, dims.n))
    return raw / np.linalg.norm(raw, axis=2, keepdims=True)


def _gaussian_batch(dims, chol: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    raw = rng.standard_normal((count, dims.sites, dims.n))
    return np.einsum("ij,sjc->sic", chol, raw)


def _evaluate_poly(p: DotPolynomial, spins: np.ndarray) -> np.ndarray:
    """Vectorized evaluation of p on a batch of spin configurations."""
    dots: dict[Pair, np.ndarray] = {}

    def dot(pair: Pair) -> np.ndarray:
        found = dots.get(pair)
        if found is None:
            i, j = pair
            found = np.einsum("sc,sc->s", spins[:, i - 1, :], spins[:, j - 1, :])
            dots[pair] = found
        return found

    total = np.zeros(spins.shape[0])
    for mono, coeff in p.terms.items():
        term = np.full(spins.shape[0], float(coeff))
        for pair, power in mono:
            term = term * dot(pair) ** power
        total += term
    return total


def _weight_values(
    coupling: Mapping[Pair, object] | None,
    p: DotPolynomial,
    spins: np.ndarray,
) -> np.ndarray | None:
    if coupling is None:
        return None
    exponent = np.zeros(spins.shape[0])
    for (i, j), value in coupling.items():
        pair = validate_pair(p.dims, SPHERE, i, j)
        strength = float(frac(value))
        if strength < 0:
            raise InputError(f"coupling J{pair} = {value} is not ferromagnetic")
        exponent += strength * np.einsum(
            "sc,sc->s", spins[:, pair[0] - 1, :], spins[:, pair[1] - 1, :]
        )
    return np.exp(exponent)


def estimate_moment(
    p: DotPolynomial,
    samples: int,
    seed: int,
    coupling: Mapping[Pair, object] | None = None,
    covariance: ratlin.Matrix | None = None,
) -> MCEstimate:
    """Monte Carlo estimate of E[p], optionally weighted by exp(sum J u).

    Sphere mode samples uniform spins; gaussian mode needs the rational
    covariance and ignores ``coupling``.  The weighted estimate is
    self-normalized, with the influence-function standard error
    std(w (p - mean) / avg(w)) / sqrt(samples).
    """
    if samples < 1000:
        raise InputError(f"need at least 1000 samples, got {samples}")
    if p.mode == GAUSSIAN:
        if covariance is None:
            raise InputError("gaussian-mode estimates need a covariance matrix")
        if coupling is not None:
            raise InputError("interaction weights apply to sphere mode only")
        chol = np.array(ratlin.cholesky_float(covariance))
    elif covariance is not None:
        raise InputError("covariance applies to gaussian mode only")

    shard_stats: list[tuple[float, ...]] = []
    done = 0
    shard = 0
    while done < samples:
        count = min(SHARD_SIZE, samples - done)
        rng = _shard_rng(seed, shard)
        if p.mode == GAUSSIAN:
            spins = _gaussian_batch(p.dims, chol, rng, count)
        else:
            spins = _sphere_batch(p.dims, rng, count)
        values = _evaluate_poly(p, spins)
        weights = _weight_values(coupling, p, spins)
        if weights is None:
            shard_stats.append((float(values.sum()), float((values * values).sum())))
        else:
            wp = weights * values
            shard_stats.append(
                (
                    float(weights.sum()),
                    float(wp.sum()),
                    float((weights * weights).sum()),
                    float((weights * wp).sum()),
                    float((wp * wp).sum()),
                )
            )
        done += count
        shard += 1

    if coupling is None:
        total = math.fsum(s[0] for s in shard_stats)
        total_sq = math.fsum(s[1] for s in shard_stats)
        mean = total / samples
        variance = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
        return MCEstimate(mean, math.sqrt(variance / samples), samples, seed)

    sum_w = math.fsum(s[0] for s in shard_stats)
    sum_wp = math.fsum(s[1] for s in shard_stats)
    sum_w2 = math.fsum(s[2] for s in shard_stats)
    sum_w2p = math.fsum(s[3] for s in shard_stats)
    sum_w2p2 = math.fsum(s[4] for s in shard_stats)
    mean = sum_wp / sum_w
    avg_w = sum_w / samples
    influence_sq = (sum_w2p2 - 2 * mean * sum_w2p + mean * mean * sum_w2) / (avg_w * avg_w)
    variance = max(0.0, influence_sq / (samples - 1))
    return MCEstimate(mean, math.sqrt(variance / samples), samples, seed)
