"""Spherical Laplacian, Dirichlet form and heat flow on the dot-product algebra.

The Laplace-Beltrami operator on each sphere acts on the pair variables
through three closed contraction rules:

    lap_i u_ij            = -(n-1) u_ij
    grad_i u_ij . grad_i u_ij = 1 - u_ij^2
    grad_i u_ij . grad_i u_ik = u_jk - u_ij u_ik          (j != k)
    grad_i u_jk           = 0 whenever i is not an endpoint

extended to monomials with the Leibniz rule
lap_i(ab) = a lap_i b + b lap_i a + 2 grad_i a . grad_i b.  None of the
rules ever raises a per-site degree and all preserve per-site parity, so
every monomial generates a finite Laplacian-invariant subspace; the heat
semigroup is the matrix exponential on that subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    CONST_MONO,
    SPHERE,
    DotPolynomial,
    FloatPolynomial,
    ModelDims,
    Mono,
    Pair,
    mono_div,
    mono_mul,
)
from .errors import InputError, ResourceLimitError
from .moments import sphere_moment
from .numerics import expm

DEFAULT_BASIS_CAP = 5000


def _incidence(mono: Mono) -> dict[int, list[tuple[Pair, int, int]]]:
    """site -> [(pair, exponent, other endpoint)] for the pairs touching it."""
    table: dict[int, list[tuple[Pair, int, int]]] = {}
    for (i, j), p in mono:
        table.setdefault(i, []).append(((i, j), p, j))
        table.setdefault(j, []).append(((i, j), p, i))
    return table


def _add(table: dict[Mono, Fraction], mono: Mono, coeff: Fraction) -> None:
    merged = table.get(mono, Fraction(0)) + coeff
    if merged:
        table[mono] = merged
    elif mono in table:
        del table[mono]


def _laplacian_mono(mono: Mono, dims: ModelDims) -> dict[Mono, Fraction]:
    n = dims.n
    out: dict[Mono, Fraction] = {}
    for site, incident in _incidence(mono).items():
        degree = sum(p for _, p, _ in incident)
        _add(out, mono, Fraction(-(n - 1) * degree))
        for pair, p, _ in incident:
            if p >= 2:
                c = Fraction(p * (p - 1))
                _add(out, mono_div(mono, pair, 2), c)
                _add(out, mono, -c)
        for a in range(len(incident)):
            pair_a, pa, ja = incident[a]
            for b in range(a + 1, len(incident)):
                pair_b, pb, jb = incident[b]
                c = Fraction(2 * pa * pb)
                base = mono_div(mono_div(mono, pair_a), pair_b)
                bridge: Mono = ((tuple(sorted((ja, jb))), 1),)
                _add(out, mono_mul(base, bridge), c)
                _add(out, mono, -c)
    return out


def laplacian(p: DotPolynomial) -> DotPolynomial:
    """Sum over sites of the spherical Laplacians, exactly."""
    if p.mode != SPHERE:
        raise InputError("laplacian acts on sphere-mode polynomials")
    table: dict[Mono, Fraction] = {}
    for mono, coeff in p.terms.items():
        for out_mono, weight in _laplacian_mono(mono, p.dims).items():
            _add(table, out_mono, coeff * weight)
    return DotPolynomial._raw(p.dims, p.mode, table)


def grad_dot(f: DotPolynomial, h: DotPolynomial) -> DotPolynomial:
    """Exact grad f . grad h summed over all sites."""
    if f.mode != SPHERE or h.mode != SPHERE:
        raise InputError("grad_dot acts on sphere-mode polynomials")
    if f.dims != h.dims:
        raise InputError(f"dims mismatch: {f.dims} vs {h.dims}")
    table: dict[Mono, Fraction] = {}
    for m1, c1 in f.terms.items():
        inc1 = _incidence(m1)
        for m2, c2 in h.terms.items():
            inc2 = _incidence(m2)
            for site in inc1.keys() & inc2.keys():
                for pair_a, pa, ja in inc1[site]:
                    left = mono_div(m1, pair_a)
                    for pair_b, pb, jb in inc2[site]:
                        coeff = c1 * c2 * pa * pb
                        base = mono_mul(left, mono_div(m2, pair_b))
                        if ja == jb:
                            _add(table, base, coeff)
                        else:
                            bridge: Mono = ((tuple(sorted((ja, jb))), 1),)
                            _add(table, mono_mul(base, bridge), coeff)
                        _add(table, mono_mul(m1, m2), -coeff)
    return DotPolynomial._raw(f.dims, f.mode, table)


def dirichlet(f: DotPolynomial, h: DotPolynomial) -> Fraction:
    """E[grad f . grad h]; equals -E[f lap h] by integration by parts."""
    return sphere_moment(grad_dot(f, h))


@dataclass(frozen=True)
class SemigroupMatrix:
    """The Laplacian restricted to a finite invariant monomial basis."""

    dims: ModelDims
    basis: tuple[Mono, ...]
    matrix: tuple[tuple[Fraction, ...], ...]  # matrix[i][j] = <basis_i | lap basis_j>

    def index(self, mono: Mono) -> int:
        return self.basis.index(mono)

    def as_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix])


def _close_basis(
    seeds: Iterable[Mono],
    dims: ModelDims,
    generator,
    cap: int,
) -> tuple[tuple[Mono, ...], tuple[tuple[Fraction, ...], ...]]:
    order: list[Mono] = []
    index: dict[Mono, int] = {}
    columns: dict[int, dict[Mono, Fraction]] = {}
    queue = sorted(set(seeds))
    for mono in queue:
        index[mono] = len(order)
        order.append(mono)
    cursor = 0
    while cursor < len(order):
        mono = order[cursor]
        image = generator(mono, dims)
        columns[cursor] = image
        for out_mono in sorted(image):
            if out_mono not in index:
                if len(order) >= cap:
                    raise ResourceLimitError(
                        f"invariant basis exceeded the cap of {cap} monomials"
                    )
                index[out_mono] = len(order)
                order.append(out_mono)
        cursor += 1
    size = len(order)
    matrix = [[Fraction(0)] * size for _ in range(size)]
    for col, image in columns.items():
        for out_mono, coeff in image.items():
            matrix[index[out_mono]][col] = coeff
    return tuple(order), tuple(tuple(row) for row in matrix)


def build_invariant_basis(
    seeds: DotPolynomial | Iterable[Mono],
    dims: ModelDims | None = None,
    cap: int = DEFAULT_BASIS_CAP,
) -> SemigroupMatrix:
    """Smallest Laplacian-closed monomial set containing the seeds, plus the matrix."""
    if isinstance(seeds, DotPolynomial):
        if seeds.mode != SPHERE:
            raise InputError("invariant bases are built in sphere mode")
        dims = seeds.dims
        seed_monos: Iterable[Mono] = seeds.terms.keys()
    else:
        if dims is None:
            raise InputError("dims required when seeding from raw monomials")
        seed_monos = seeds
    basis, matrix = _close_basis(seed_monos, dims, _laplacian_mono, cap)
    return SemigroupMatrix(dims, basis, matrix)


def heat_evolve(
    f: DotPolynomial,
    t: float,
    cap: int = DEFAULT_BASIS_CAP,
) -> FloatPolynomial:
    """exp(t lap) f on the invariant basis of f; coefficients go float here."""
    if t < 0:
        raise InputError(f"heat evolution needs t >= 0, got {t}")
    sg = build_invariant_basis(f, cap=cap)
    vec = np.zeros(len(sg.basis))
    for mono, coeff in f.terms.items():
        vec[sg.index(mono)] = float(coeff)
    evolved = expm(t * sg.as_float()) @ vec
    terms = {mono: float(v) for mono, v in zip(sg.basis, evolved) if v != 0.0}
    return FloatPolynomial(f.dims, f.mode, terms)


@dataclass(frozen=True)
class CorrelationFlow:
    """Samples of h(t) = E[f exp(t lap) g] along a time grid."""

    times: tuple[float, ...]
    values: tuple[float, ...]
    product_of_means: float  # E[f] E[g], the t -> infinity limit
    monotone: bool
    limit_gap: float
    slack: float

    def rows(self):
        prev = None
        for t, h in zip(self.times, self.values):
            ok = prev is None or h <= prev + self.slack
            yield t, h, ok
            prev = h


def correlation_flow(
    f: DotPolynomial,
    g: DotPolynomial,
    times: Sequence[float],
    cap: int = DEFAULT_BASIS_CAP,
) -> CorrelationFlow:
    """The monotone interpolation from E[fg] down to E[f]E[g].

    Moments of the evolved basis monomials are exact rationals; only the
    evolved coefficients are floating point.
    """
    if f.dims != g.dims or f.mode != g.mode:
        raise InputError("correlation_flow needs matching dims and mode")
    ts = [float(t) for t in times]
    if any(t < 0 for t in ts) or any(b < a for a, b in zip(ts, ts[1:])):
        raise InputError("the t grid must be ascending and non-negative")
    sg = build_invariant_basis(g, cap=cap)
    moments = np.array(
        [float(sphere_moment(DotPolynomial(f.dims, SPHERE, {mono: 1}) * f)) for mono in sg.basis]
    )
    vec = np.zeros(len(sg.basis))
    for mono, coeff in g.terms.items():
        vec[sg.index(mono)] = float(coeff)
    mat = sg.as_float()
    values = []
    for t in ts:
        values.append(float(moments @ (expm(t * mat) @ vec)))
    limit = float(sphere_moment(f) * sphere_moment(g))
    slack = 1e-12 * max(1.0, abs(values[0]) if values else 1.0)
    monotone = all(b <= a + slack for a, b in zip(values, values[1:]))
    gap = abs(values[-1] - limit) if values else 0.0
    return CorrelationFlow(tuple(ts), tuple(values), limit, monotone, gap, slack)
