"""Ferromagnetic Gaussian spins: exact moments, positivity, Trotter splitting.

The model couples N spins in R^n through a symmetric positive-definite
matrix F with non-positive off-diagonal entries (an M-matrix).  That sign
structure is what makes the model ferromagnetic: both exp(-tF) and F^{-1}
are then entrywise non-negative, so the flow x -> exp(-tF) x maps the cone
of non-negative dot-product combinations into itself and all Isserlis
moments come out non-negative.

Expectations never touch the partition function: they are Isserlis sums
with covariance F^{-1} per vector component, so everything stays rational.

The generator decomposes as A = (flat Laplacian) - (drift grad Q . grad)
with Q = sum F_ij x_i.x_j / 2.  On the dot-product algebra the Laplacian
lowers total degree by 2 (so its exponential is a finite series) and the
drift preserves degree, which keeps every monomial inside a finite
A-invariant subspace; the Trotter comparison runs entirely inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import ratlin
from .algebra import (
    CONST_MONO,
    GAUSSIAN,
    DotPolynomial,
    FloatPolynomial,
    ModelDims,
    Mono,
    Pair,
    mono_div,
    mono_mul,
    to_float_poly,
)
from .errors import InputError, ViolationError
from .griffiths import GriffithsReport, HOLDS, VIOLATED
from .heat import _close_basis  # degree-filtered closure engine
from .numerics import expm
from .wick import vector_moment

DEFAULT_BASIS_CAP = 5000


@dataclass(frozen=True)
class FerroMatrix:
    """Symmetric positive-definite coupling matrix with offdiag <= 0."""

    entries: ratlin.Matrix

    @property
    def size(self) -> int:
        return len(self.entries)

    def as_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.entries])

    def to_dict(self) -> dict:
        return {
            "N": self.size,
            "entries": [[str(x) for x in row] for row in self.entries],
        }


def ferro_from_rows(rows: Sequence[Sequence[object]]) -> FerroMatrix:
    return FerroMatrix(ratlin.freeze(rows))


def ferro_from_dict(data: object) -> FerroMatrix:
    if not isinstance(data, dict) or "entries" not in data:
        raise InputError("matrix JSON must be an object with an 'entries' key")
    matrix = ferro_from_rows(data["entries"])
    if "N" in data and data["N"] != matrix.size:
        raise InputError(f"matrix says N={data['N']} but has {matrix.size} rows")
    return matrix


@dataclass(frozen=True)
class FerroValidation:
    symmetric: bool
    positive_definite: bool
    offdiag_nonpositive: bool

    @property
    def ok(self) -> bool:
        return self.symmetric and self.positive_definite and self.offdiag_nonpositive

    def failures(self) -> list[str]:
        out = []
        if not self.symmetric:
            out.append("matrix is not symmetric")
        if not self.positive_definite:
            out.append("matrix is not positive definite (some leading minor <= 0)")
        if not self.offdiag_nonpositive:
            out.append("some off-diagonal entry is positive (not ferromagnetic)")
        return out


def validate_ferro(f: FerroMatrix) -> FerroValidation:
    m = f.entries
    symmetric = ratlin.is_symmetric(m)
    pd = symmetric and ratlin.is_positive_definite(m)
    offdiag = all(
        m[i][j] <= 0 for i in range(len(m)) for j in range(len(m)) if i != j
    )
    return FerroValidation(symmetric, pd, offdiag)


def require_valid(f: FerroMatrix) -> None:
    check = validate_ferro(f)
    if not check.ok:
        raise InputError("invalid coupling matrix: " + "; ".join(check.failures()))


def covariance(f: FerroMatrix) -> ratlin.Matrix:
    """Exact F^{-1}; entrywise non-negative for every valid coupling matrix."""
    require_valid(f)
    inv = ratlin.invert(f.entries)
    negative = [
        (i, j) for i in range(len(inv)) for j in range(len(inv)) if inv[i][j] < 0
    ]
    if negative:
        # would contradict the M-matrix inverse-positivity fact
        raise ViolationError(f"covariance has negative entries at {negative}")
    return inv


def gaussian_moment(p: DotPolynomial, cov: ratlin.Matrix) -> Fraction:
    """Exact E[p] under the centred Gaussian with covariance cov (x) I_n."""
    if p.mode != GAUSSIAN:
        raise InputError("gaussian_moment acts on gaussian-mode polynomials")
    if len(cov) != p.dims.sites:
        raise InputError(f"covariance is {len(cov)}x{len(cov)} but N={p.dims.sites}")
    total = Fraction(0)
    for mono, coeff in p.terms.items():
        factors = []
        for (i, j), power in mono:
            factors.extend([(i - 1, j - 1)] * power)
        total += coeff * vector_moment(factors, cov, p.dims.n)
    return total


def check_gaussian_griffiths(
    f: DotPolynomial,
    g: DotPolynomial,
    coupling: FerroMatrix,
) -> GriffithsReport:
    """Both Griffiths inequalities under the ferromagnetic Gaussian measure."""
    if f.dims != g.dims or f.mode != g.mode:
        raise InputError("f and g need identical dims and mode")
    if f.mode != GAUSSIAN:
        raise InputError("check_gaussian_griffiths expects gaussian-mode input")
    for name, p in (("f", f), ("g", g)):
        bad = p.negative_terms()
        if bad:
            raise InputError(f"{name} is not in the cone; negative coefficients {bad[:5]}")
    cov = covariance(coupling)
    ef = gaussian_moment(f, cov)
    eg = gaussian_moment(g, cov)
    efg = gaussian_moment(f * g, cov)
    gap = efg - ef * eg
    verdict = HOLDS if (gap >= 0 and ef >= 0 and eg >= 0) else VIOLATED
    model = f"gaussian n={f.dims.n} N={f.dims.sites} (cone checked at representation level)"
    return GriffithsReport(model, ef, eg, efg, gap, verdict)


def matrix_semigroup(f: FerroMatrix, t: float) -> np.ndarray:
    """exp(-tF) in floats; entrywise non-negative up to roundoff."""
    if t < 0:
        raise InputError(f"matrix semigroup needs t >= 0, got {t}")
    return expm(-t * f.as_float())


def semigroup_approximant(f: FerroMatrix, t: float, m: int) -> np.ndarray:
    """(I - tF/m)^m, the Euler product converging to exp(-tF)."""
    if m < 1:
        raise InputError(f"approximant power must be >= 1, got {m}")
    size = f.size
    return np.linalg.matrix_power(np.eye(size) - (t / m) * f.as_float(), m)


# -- generator pieces ---------------------------------------------------------

def _pair(i: int, j: int) -> Pair:
    return (i, j) if i <= j else (j, i)


def _add(table: dict, mono: Mono, coeff) -> None:
    merged = table.get(mono, 0) + coeff
    if merged:
        table[mono] = merged
    elif mono in table:
        del table[mono]


def _grad_contract(p: Pair, q: Pair) -> dict[Pair, int]:
    """sum_i grad_i v_p . grad_i v_q as integer combinations of pair variables.

    grad_i (x_a . x_b) = [i == a] x_b + [i == b] x_a, which makes a diagonal
    v_aa contribute its factor of 2 automatically when (a, a) repeats in the
    enumeration below.
    """
    a, b = p
    c, d = q
    out: dict[Pair, int] = {}
    for left, right in ((a, b), (b, a)):
        for cleft, cright in ((c, d), (d, c)):
            if left == cleft:
                key = _pair(right, cright)
                out[key] = out.get(key, 0) + 1
    return out


def _flat_laplacian_mono(mono: Mono, dims: ModelDims) -> dict[Mono, Fraction]:
    """Flat Laplacian over all sites; lowers total degree by exactly 2.

    Delta v_ii = 2n and Delta v_ij = 0 for i != j; the second-order Leibniz
    terms go through :func:`_grad_contract`.
    """
    n = dims.n
    out: dict[Mono, Fraction] = {}
    pairs = list(mono)
    for (a, b), e in pairs:
        if a == b:
            _add(out, mono_div(mono, (a, b)), Fraction(2 * n * e))
    for idx1, (p, e1) in enumerate(pairs):
        if e1 >= 2:
            base = mono_div(mono, p, 2)
            for bridge_pair, w in _grad_contract(p, p).items():
                _add(out, mono_mul(base, ((bridge_pair, 1),)), Fraction(e1 * (e1 - 1) * w))
        for q, e2 in pairs[idx1 + 1:]:
            base = mono_div(mono_div(mono, p), q)
            for bridge_pair, w in _grad_contract(p, q).items():
                _add(out, mono_mul(base, ((bridge_pair, 1),)), Fraction(2 * e1 * e2 * w))
    return out


def gaussian_laplacian(p: DotPolynomial) -> DotPolynomial:
    """Flat Laplacian sum over sites on the gaussian dot-product algebra."""
    if p.mode != GAUSSIAN:
        raise InputError("gaussian_laplacian acts on gaussian-mode polynomials")
    table: dict[Mono, Fraction] = {}
    for mono, coeff in p.terms.items():
        for out_mono, weight in _flat_laplacian_mono(mono, p.dims).items():
            _add(table, out_mono, coeff * weight)
    return DotPolynomial._raw(p.dims, p.mode, table)


def _drift_mono(mono: Mono, f: FerroMatrix) -> dict[Mono, Fraction]:
    """(grad Q . grad) on a monomial; first order, so plain Leibniz.

    On a single pair: (grad Q . grad) v_kl = sum_j F_kj v_jl + sum_j F_lj v_jk.
    """
    entries = f.entries
    out: dict[Mono, Fraction] = {}
    for (k, l), p in mono:
        stripped = mono_div(mono, (k, l))
        for (anchor, other) in ((k, l), (l, k)):
            for j in range(1, f.size + 1):
                coeff = entries[anchor - 1][j - 1]
                if coeff:
                    bridge: Mono = ((_pair(j, other), 1),)
                    _add(out, mono_mul(stripped, bridge), p * coeff)
    return out


def drift(p: DotPolynomial, f: FerroMatrix) -> DotPolynomial:
    """The vector field grad Q . grad applied exactly."""
    if p.mode != GAUSSIAN:
        raise InputError("drift acts on gaussian-mode polynomials")
    if f.size != p.dims.sites:
        raise InputError(f"coupling is {f.size}x{f.size} but N={p.dims.sites}")
    table: dict[Mono, Fraction] = {}
    for mono, coeff in p.terms.items():
        for out_mono, weight in _drift_mono(mono, f).items():
            _add(table, out_mono, coeff * weight)
    return DotPolynomial._raw(p.dims, p.mode, table)


def ou_generator(p: DotPolynomial, f: FerroMatrix) -> DotPolynomial:
    """A = Delta - grad Q . grad, the Ornstein-Uhlenbeck generator."""
    return gaussian_laplacian(p) - drift(p, f)


# -- semigroup factors --------------------------------------------------------

def heat_apply(p: FloatPolynomial | DotPolynomial, s: float) -> FloatPolynomial:
    """exp(s Delta) as a finite series: Delta lowers total degree by 2."""
    fp = to_float_poly(p) if isinstance(p, DotPolynomial) else p
    if s < 0:
        raise InputError(f"heat factor needs s >= 0, got {s}")
    dims = fp.dims
    result = dict(fp.terms)
    current = dict(fp.terms)
    k = 0
    while current:
        k += 1
        image: dict[Mono, float] = {}
        for mono, coeff in current.items():
            for out_mono, weight in _flat_laplacian_mono(mono, dims).items():
                image[out_mono] = image.get(out_mono, 0.0) + coeff * float(weight)
        current = {m: c * s / k for m, c in image.items() if c}
        for mono, coeff in current.items():
            result[mono] = result.get(mono, 0.0) + coeff
    return FloatPolynomial(dims, GAUSSIAN, {m: c for m, c in result.items() if c != 0.0})


def flow_map(
    p: FloatPolynomial | DotPolynomial,
    f: FerroMatrix,
    t: float,
) -> FloatPolynomial:
    """Substitute x_k -> sum_a exp(-tF)_{ka} x_a, lifted to pair variables.

    The substitution matrix is entrywise non-negative for valid couplings,
    so the lifted map preserves the cone coefficientwise.
    """
    fp = to_float_poly(p) if isinstance(p, DotPolynomial) else p
    s_matrix = matrix_semigroup(f, t)
    return _substitute(fp, s_matrix)


def _substitute(fp: FloatPolynomial, s_matrix: np.ndarray) -> FloatPolynomial:
    size = s_matrix.shape[0]
    lifted_cache: dict[Pair, dict[Pair, float]] = {}

    def lifted(pair: Pair) -> dict[Pair, float]:
        found = lifted_cache.get(pair)
        if found is not None:
            return found
        k, l = pair
        out: dict[Pair, float] = {}
        for a in range(1, size + 1):
            ska = float(s_matrix[k - 1][a - 1])
            if ska == 0.0:
                continue
            for b in range(1, size + 1):
                slb = float(s_matrix[l - 1][b - 1])
                if slb == 0.0:
                    continue
                key = _pair(a, b)
                out[key] = out.get(key, 0.0) + ska * slb
        lifted_cache[pair] = out
        return out

    total: dict[Mono, float] = {}
    for mono, coeff in fp.terms.items():
        expanded: dict[Mono, float] = {CONST_MONO: coeff}
        for pair, power in mono:
            image = lifted(pair)
            for _ in range(power):
                nxt: dict[Mono, float] = {}
                for part, c in expanded.items():
                    for new_pair, w in image.items():
                        key = mono_mul(part, ((new_pair, 1),))
                        nxt[key] = nxt.get(key, 0.0) + c * w
                expanded = nxt
        for m, c in expanded.items():
            total[m] = total.get(m, 0.0) + c
    return FloatPolynomial(fp.dims, GAUSSIAN, {m: c for m, c in total.items() if c != 0.0})


# -- Trotter comparison -------------------------------------------------------

@dataclass(frozen=True)
class OUSemigroup:
    """exp(tA) restricted to the A-invariant basis of a seed polynomial."""

    dims: ModelDims
    basis: tuple[Mono, ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def as_float(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix])

    def evolve(self, p: DotPolynomial, t: float) -> FloatPolynomial:
        index = {mono: k for k, mono in enumerate(self.basis)}
        vec = np.zeros(len(self.basis))
        for mono, coeff in p.terms.items():
            vec[index[mono]] = float(coeff)
        out = expm(t * self.as_float()) @ vec
        return FloatPolynomial(
            self.dims, GAUSSIAN,
            {m: float(v) for m, v in zip(self.basis, out) if v != 0.0},
        )


def ou_invariant_basis(
    p: DotPolynomial,
    f: FerroMatrix,
    cap: int = DEFAULT_BASIS_CAP,
) -> OUSemigroup:
    require_valid(f)
    if f.size != p.dims.sites:
        raise InputError(f"coupling is {f.size}x{f.size} but N={p.dims.sites}")

    def generator(mono: Mono, dims: ModelDims) -> dict[Mono, Fraction]:
        image = dict(_flat_laplacian_mono(mono, dims))
        for out_mono, weight in _drift_mono(mono, f).items():
            _add(image, out_mono, -weight)
        return image

    basis, matrix = _close_basis(p.terms.keys(), p.dims, generator, cap)
    return OUSemigroup(p.dims, basis, matrix)


@dataclass(frozen=True)
class TrotterPoint:
    m: int
    max_error: float
    min_intermediate_coeff: float


@dataclass(frozen=True)
class TrotterReport:
    points: tuple[TrotterPoint, ...]
    reference: FloatPolynomial
    cone_preserved: bool  # every factor applied to cone input stayed coneish


def trotter_compare(
    p: DotPolynomial,
    f: FerroMatrix,
    t: float,
    ms: Sequence[int],
    cap: int = DEFAULT_BASIS_CAP,
) -> TrotterReport:
    """(exp(t Delta / m) exp(-t drift / m))^m p against exp(tA) p.

    Reports the coefficientwise max error per m, and tracks the most
    negative coefficient seen after every Trotter factor (cone monitoring
    for cone inputs).
    """
    semi = ou_invariant_basis(p, f, cap)
    reference = semi.evolve(p, t)
    track_cone = p.is_cone()
    points = []
    for m in ms:
        if m < 1:
            raise InputError(f"Trotter power must be >= 1, got {m}")
        step = t / m
        step_matrix = matrix_semigroup(f, step)
        state = to_float_poly(p)
        worst = 0.0
        for _ in range(m):
            state = _substitute(state, step_matrix)
            worst = min(worst, state.min_coefficient())
            state = heat_apply(state, step)
            worst = min(worst, state.min_coefficient())
        keys = set(state.terms) | set(reference.terms)
        err = max(abs(state.coefficient(k) - reference.coefficient(k)) for k in keys)
        points.append(TrotterPoint(m, float(err), float(worst)))
    cone_ok = (not track_cone) or all(pt.min_intermediate_coeff >= -1e-12 for pt in points)
    return TrotterReport(tuple(points), reference, cone_ok)


def equilibrium_moment(p: DotPolynomial, f: FerroMatrix) -> Fraction:
    """The t -> infinity limit of exp(tA) p: the Gaussian mean of p."""
    return gaussian_moment(p, covariance(f))


def random_ferro(size: int, seed: int) -> FerroMatrix:
    """Random valid coupling: offdiag uniform-ish in [-1, 0], diagonal dominant."""
    import random as _random

    rng = _random.Random(seed)
    entries = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            value = -Fraction(rng.randrange(0, 10), 9)
            entries[i][j] = entries[j][i] = value
    for i in range(size):
        entries[i][i] = 1 + sum(abs(entries[i][j]) for j in range(size) if j != i)
    return FerroMatrix(ratlin.freeze(entries))
