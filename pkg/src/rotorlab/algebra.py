"""Exact sparse algebra of spin dot-product polynomials.

A monomial is a finite table of site pairs with positive integer exponents,
standing for ``prod (sigma_i . sigma_j)^p`` over unit spins (sphere mode,
strictly i < j, since sigma_i . sigma_i == 1 is never stored) or for
``prod (x_i . x_j)^p`` over R^n-valued spins (gaussian mode, i <= j,
diagonals allowed).  Coefficients are :class:`fractions.Fraction`, so ring
arithmetic is exact end to end.

The pair variables are treated as free commuting symbols: algebraic
relations among actual dot products (Gram identities, which exist whenever
the site count exceeds n) are intentionally not quotiented out.  Every
expectation functional built on top of this algebra respects those
relations automatically, which the test suite checks.

Monomials are stored as tuples ``(((i, j), p), ...)`` sorted by pair; that
sort order is also the canonical term order used for serialization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import InputError

SPHERE = "sphere"
GAUSSIAN = "gaussian"
MODES = (SPHERE, GAUSSIAN)

Pair = tuple[int, int]
Mono = tuple[tuple[Pair, int], ...]
Coeff = Union[Fraction, int, str]

CONST_MONO: Mono = ()


def frac(value: Coeff) -> Fraction:
    """Coerce to Fraction, mapping parse failures to :class:`InputError`."""
    if isinstance(value, Fraction):
        return value
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError, ArithmeticError) as exc:
        raise InputError(f"not a rational number: {value!r}") from exc


@dataclass(frozen=True)
class ModelDims:
    """Ambient dimension n and the number of sites.

    Gaussian spins make sense for any n >= 1; unit spins need n >= 2, which
    sphere-mode polynomial construction enforces separately.
    """

    n: int
    sites: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise InputError(f"ambient dimension must be an integer >= 1, got {self.n!r}")
        if not isinstance(self.sites, int) or self.sites < 1:
            raise InputError(f"site count must be an integer >= 1, got {self.sites!r}")


def validate_pair(dims: ModelDims, mode: str, i: int, j: int) -> Pair:
    """Normalize a site pair to (min, max) and enforce the mode's constraints."""
    if not (isinstance(i, int) and isinstance(j, int)):
        raise InputError(f"site indices must be integers, got ({i!r}, {j!r})")
    if not (1 <= i <= dims.sites and 1 <= j <= dims.sites):
        raise InputError(f"site pair ({i}, {j}) out of range 1..{dims.sites}")
    if i > j:
        i, j = j, i
    if i == j and mode == SPHERE:
        raise InputError(
            f"sphere monomials may not pair site {i} with itself (sigma.sigma == 1)"
        )
    return (i, j)


def make_mono(
    dims: ModelDims,
    mode: str,
    powers: Mapping[Pair, int] | Iterable[tuple[Pair, int]],
) -> Mono:
    """Build a canonical monomial: pairs normalized, merged, zero powers dropped."""
    items = powers.items() if isinstance(powers, Mapping) else powers
    table: dict[Pair, int] = {}
    for (i, j), p in items:
        if not isinstance(p, int):
            raise InputError(f"exponent must be an integer, got {p!r}")
        if p < 0:
            raise InputError(f"negative exponent {p} on pair ({i}, {j})")
        if p == 0:
            continue
        pair = validate_pair(dims, mode, i, j)
        table[pair] = table.get(pair, 0) + p
    return tuple(sorted(table.items()))


def mono_mul(a: Mono, b: Mono) -> Mono:
    """Product of two monomials (exponent addition)."""
    if not a:
        return b
    if not b:
        return a
    table = dict(a)
    for pair, p in b:
        table[pair] = table.get(pair, 0) + p
    return tuple(sorted(table.items()))


def mono_div(m: Mono, pair: Pair, k: int = 1) -> Mono:
    """Divide a monomial by ``pair^k``; the factor must be present."""
    table = dict(m)
    have = table.get(pair, 0)
    if have < k:
        raise ValueError(f"monomial has {pair}^{have}, cannot remove ^{k}")
    if have == k:
        del table[pair]
    else:
        table[pair] = have - k
    return tuple(sorted(table.items()))


def mono_degree(m: Mono) -> int:
    """Total degree: the number of dot-product factors counted with multiplicity."""
    return sum(p for _, p in m)


def site_degrees(m: Mono, dims: ModelDims) -> tuple[int, ...]:
    """Per-site degree d_i; a diagonal pair (i, i) contributes 2 per exponent."""
    degs = [0] * dims.sites
    for (i, j), p in m:
        degs[i - 1] += p
        degs[j - 1] += p  # i == j lands here twice, as it must
    return tuple(degs)


def mono_sites(m: Mono) -> tuple[int, ...]:
    """Sorted site labels that appear in the monomial."""
    seen: set[int] = set()
    for (i, j), _ in m:
        seen.add(i)
        seen.add(j)
    return tuple(sorted(seen))


def renumber_mono(m: Mono) -> Mono:
    """Compact the sites of a monomial to 1..k, preserving their order.

    Expectations are invariant under site relabeling, so this is the memo key
    used by the moment engines.
    """
    relabel = {s: k + 1 for k, s in enumerate(mono_sites(m))}
    return tuple(
        sorted((((relabel[i], relabel[j]), p) for (i, j), p in m))
    )


class DotPolynomial:
    """Finite rational linear combination of dot-product monomials.

    Instances are canonical on construction (duplicate monomials merged, zero
    coefficients dropped) and treated as immutable; no method mutates an
    existing polynomial, so values are safe to share across threads.
    """

    __slots__ = ("dims", "mode", "terms")

    def __init__(
        self,
        dims: ModelDims,
        mode: str = SPHERE,
        terms: Mapping[Mono, Coeff] | Iterable[tuple[object, Coeff]] = (),
    ):
        if mode not in MODES:
            raise InputError(f"unknown mode {mode!r}; expected one of {MODES}")
        if mode == SPHERE and dims.n < 2:
            raise InputError("sphere-mode polynomials need ambient dimension n >= 2")
        items = terms.items() if isinstance(terms, Mapping) else terms
        table: dict[Mono, Fraction] = {}
        for raw_mono, raw_coeff in items:
            mono = make_mono(dims, mode, raw_mono)
            coeff = table.get(mono, Fraction(0)) + frac(raw_coeff)
            if coeff:
                table[mono] = coeff
            elif mono in table:
                del table[mono]
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "terms", table)

    @classmethod
    def _raw(cls, dims: ModelDims, mode: str, table: dict[Mono, Fraction]) -> "DotPolynomial":
        """Wrap an already-canonical term table without re-validating it."""
        out = object.__new__(cls)
        object.__setattr__(out, "dims", dims)
        object.__setattr__(out, "mode", mode)
        object.__setattr__(out, "terms", table)
        return out

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("DotPolynomial is immutable")

    # -- ring structure ----------------------------------------------------

    def _require_compatible(self, other: "DotPolynomial") -> None:
        if self.dims != other.dims or self.mode != other.mode:
            raise InputError(
                f"incompatible polynomials: ({self.dims}, {self.mode}) vs "
                f"({other.dims}, {other.mode})"
            )

    def __add__(self, other: object) -> "DotPolynomial":
        if isinstance(other, (int, Fraction)):
            other = constant(self.dims, other, self.mode)
        if not isinstance(other, DotPolynomial):
            return NotImplemented
        self._require_compatible(other)
        table = dict(self.terms)
        for mono, coeff in other.terms.items():
            merged = table.get(mono, Fraction(0)) + coeff
            if merged:
                table[mono] = merged
            elif mono in table:
                del table[mono]
        return DotPolynomial._raw(self.dims, self.mode, table)

    __radd__ = __add__

    def __neg__(self) -> "DotPolynomial":
        return DotPolynomial._raw(
            self.dims, self.mode, {m: -c for m, c in self.terms.items()}
        )

    def __sub__(self, other: object) -> "DotPolynomial":
        if isinstance(other, (int, Fraction)):
            other = constant(self.dims, other, self.mode)
        if not isinstance(other, DotPolynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: object) -> "DotPolynomial":
        return (-self) + other

    def __mul__(self, other: object) -> "DotPolynomial":
        if isinstance(other, (int, Fraction)):
            scalar = frac(other)
            if not scalar:
                return DotPolynomial._raw(self.dims, self.mode, {})
            return DotPolynomial._raw(
                self.dims, self.mode, {m: c * scalar for m, c in self.terms.items()}
            )
        if not isinstance(other, DotPolynomial):
            return NotImplemented
        self._require_compatible(other)
        table: dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = mono_mul(m1, m2)
                merged = table.get(mono, Fraction(0)) + c1 * c2
                if merged:
                    table[mono] = merged
                elif mono in table:
                    del table[mono]
        return DotPolynomial._raw(self.dims, self.mode, table)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "DotPolynomial":
        if not isinstance(exponent, int) or exponent < 0:
            raise InputError(f"polynomial powers need integer exponents >= 0, got {exponent!r}")
        result = one(self.dims, self.mode)
        base = self
        e = exponent
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = constant(self.dims, other, self.mode)
        return (
            isinstance(other, DotPolynomial)
            and self.dims == other.dims
            and self.mode == other.mode
            and self.terms == other.terms
        )

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- queries -------------------------------------------------------------

    def sorted_terms(self) -> Iterator[tuple[Mono, Fraction]]:
        """Terms in the canonical (lexicographic-on-pair-list) order."""
        for mono in sorted(self.terms):
            yield mono, self.terms[mono]

    def is_cone(self) -> bool:
        """True iff every coefficient is >= 0 (formal, representation-level)."""
        return all(c >= 0 for c in self.terms.values())

    def negative_terms(self) -> list[tuple[Mono, Fraction]]:
        return [(m, c) for m, c in self.sorted_terms() if c < 0]

    def constant_term(self) -> Fraction:
        return self.terms.get(CONST_MONO, Fraction(0))

    def is_constant(self) -> bool:
        return all(m == CONST_MONO for m in self.terms)

    def coefficient_sum(self) -> Fraction:
        return sum(self.terms.values(), Fraction(0))

    def total_degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def relabel(self, permutation: Sequence[int]) -> "DotPolynomial":
        """Apply a site permutation; ``permutation[i-1]`` is the image of site i."""
        if sorted(permutation) != list(range(1, self.dims.sites + 1)):
            raise InputError(
                f"not a permutation of 1..{self.dims.sites}: {list(permutation)!r}"
            )
        table: dict[Mono, Fraction] = {}
        for mono, coeff in self.terms.items():
            moved = tuple(
                sorted(
                    (tuple(sorted((permutation[i - 1], permutation[j - 1]))), p)
                    for (i, j), p in mono
                )
            )
            table[moved] = coeff
        return DotPolynomial._raw(self.dims, self.mode, table)

    def __repr__(self) -> str:
        sym = "u" if self.mode == SPHERE else "v"
        if not self.terms:
            return "0"
        bits = []
        for mono, coeff in self.sorted_terms():
            factors = "".join(
                f"{sym}[{i},{j}]" + (f"^{p}" if p > 1 else "") for (i, j), p in mono
            )
            bits.append(f"{coeff}" + (f"*{factors}" if factors else ""))
        return " + ".join(bits)


def zero(dims: ModelDims, mode: str = SPHERE) -> DotPolynomial:
    return DotPolynomial(dims, mode)


def one(dims: ModelDims, mode: str = SPHERE) -> DotPolynomial:
    return DotPolynomial(dims, mode, {CONST_MONO: 1})


def constant(dims: ModelDims, value: Coeff, mode: str = SPHERE) -> DotPolynomial:
    return DotPolynomial(dims, mode, {CONST_MONO: value})


def variable(dims: ModelDims, i: int, j: int, power: int = 1, mode: str = SPHERE) -> DotPolynomial:
    """The single monomial ``(sigma_i . sigma_j)^power`` with coefficient 1."""
    return DotPolynomial(dims, mode, {(((i, j), power),): 1})


@dataclass
class FloatPolynomial:
    """A dot-product polynomial with floating-point coefficients.

    Produced by the semigroup operations, where coefficients pass through a
    matrix exponential and exactness is deliberately given up.
    """

    dims: ModelDims
    mode: str
    terms: dict[Mono, float]

    def min_coefficient(self) -> float:
        return min(self.terms.values(), default=0.0)

    def sorted_terms(self) -> Iterator[tuple[Mono, float]]:
        for mono in sorted(self.terms):
            yield mono, self.terms[mono]

    def coefficient(self, mono: Mono) -> float:
        return self.terms.get(mono, 0.0)


def to_float_poly(p: DotPolynomial) -> FloatPolynomial:
    return FloatPolynomial(p.dims, p.mode, {m: float(c) for m, c in p.terms.items()})


# -- serialization ------------------------------------------------------------

def polynomial_to_dict(p: DotPolynomial) -> dict:
    """Canonical JSON-ready form; terms sorted by monomial order."""
    return {
        "mode": p.mode,
        "n": p.dims.n,
        "N": p.dims.sites,
        "terms": [
            {
                "coeff": str(coeff),
                "powers": [{"i": i, "j": j, "p": power} for (i, j), power in mono],
            }
            for mono, coeff in p.sorted_terms()
        ],
    }


def polynomial_from_dict(data: object) -> DotPolynomial:
    if not isinstance(data, dict):
        raise InputError("polynomial JSON must be an object")
    try:
        mode = data["mode"]
        n = data["n"]
        sites = data["N"]
        raw_terms = data["terms"]
    except KeyError as exc:
        raise InputError(f"polynomial JSON missing key {exc}") from exc
    dims = ModelDims(n, sites)
    items = []
    if not isinstance(raw_terms, list):
        raise InputError("'terms' must be a list")
    for entry in raw_terms:
        try:
            coeff = entry["coeff"]
            powers = [((q["i"], q["j"]), q["p"]) for q in entry["powers"]]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed term entry {entry!r}") from exc
        items.append((powers, coeff))
    return DotPolynomial(dims, mode, items)


def save_polynomial(p: DotPolynomial, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(polynomial_to_dict(p), fh, indent=2)
        fh.write("\n")


def load_polynomial(path: str) -> DotPolynomial:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read polynomial file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {path}: {exc}") from exc
    return polynomial_from_dict(data)
