"""Sphere moment engine: Wick sums, elimination, oracle equivalence."""

import itertools
import math
import random
from fractions import Fraction

import pytest
from scipy.integrate import quad

from rotorlab.algebra import (
    SPHERE,
    DotPolynomial,
    ModelDims,
    ModelDims as MD,
    constant,
    one,
    variable,
)
from rotorlab.errors import InputError
from rotorlab.moments import (
    eliminate_site,
    interacting_moment,
    radial_moment,
    sphere_moment,
    sphere_moment_oracle,
)
from rotorlab.wick import double_factorial, pairings, wick_sum


def all_monomials(dims, max_degree):
    """Every canonical monomial over dims with total degree <= max_degree."""
    pairs = [
        (i, j) for i in range(1, dims.sites + 1) for j in range(i + 1, dims.sites + 1)
    ]
    for total in range(max_degree + 1):
        for exps in itertools.product(range(total + 1), repeat=len(pairs)):
            if sum(exps) == total:
                yield tuple((pair, e) for pair, e in zip(pairs, exps) if e)


def test_pairings_counts():
    for labels in ([1, 2], [1, 2, 3, 4], list(range(6)), list(range(8))):
        matchings = list(pairings(labels))
        assert len(matchings) == double_factorial(len(labels) - 1)
        # each matching covers every label exactly once
        for m in matchings:
            flat = sorted(x for pair in m for x in pair)
            assert flat == sorted(labels)
    assert list(pairings([1, 2, 3])) == []


def test_wick_sum_examples():
    assert wick_sum(["a", "a"], lambda x, y: 1) == 1
    assert wick_sum(["a"] * 4, lambda x, y: 1) == 3
    assert wick_sum(["s1", "s2", "s3"], lambda x, y: 1) == 0


def test_wick_sum_polynomial_valued():
    dims = MD(3, 3)
    u = {frozenset(p): variable(dims, *p) for p in [(1, 2), (1, 3), (2, 3)]}

    def inner(a, b):
        return one(dims) if a == b else u[frozenset((a, b))]

    got = wick_sum([2, 2, 3, 3], inner, one=one(dims))
    assert got == one(dims) + 2 * variable(dims, 2, 3) ** 2


def gaussian_radial_moment_quadrature(n, d):
    """Independent oracle: E|x|^d for x ~ N(0, I_n) by 1-d radial quadrature."""
    num = quad(lambda r: r ** (d + n - 1) * math.exp(-r * r / 2), 0, math.inf)[0]
    den = quad(lambda r: r ** (n - 1) * math.exp(-r * r / 2), 0, math.inf)[0]
    return num / den


@pytest.mark.parametrize("n,d", [(3, 2), (3, 4), (2, 6), (5, 8), (4, 0)])
def test_radial_moment_against_quadrature(n, d):
    exact = radial_moment(n, d)
    approx = gaussian_radial_moment_quadrature(n, d)
    assert math.isclose(float(exact), approx, rel_tol=1e-10)


def test_radial_moment_values():
    assert radial_moment(3, 2) == 3
    assert radial_moment(3, 4) == 15
    assert radial_moment(7, 0) == 1
    assert radial_moment(2, 6) == 2 * 4 * 6
    with pytest.raises(InputError):
        radial_moment(3, 3)


def test_radial_moment_recurrence():
    for n in (2, 3, 5):
        for d in (0, 2, 4, 6):
            assert radial_moment(n, d + 2) == (n + d) * radial_moment(n, d)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_eliminate_site_examples(n):
    dims = MD(n, 3)
    # symmetry: E (sigma . e)^2 = 1/n
    got = eliminate_site(variable(dims, 1, 2, 2), 2)
    assert got == constant(dims, Fraction(1, n))
    # single pairing over mu_n(2) = n
    got = eliminate_site(variable(dims, 1, 3) * variable(dims, 2, 3), 3)
    assert got == Fraction(1, n) * variable(dims, 1, 2)
    # Wick over partner multiset (2, 2, 3, 3)
    got = eliminate_site(variable(dims, 1, 2, 2) * variable(dims, 1, 3, 2), 1)
    expected = Fraction(1, n * (n + 2)) * (one(dims) + 2 * variable(dims, 2, 3, 2))
    assert got == expected


def test_eliminate_site_input_checks():
    dims = MD(3, 2)
    with pytest.raises(InputError):
        eliminate_site(variable(dims, 1, 2), 5)
    from rotorlab.algebra import GAUSSIAN

    with pytest.raises(InputError):
        eliminate_site(variable(dims, 1, 2, mode=GAUSSIAN), 1)


def circle_moment_quadrature(expr):
    """Oracle for n=2: direct angular integral over independent circle spins."""
    val = quad(lambda t: expr(math.cos(t)), 0, 2 * math.pi)[0] / (2 * math.pi)
    return val


@pytest.mark.parametrize("n", [2, 3, 4, 5, 8])
def test_sphere_moment_closed_forms(n):
    dims = MD(n, 3)
    u12 = variable(dims, 1, 2)
    assert sphere_moment(u12 ** 2) == Fraction(1, n)
    assert sphere_moment(u12 ** 4) == Fraction(3, n * (n + 2))
    tri = u12 * variable(dims, 2, 3) * variable(dims, 1, 3)
    assert sphere_moment(tri) == Fraction(1, n * n)
    assert sphere_moment(u12 ** 2 * variable(dims, 1, 3) ** 2) == Fraction(1, n * n)


def test_sphere_moment_circle_cross_check():
    # independent circle integral: E cos^2 = 1/2, E cos^4 = 3/8
    assert math.isclose(circle_moment_quadrature(lambda c: c * c), 0.5, abs_tol=1e-12)
    assert math.isclose(circle_moment_quadrature(lambda c: c ** 4), 0.375, abs_tol=1e-12)
    dims = MD(2, 2)
    assert sphere_moment(variable(dims, 1, 2, 2)) == Fraction(1, 2)
    assert sphere_moment(variable(dims, 1, 2, 4)) == Fraction(3, 8)


def test_sphere_moment_parity():
    dims = MD(3, 3)
    assert sphere_moment(variable(dims, 1, 2)) == 0
    assert sphere_moment(variable(dims, 1, 2) * variable(dims, 2, 3)) == 0
    assert sphere_moment(variable(dims, 1, 2, 3)) == 0


def test_elimination_order_independence():
    rng = random.Random(11)
    dims = MD(3, 4)
    pairs = [(i, j) for i in range(1, 5) for j in range(i + 1, 5)]
    for _ in range(8):
        powers = {}
        for _ in range(rng.randrange(1, 6)):
            pair = rng.choice(pairs)
            powers[pair] = powers.get(pair, 0) + 1
        p = DotPolynomial(dims, SPHERE, [(tuple(powers.items()), Fraction(1))])
        results = set()
        for order in itertools.permutations(range(1, 5)):
            q = p
            for site in order:
                q = eliminate_site(q, site)
            assert q.is_constant()
            results.add(q.constant_term())
        assert len(results) == 1
        assert results == {sphere_moment(p)}


def test_relabel_invariance():
    rng = random.Random(13)
    dims = MD(3, 4)
    from test_algebra import random_poly

    for _ in range(8):
        p = random_poly(dims, SPHERE, rng, terms=3, budget=4)
        for perm in ([2, 1, 4, 3], [4, 3, 2, 1], [2, 3, 4, 1]):
            assert sphere_moment(p.relabel(perm)) == sphere_moment(p)


@pytest.mark.parametrize("n", [2, 3])
def test_oracle_matches_elimination_small(n):
    dims = MD(n, 3)
    for mono in all_monomials(dims, 4):
        p = DotPolynomial(dims, SPHERE, [(mono, Fraction(1))])
        assert sphere_moment_oracle(mono, dims) == sphere_moment(p), mono


def test_oracle_examples():
    dims = MD(3, 3)
    m = next(iter(variable(dims, 1, 2, 2).terms))
    assert sphere_moment_oracle(m, dims) == Fraction(1, 3)
    tri = variable(dims, 1, 2) * variable(dims, 2, 3) * variable(dims, 1, 3)
    assert sphere_moment_oracle(next(iter(tri.terms)), dims) == Fraction(1, 9)
    assert sphere_moment_oracle(next(iter(variable(dims, 1, 2).terms)), dims) == 0


def test_gram_relation_consistency():
    # det Gram(s1, s2, s3) vanishes identically for three unit vectors in the
    # plane; its expectation must be exactly zero term by term.
    dims = MD(2, 3)
    u12, u13, u23 = (variable(dims, *p) for p in [(1, 2), (1, 3), (2, 3)])
    gram = one(dims) + 2 * u12 * u13 * u23 - u12 ** 2 - u13 ** 2 - u23 ** 2
    assert sphere_moment(gram) == 0


def test_griffiths_first_randomized():
    rng = random.Random(17)
    from test_algebra import random_poly

    for n in (2, 3, 5):
        dims = MD(n, 4)
        for _ in range(10):
            p = random_poly(dims, SPHERE, rng, terms=3, budget=4, signed=False)
            assert sphere_moment(p) >= 0


def test_interacting_free_case():
    dims = MD(3, 2)
    p = variable(dims, 1, 2, 2)
    result = interacting_moment(p, {}, order=5)
    assert result.value == sphere_moment(p)
    assert result.tail_gap == 0


def test_interacting_partition_lower_bound():
    dims = MD(3, 2)
    result = interacting_moment(one(dims), {(1, 2): Fraction(1, 2)}, order=6)
    assert result.partition >= 1
    assert result.value == 1  # E_J[1] is exactly 1 at any truncation order


def test_interacting_odd_moment_positive():
    dims = MD(3, 2)
    result = interacting_moment(variable(dims, 1, 2), {(1, 2): Fraction(1, 10)}, order=6)
    assert result.value > 0
    # manual series: sum over odd k of J^k/k! E[u^(k+1)]
    J = Fraction(1, 10)
    expect_num = sum(
        J ** k / math.factorial(k) * sphere_moment(variable(dims, 1, 2, k + 1))
        for k in range(7)
    )
    assert result.numerator == expect_num


def test_interacting_rejects_negative_coupling():
    dims = MD(3, 2)
    with pytest.raises(InputError):
        interacting_moment(one(dims), {(1, 2): Fraction(-1, 2)})


def test_interacting_rejects_non_cone():
    dims = MD(3, 2)
    with pytest.raises(InputError):
        interacting_moment(-one(dims), {})
