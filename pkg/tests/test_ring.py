import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from oracles import as_lists, oracle_for
from sumprod.ring import (RingError, RingParams, arith, from_int, is_irreducible,
                          make_ring, project, smallest_irreducible, teichmuller, val)

SMALL = [(2, 1, 1, 3), (3, 1, 1, 2), (2, 1, 2, 2), (2, 2, 1, 2), (3, 2, 1, 2),
         (2, 1, 3, 4), (3, 1, 2, 3), (5, 1, 1, 2), (2, 3, 1, 2), (2, 2, 2, 3)]


@pytest.mark.parametrize("p,f", [(2, 1), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (5, 2), (7, 2)])
def test_smallest_irreducible_matches_sympy(p, f):
    g = smallest_irreducible(p, f)
    x = sympy.symbols("x")
    poly = sympy.Poly(list(reversed(list(g) + [1])), x, modulus=p)
    assert poly.is_irreducible
    # nothing lexicographically smaller (by sum g_i p^i) is irreducible
    for code in range(sum(c * p ** i for i, c in enumerate(g))):
        low = [(code // p ** i) % p for i in range(f)]
        assert not sympy.Poly(list(reversed(low + [1])), x, modulus=p).is_irreducible


def test_rabin_agrees_with_sympy_on_all_quartics_mod_2():
    x = sympy.symbols("x")
    for low in itertools.product(range(2), repeat=4):
        ours = is_irreducible(list(low) + [1], 2)
        assert ours == sympy.Poly(list(reversed(list(low) + [1])), x, modulus=2).is_irreducible


@pytest.mark.parametrize("params", SMALL)
def test_digit_encoding_matches_polynomial_oracle(params):
    ring = make_ring(params)
    orc = oracle_for(ring)
    for idx in range(ring.size):
        assert as_lists(ring.coeffs(idx)) == orc.from_digits(ring.digits(idx))


@pytest.mark.parametrize("params", SMALL)
def test_arithmetic_matches_polynomial_oracle(params):
    ring = make_ring(params)
    orc = oracle_for(ring)
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = (int(v) for v in rng.integers(ring.size, size=2))
        ca, cb = as_lists(ring.coeffs(a)), as_lists(ring.coeffs(b))
        assert as_lists(ring.coeffs(ring.mul(a, b))) == orc.mul(ca, cb)
        assert as_lists(ring.coeffs(ring.add(a, b))) == orc.add(ca, cb)
        assert as_lists(ring.coeffs(ring.neg(a))) == orc.neg(ca)


@pytest.mark.parametrize("params", SMALL)
def test_teichmuller_table(params):
    ring = make_ring(params)
    orc = oracle_for(ring)
    nonzero = set()
    for alpha in range(ring.q):
        z = int(ring.teichmuller(alpha))
        assert int(ring.power(z, ring.q)) == z
        assert z % ring.q == alpha
        assert as_lists(ring.teichmuller_table()[alpha]) == orc.teichmuller(alpha)
        if alpha:
            nonzero.add(z)
    assert {int(ring.mul(a, b)) for a in nonzero for b in nonzero} == nonzero


@pytest.mark.parametrize("params", [(2, 1, 1, 12), (3, 1, 1, 7), (2, 2, 1, 6), (2, 1, 3, 12), (3, 2, 2, 3)])
def test_exhaustive_roundtrip_and_projection(params):
    ring = make_ring(params)
    idx = np.arange(ring.size)
    assert all(ring.from_digits(ring.digits(a)) == a for a in range(0, ring.size, 7))
    for k in range(ring.N + 1):
        low = ring.at_level(k)
        a = idx
        b = idx[::-1].copy()
        assert np.array_equal(low.mul(a % low.size, b % low.size), ring.mul(a, b) % low.size)
        assert np.array_equal(low.add(a % low.size, b % low.size), ring.add(a, b) % low.size)


@pytest.mark.parametrize("params", SMALL)
def test_ball_sizes(params):
    ring = make_ring(params)
    v = ring.val(np.arange(ring.size))
    for k in range(ring.N + 1):
        assert int((v >= k).sum()) == ring.q ** (ring.N - k)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL), st.data())
def test_ring_laws(params, data):
    ring = make_ring(params)
    a, b, c = (data.draw(st.integers(0, ring.size - 1)) for _ in range(3))
    assert ring.add(a, b) == ring.add(b, a)
    assert ring.mul(a, b) == ring.mul(b, a)
    assert ring.mul(a, ring.mul(b, c)) == ring.mul(ring.mul(a, b), c)
    assert ring.mul(a, ring.add(b, c)) == ring.add(ring.mul(a, b), ring.mul(a, c))
    assert ring.sub(ring.add(a, b), b) == a
    va, vb = int(ring.val(a)), int(ring.val(b))
    vs = int(ring.val(ring.add(a, b)))
    assert vs >= min(va, vb)
    if va != vb:
        assert vs == min(va, vb)
    assert int(ring.val(ring.mul(a, b))) == min(va + vb, ring.N)


def test_examples():
    r8 = make_ring((2, 1, 1, 3))
    assert arith("add", r8.elem(5), r8.elem(5)).index == 2
    assert val(r8.elem(4)) == 2 and val(r8.elem(0)) == 3
    assert project(r8.elem(5), 2).index == 1
    assert r8.digits(5) == (1, 0, 1) and r8.encode(r8.elem(5)) == 5
    assert r8.decode(0).index == 0

    r9 = make_ring((3, 1, 1, 2))
    assert [int(r9.to_int(r9.teichmuller(a))) for a in range(3)] == [0, 1, 8]
    assert teichmuller(r9, 2).index == 2 and int(r9.to_int(2)) == 8
    five = from_int(r9, 5)
    assert five.digits == (2, 2) and five.index == 8
    assert int(r9.to_int(r9.mul(from_int(r9, 8).index, from_int(r9, 8).index))) == 1
    assert int(r9.at_level(1).to_int(project(five, 1).index)) == 2

    ram = make_ring((2, 1, 2, 2))
    y = ram.elem(ram.uniformizer)
    assert (y * y).index == 0 and val(y) == 1
    for ring in (r8, r9, ram):
        assert ring.teichmuller(1) == 1 and ring.teichmuller(0) == 0


def test_determinism_and_errors():
    assert make_ring((2, 3, 1, 2)).residue_poly == smallest_irreducible(2, 3)
    with pytest.raises(RingError):
        RingParams(4, 1, 1, 2)
    with pytest.raises(RingError):
        make_ring((2, 1, 1, 30))
    with pytest.raises(RingError):
        make_ring((2, 1, 1, 3)).decode(8)
    r8 = make_ring((2, 1, 1, 3))
    with pytest.raises(RingError):
        project(r8.elem(1), 4)
    with pytest.raises(RingError):
        arith("add", r8.elem(1), make_ring((2, 1, 1, 2)).elem(1))
    assert RingParams.parse("3,2,1,4").as_tuple() == (3, 2, 1, 4)
    for params in SMALL:
        P = RingParams(*params)
        assert sum(P.precisions()) == P.N
