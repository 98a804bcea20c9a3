from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

import oracles
from sumprod import procedures as P
from sumprod.ring import make_ring
from sumprod.sets import GradedProfile, RingSet, gen_set, regularize


def test_scalar_sum_examples():
    assert P.scalar_sum_bound(GradedProfile((2, 1), 5), GradedProfile((2, 1), 5)) == Fraction(20, 9)
    assert P.scalar_sum_bound(GradedProfile((1, 1, 1), 3), GradedProfile((1, 1, 1), 3)) == 1
    r25 = make_ring((5, 1, 1, 2))
    A = RingSet.from_ints(r25, [0, 1])
    size, alpha = P.empirical_scalar_sum(A, A)
    assert size >= 3 and 1 <= alpha < 5
    with pytest.raises(ValueError):
        P.scalar_sum_bound(GradedProfile((2,), 5), GradedProfile((2, 1), 5))


def test_scalar_sum_bound_on_regular_pairs():
    rng = np.random.default_rng(0)
    for params in [(5, 1, 1, 2), (3, 1, 1, 3), (2, 2, 1, 2), (2, 1, 2, 4)]:
        ring = make_ring(params)
        for _ in range(25):
            A, pa = regularize(RingSet.from_indices(ring, rng.choice(ring.size, int(rng.integers(1, ring.size)), replace=False)))
            B, pb = regularize(RingSet.from_indices(ring, rng.choice(ring.size, int(rng.integers(1, ring.size)), replace=False)))
            size, alpha = P.empirical_scalar_sum(A, B)
            assert size >= P.scalar_sum_bound(pa, pb)
            direct = {int(ring.add(a, ring.mul(int(ring.teichmuller(alpha)), b)))
                      for a in A.elements() for b in B.elements()}
            assert len(direct) == size


def test_bg_search_examples():
    f3 = make_ring((3, 1, 1, 1))
    cert = P.bg_search(RingSet.from_ints(f3, [0, 1]), Fraction(0), 2, 2)
    # <{0,1}>_1 = {0,1} - {0,1} is already all of F_3, so no scalars are needed
    assert (cert.k, cert.C, cert.verified) == (0, 1, True)
    span = P.scalar_span(RingSet.from_ints(f3, [0, 1]), (2,))
    assert span == RingSet.full(f3)
    r8 = make_ring((2, 1, 1, 3))
    cert = P.bg_search(RingSet.full(r8), Fraction(0), 2, 2)
    assert (cert.k, cert.C) == (0, 1)
    r4 = make_ring((2, 1, 1, 2))
    cert = P.bg_search(RingSet.from_ints(r4, [0, 1]), Fraction(0), 0, 3)
    assert (cert.k, cert.C, cert.verified) == (0, 2, True)
    assert P.bg_search(RingSet.from_ints(r8, [0]), Fraction(0), 1, 2) is None
    assert cert.to_record()["eps"] == "0/1"


def test_bg_search_certificates_verify():
    rng = np.random.default_rng(1)
    for params in [(2, 1, 1, 4), (3, 1, 1, 3), (2, 2, 1, 2), (5, 1, 1, 2)]:
        ring = make_ring(params)
        for _ in range(15):
            A = RingSet.from_indices(ring, list(rng.choice(ring.size, 3, replace=False)) + [0, 1])
            eps = Fraction(int(rng.integers(0, 3)), 4)
            cert = P.bg_search(A, eps, 2, 2)
            if cert is None:
                continue
            assert cert.verified
            ball = set(int(x) for x in RingSet.ball(ring, P.ceil_level(eps, ring.N)).elements())
            S = oracles.brute_gen(ring, A.elements().tolist(), cert.C)
            span = set(S)
            for a in cert.scalars:
                w = int(ring.teichmuller(a))
                span = {int(ring.add(x, ring.mul(w, s))) for x in span for s in S}
            assert ball <= span


def _brute_violation(ring, S, scalars, d):
    coef = [ring.one] + [int(ring.teichmuller(a)) for a in scalars]
    seen = {}
    for x in product(S, repeat=len(coef)):
        key = 0
        for c, xi in zip(coef, x):
            key = int(ring.add(key, ring.mul(c, xi)))
        seen.setdefault(key, []).append(x)
    for group in seen.values():
        for x, y in combinations(group, 2):
            if any(int(ring.val(ring.sub(a, b))) < d for a, b in zip(x, y)):
                return True
    return False


def test_injectivity_violation_matches_exhaustive_scan():
    rng = np.random.default_rng(2)
    for params in [(2, 1, 1, 3), (3, 1, 1, 2), (2, 2, 1, 2), (2, 1, 2, 3)]:
        ring = make_ring(params)
        for _ in range(25):
            S = RingSet.from_indices(ring, rng.choice(ring.size, int(rng.integers(1, 5)), replace=False))
            k = int(rng.integers(0, 3))
            scalars = tuple(int(v) for v in rng.integers(1, ring.q, size=k))
            d = int(rng.integers(0, ring.N + 1))
            got = P.injectivity_violation(S, scalars, d)
            assert (got is not None) == _brute_violation(ring, S.elements().tolist(), scalars, d)
            if got is not None:
                x, xp, i0 = got
                coef = [ring.one] + [int(ring.teichmuller(a)) for a in scalars]
                lx = lxp = 0
                for c, a, b in zip(coef, x, xp):
                    assert a in S and b in S
                    lx, lxp = int(ring.add(lx, ring.mul(c, a))), int(ring.add(lxp, ring.mul(c, b)))
                assert lx == lxp
                assert int(ring.val(ring.sub(x[i0], xp[i0]))) < d


def test_reduce_or_inject_examples():
    r4 = make_ring((2, 1, 1, 2))
    full = RingSet.full(r4)
    cert = P.BGCertificate((1,), 1, Fraction(0), True)
    out = P.reduce_or_inject(full, cert, Fraction(1, 2))
    assert isinstance(out, P.Reduction)
    assert out.cert.k == 0 and out.cert.C == 8 and out.cert.verified
    assert out.cert.eps == Fraction(1, 2)

    zero = RingSet.from_ints(r4, [0])
    out = P.reduce_or_inject(zero, P.BGCertificate((1,), 1, Fraction(0)), Fraction(1, 2))
    assert isinstance(out, P.InjectivityCertificate) and out.level == 1

    out = P.reduce_or_inject(full, P.BGCertificate((), 1, Fraction(0), True), Fraction(1, 2))
    assert isinstance(out, P.InjectivityCertificate)
    with pytest.raises(ValueError):
        P.reduce_or_inject(full, cert, Fraction(1))


def test_reductions_are_reverified():
    rng = np.random.default_rng(3)
    reductions = 0
    for params in [(2, 1, 1, 4), (3, 1, 1, 3), (2, 2, 1, 2)]:
        ring = make_ring(params)
        for _ in range(12):
            A = RingSet.from_indices(ring, list(rng.choice(ring.size, 2, replace=False)) + [0, 1])
            cert = P.BGCertificate(tuple(int(v) for v in rng.integers(1, ring.q, size=2)), 1, Fraction(1, 4))
            out = P.reduce_or_inject(A, cert, Fraction(1, 4))
            if isinstance(out, P.Reduction):
                reductions += 1
                new = out.cert
                assert new.k == 1 and new.C == 8
                assert new.verified == P.bg_covers(A, new.scalars, new.C, new.eps)
    assert reductions > 0


def test_injective_implies_closed():
    """Injectivity at delta0 forces the low-level image to be an additive group."""
    rng = np.random.default_rng(4)
    checked = nontrivial = 0
    for params in [(2, 1, 1, 4), (3, 1, 1, 3), (2, 2, 1, 3), (2, 3, 1, 2), (3, 2, 1, 2)]:
        ring = make_ring(params)
        for _ in range(30):
            extra = rng.choice(ring.size, int(rng.integers(2, 6)), replace=False)
            A = RingSet.from_indices(ring, list(extra) + [0, 1])
            for eps, delta0 in [(Fraction(1, 4), Fraction(1, 2)), (Fraction(1, 2), Fraction(3, 4))]:
                cert = P.bg_search(A, eps, 2, 1)
                if cert is None:
                    continue
                out = P.reduce_or_inject(A, cert, delta0)
                if isinstance(out, P.InjectivityCertificate):
                    checked += 1
                    nontrivial += cert.k > 0
                    ok, pair = P.additive_closure_check(A, cert.C, eps, delta0)
                    assert ok, pair
    # k >= 1 injectivity only shows up over non-prime residue fields
    assert checked >= 30 and nontrivial >= 1


def test_additive_closure_examples():
    r8 = make_ring((2, 1, 1, 3))
    assert P.additive_closure_check(RingSet.from_ints(r8, [0, 2, 4, 6]), 1, Fraction(1, 3), Fraction(1, 2)) == (True, None)
    ok, pair = P.additive_closure_check(RingSet.from_ints(r8, [0, 1, 2]), 1, Fraction(1, 3), Fraction(1))
    assert not ok and int(r8.add(*pair)) not in {0, 2, 6}
    assert P.additive_closure_check(RingSet.full(r8), 2, Fraction(0), Fraction(1, 2))[0]
    with pytest.raises(ValueError):
        P.additive_closure_check(RingSet.full(r8), 1, Fraction(0), Fraction(1, 4))


def test_subfield_examples():
    f4 = make_ring((2, 2, 1, 1))
    G, C = P.subfield_closure(RingSet.from_indices(f4, [0, 1]))
    assert sorted(G.elements()) == [0, 1]
    G, C = P.subfield_closure(RingSet.from_indices(f4, [0, 1, 2]))
    assert G == RingSet.full(f4) and C == 1
    f9 = make_ring((3, 2, 1, 1))
    G, _ = P.subfield_closure(RingSet.from_indices(f9, [0, 1, 2]))
    assert sorted(G.elements()) == [0, 1, 2]
    with pytest.raises(ValueError):
        P.subfield_closure(RingSet.from_indices(f9, [0, 2]))


@pytest.mark.parametrize("params", [(2, 2, 1, 1), (2, 3, 1, 1), (3, 2, 1, 1)])
def test_subfield_closure_exhaustive(params):
    field = make_ring(params)
    rest = [x for x in range(field.size) if x not in (0, field.one)]
    for r in range(len(rest) + 1):
        for extra in combinations(rest, r):
            B = RingSet.from_indices(field, [0, field.one, *extra])
            G, C = P.subfield_closure(B)
            assert P.is_subfield(G)
            assert set(G.elements().tolist()) == oracles.brute_subfield(field, B.elements().tolist())
            assert G == P.field_closure(B)
            assert C == 1 or not P.is_subfield(gen_set(B, C - 1))


def test_e0_examples():
    r4 = make_ring((2, 1, 1, 2))
    assert P.e0_detect(RingSet.from_ints(r4, [0, 1]), 1) == 1
    ram = make_ring((2, 1, 2, 2))
    assert P.e0_detect(RingSet.from_indices(ram, [0, 1, ram.uniformizer]), 1) == 1
    f5 = make_ring((5, 1, 1, 1))
    with pytest.raises(P.E0Error):
        P.e0_detect(RingSet.from_indices(f5, [0, 1]), 1)


def test_e0_at_most_e_on_generated_sets():
    rng = np.random.default_rng(5)
    for params in [(2, 1, 1, 4), (2, 1, 2, 4), (3, 1, 2, 3), (2, 2, 1, 3)]:
        ring = make_ring(params)
        for _ in range(10):
            A = RingSet.from_indices(ring, list(rng.choice(ring.size, 4, replace=False)) + [0, 1])
            assert P.e0_detect(A, 1) <= ring.e


def test_normalize_contains_one():
    rng = np.random.default_rng(6)
    ring = make_ring((3, 1, 1, 3))
    for _ in range(30):
        A = RingSet.from_indices(ring, rng.choice(ring.size, 3, replace=False))
        Nz = P.normalize(A)
        if any(ring.is_unit(sorted(set((A.elements()[:, None] - A.elements()[None, :]).ravel() % ring.size)))):
            assert ring.one in Nz


def test_tail_extract_examples():
    r25 = make_ring((5, 1, 1, 2))
    A = RingSet.from_indices(r25, [5 * j for j in range(5)])  # profile (1, 5)
    out = P.tail_extract(A, Fraction(1))
    assert out.profile.m in ((5,),) and (out.n_bar, out.M) == (1, 1)
    full = RingSet.full(r25)
    out = P.tail_extract(full, Fraction(1, 2))
    assert out.n_bar == 0 and out.B == full and out.growth_ok
    r8 = make_ring((2, 1, 1, 3))
    out = P.tail_extract(RingSet.from_ints(r8, [3]), Fraction(1, 2))
    assert (out.n_bar, out.M) == (2, 1)
    with pytest.raises(ValueError):
        P.tail_extract(RingSet.from_ints(make_ring((2, 1, 1, 2)), [0, 1, 3]), Fraction(1))


def test_large_set_cover_examples():
    r8 = make_ring((2, 1, 1, 3))
    out = P.large_set_cover(RingSet.full(r8))
    assert (out.n0, out.saturation_C) == (0, 1)
    r4 = make_ring((2, 1, 1, 2))
    out = P.large_set_cover(RingSet.from_ints(r4, [0, 1]))
    assert (out.n0, out.saturation_C) == (0, 2)
    out = P.large_set_cover(RingSet.from_ints(r8, [0, 2, 4]))
    assert out.n0 >= 1 and out.B.ring.N == 3 - out.n0
    with pytest.raises(ValueError):
        P.large_set_cover(RingSet.empty(r8))


def test_bg_propagate_examples():
    r8 = make_ring((2, 1, 1, 3))
    full = RingSet.full(r8)
    cert = P.BGCertificate((), 1, Fraction(0), True)
    rep = P.bg_propagate(full, 1, Fraction(1, 3), cert)
    assert rep.covered and rep.N_m == 3
    A = RingSet.from_ints(r8, [0, 1, 2, 4])
    rep = P.bg_propagate(A, 1, Fraction(1, 3), P.BGCertificate((), 1, Fraction(0), True))
    assert rep.covered and set(rep.witnesses) == {1, 2, 3}
    for j, x in rep.witnesses.items():
        assert int(r8.val(x)) == j
    with pytest.raises(P.MissingWitness):
        # A - A = {0, 1, 3, 4, 5, 7} has nothing of valuation exactly 1
        P.bg_propagate(RingSet.from_ints(r8, [0, 1, 4, 5]), 1, Fraction(1, 3),
                       P.BGCertificate((), 1, Fraction(2, 3), True))


def test_pipeline_small():
    rng = np.random.default_rng(7)
    ring = make_ring((2, 1, 1, 6))
    for _ in range(5):
        A = RingSet.from_indices(ring, list(rng.choice(ring.size, 20, replace=False)) + [0, 1])
        rep = P.segment_pipeline(A, Fraction(1, 2))
        assert rep.holds and rep.witness.length >= 1
        assert rep.to_record()["witness"] is not None
