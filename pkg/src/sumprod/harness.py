"""Invariant suites, hypothesis-checked set generation and JSON-lines reports."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from . import density, digits, measures, procedures, sets
from .ring import Ring, RingParams, make_ring
from .sets import RingSet

VERSION = "0.1.0"
RNG_NAME = "numpy.PCG64/SeedSequence(seed, spawn_key=(suite, check, trial))"


# -- serialization --------------------------------------------------------------------------

def jsonable(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(jsonable(x) for x in obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if hasattr(obj, "to_record"):
        return jsonable(obj.to_record())
    return obj


def dumps(record: dict) -> str:
    return json.dumps(jsonable(record), sort_keys=True, separators=(",", ":"))


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def set_record(A: RingSet) -> dict:
    return A.to_record()


def load_set(record: dict, cap: int | None = None) -> RingSet:
    p, f, e, N = (int(v) for v in record["ring"])
    ring = make_ring(RingParams(p, f, e, N)) if cap is None else make_ring(RingParams(p, f, e, N), cap)
    return RingSet.from_indices(ring, [int(s) for s in record["elements"]])


# -- reports ------------------------------------------------------------------------------

@dataclass
class Report:
    command: dict
    records: list[dict] = field(default_factory=list)
    checks: dict[str, list[int]] = field(default_factory=dict)  # name -> [passed, failed, capped]

    def add(self, check: str, trial: int, ok: bool | None, **data) -> None:
        tally = self.checks.setdefault(check, [0, 0, 0])
        tally[0 if ok else 1 if ok is False else 2] += 1
        rec = {"check": check, "trial": trial,
               "status": "pass" if ok else "fail" if ok is False else "cap"}
        rec.update(data)
        self.records.append(rec)

    @property
    def failures(self) -> int:
        return sum(t[1] for t in self.checks.values())

    @property
    def capped(self) -> int:
        return sum(t[2] for t in self.checks.values())

    def lines(self) -> Iterator[str]:
        yield dumps({"type": "header", "command": self.command, "version": VERSION, "rng": RNG_NAME})
        for r in self.records:
            yield dumps({"type": "record", **r})
        yield dumps({"type": "summary", "checks": {k: {"pass": v[0], "fail": v[1], "cap": v[2]}
                                                   for k, v in self.checks.items()},
                     "failures": self.failures})

    def table(self) -> str:
        width = max([len(k) for k in self.checks] + [5])
        rows = [f"{'check':<{width}}  pass  fail   cap"]
        for k, (ok, bad, cap) in self.checks.items():
            rows.append(f"{k:<{width}}  {ok:>4}  {bad:>4}  {cap:>4}")
        return "\n".join(rows)


def trial_rng(seed: int, suite: int, check: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(suite, check, trial))
    return np.random.Generator(np.random.PCG64(ss))


# -- set generation -------------------------------------------------------------------------

class Unsatisfiable(ValueError):
    pass


def verify_hypotheses(A: RingSet, eps: Fraction = Fraction(0), delta: Fraction = Fraction(0),
                      valuations=()) -> list[str]:
    """Failures of |pi_i(A)| >= q^(i eps) for N delta <= i <= N and of the
    difference-valuation witnesses.  Empty list means every hypothesis holds."""
    ring = A.ring
    eps, delta = Fraction(eps), Fraction(delta)
    problems = []
    if len(A) == 0:
        return ["empty set"]
    a, b = eps.numerator, eps.denominator
    for i in range(max(0, math.ceil(delta * ring.N)), ring.N + 1):
        if len(A.project(i)) ** b < ring.q ** (i * a):
            problems.append(f"|pi_{i}(A)| below q^({i}*{eps})")
    els = A.elements()
    if valuations:
        diffs = ring.sub(els[:, None], els[None, :])
        present = set(np.unique(ring.val(diffs[diffs != 0])).tolist())
        for v in valuations:
            if v not in present:
                problems.append(f"no difference of valuation {v}")
    return problems


def generate_set(ring: Ring, rng: np.random.Generator, eps: Fraction = Fraction(0),
                 delta: Fraction = Fraction(0), valuations=(), extra: int = 0) -> RingSet:
    """A random set meeting the requested hypotheses, checked before it is returned."""
    eps, delta = Fraction(eps), Fraction(delta)
    if not 0 <= eps <= 1 or not 0 <= delta <= 1:
        raise Unsatisfiable("eps and delta must lie in [0, 1]")
    if any(not 0 <= v < ring.N for v in valuations):
        raise Unsatisfiable(f"valuations must lie in [0, {ring.N})")
    chosen = {0} | {ring.q ** v for v in valuations}
    order = rng.permutation(ring.size)
    chosen |= set(order[:extra].tolist())
    mask = np.zeros(ring.size, dtype=bool)
    mask[list(chosen)] = True
    pos = extra
    while verify_hypotheses(RingSet(ring, mask.copy()), eps, delta, valuations):
        step = max(1, int(mask.sum()) // 4)
        fresh = order[pos:pos + step]
        if len(fresh) == 0:
            raise Unsatisfiable("constraints cannot be met")
        mask[fresh] = True
        pos += step
    A = RingSet(ring, mask)
    assert not verify_hypotheses(A, eps, delta, valuations)
    return A


def random_subset(ring: Ring, rng: np.random.Generator, size: int | None = None,
                  must=()) -> RingSet:
    if size is None:
        size = int(rng.integers(1, ring.size + 1))
    idx = rng.choice(ring.size, size=min(size, ring.size), replace=False)
    return RingSet.from_indices(ring, list(idx) + list(must))


def random_measure(ring: Ring, rng: np.random.Generator, support: int | None = None):
    n = ring.size
    k = support or int(rng.integers(1, n + 1))
    idx = rng.choice(n, size=k, replace=False)
    w = rng.integers(1, 20, size=k)
    total = int(w.sum())
    return measures.FiniteMeasure.from_dict(ring, {int(i): Fraction(int(v), total)
                                                  for i, v in zip(idx, w)})


# -- suites ---------------------------------------------------------------------------------

SMALL_RINGS = [(2, 1, 1, 3), (3, 1, 1, 2), (2, 1, 2, 3), (2, 2, 1, 2), (5, 1, 1, 2), (3, 1, 2, 3)]


def _pick_ring(rng, choices=SMALL_RINGS) -> Ring:
    return make_ring(choices[int(rng.integers(len(choices)))])


def _ring_checks(rng, rep, t):
    ring = _pick_ring(rng, SMALL_RINGS + [(2, 1, 1, 8), (3, 2, 1, 2), (2, 3, 2, 3)])
    a, b, c = (int(x) for x in rng.integers(ring.size, size=3))
    rep.add("ring.digit_roundtrip", t, ring.from_digits(ring.digits(a)) == a, ring=ring.params.as_tuple(), a=a)
    al, be = (int(x) for x in rng.integers(ring.q, size=2))
    fld = ring.residue_field
    lhs = int(ring.mul(ring.teichmuller(al), ring.teichmuller(be)))
    rep.add("ring.teichmuller_mult", t, lhs == int(ring.teichmuller(int(fld.mul(al, be)))),
            ring=ring.params.as_tuple(), alpha=al, beta=be)
    z = int(ring.teichmuller(al))
    rep.add("ring.teichmuller_fixed", t, int(ring.power(z, ring.q)) == z and z % ring.q == al,
            ring=ring.params.as_tuple(), alpha=al)
    k = int(rng.integers(ring.N + 1))
    low = ring.at_level(k)
    ok = int(low.add(a % low.size, b % low.size)) == int(ring.add(a, b)) % low.size
    ok &= int(low.mul(a % low.size, b % low.size)) == int(ring.mul(a, b)) % low.size
    rep.add("ring.projection_hom", t, bool(ok), ring=ring.params.as_tuple(), a=a, b=b, k=k)
    va, vb, vs = int(ring.val(a)), int(ring.val(b)), int(ring.val(ring.add(a, b)))
    ok = vs >= min(va, vb) and (va == vb or vs == min(va, vb))
    ok &= int(ring.val(ring.mul(a, b))) == min(va + vb, ring.N)
    rep.add("ring.valuation", t, bool(ok), ring=ring.params.as_tuple(), a=a, b=b)
    lhs = ring.mul(a, ring.add(b, c))
    rep.add("ring.distributive", t, int(lhs) == int(ring.add(ring.mul(a, b), ring.mul(a, c))),
            ring=ring.params.as_tuple(), a=a, b=b, c=c)


def _digits_checks(rng, rep, t):
    ring = _pick_ring(rng, [(2, 1, 1, 4), (3, 1, 1, 4), (3, 2, 1, 2), (3, 1, 2, 4), (2, 2, 1, 3)])
    k = int(rng.integers(ring.N))
    low, up = ring.at_level(k), ring.at_level(k + 1)
    al = int(rng.integers(ring.q))
    x1, x2 = (int(v) for v in rng.integers(low.size, size=2))
    sigma = digits.cocycle(al, k, low.elem(x1), low.elem(x2))
    d = digits.carry_defect(up, al, x1, x2)
    # independent membership check of the defining relation
    hits = [s for s in range(ring.q)
            if int(up.val(up.add(d, up.shift(up.teichmuller(s), k)))) >= k + 1]
    rep.add("digits.cocycle", t, hits == [sigma], ring=ring.params.as_tuple(),
            alpha=al, k=k, x1=x1, x2=x2, sigma=sigma)
    a1, a2 = (int(v) for v in rng.integers(ring.q, size=2))
    fld = ring.residue_field
    c1 = x1 + a1 * ring.q ** k
    c2 = x2 + a2 * ring.q ** k
    s = int(up.add(c1, up.mul(up.teichmuller(al), c2)))
    beta = s // ring.q ** k
    expect = int(fld.add(fld.add(a1, fld.mul(al, a2)), sigma))
    rep.add("digits.carry_consistency", t, beta == expect, ring=ring.params.as_tuple(),
            alpha=al, k=k, x1=x1, x2=x2, a1=a1, a2=a2)
    r2 = make_ring((int(rng.choice([2, 3, 5])), 1, 1, 2))
    sec = rng.integers(r2.q, size=r2.q)
    bad = digits.section_defect(r2, sec)
    rep.add("digits.section_defect", t, bad is not None, ring=r2.params.as_tuple(),
            section=sec.tolist())


def _sets_checks(rng, rep, t):
    ring = _pick_ring(rng, SMALL_RINGS + [(2, 1, 1, 10), (2, 1, 3, 6), (3, 1, 1, 5)])
    X1 = random_subset(ring, rng, int(rng.integers(1, 12)))
    X2 = random_subset(ring, rng, int(rng.integers(1, 12)))
    lhs = {a + b for a in sets.J(X1) for b in sets.J(X2) if a + b < ring.N}
    rep.add("sets.J_additive", t, lhs <= sets.J(sets.prodset(X1, X2)), X1=X1, X2=X2)
    u = int(rng.choice(ring.units()))
    rep.add("sets.J_unit_invariant", t, sets.J(X1.scale(u)) == sets.J(X1), X=X1, unit=u)
    rep.add("sets.J_grading", t, sets.J(X1) == sets.J_by_grading(X1), X=X1)
    A = random_subset(ring, rng, int(rng.integers(1, 6)), must=(0, 1))
    C = int(rng.integers(1, 3))
    rep.add("sets.gen_monotone", t, sets.gen_set(A, C).issubset(sets.gen_set(A, C + 1)), A=A, C=C)
    B = random_subset(ring, rng)
    R, prof = sets.regularize(B)
    ok = R.issubset(B) and sets.regularity_profile(R) == prof
    ok &= len(R) >= sets.regularize_bound(len(B), ring.q, ring.N)
    ok &= all(len(R.project(k)) == prof.size(k) for k in range(ring.N + 1))
    rep.add("sets.regularize", t, bool(ok), A=B)


def _measures_checks(rng, rep, t):
    ring = _pick_ring(rng, [(2, 1, 1, 3), (3, 1, 1, 2), (2, 2, 1, 2), (5, 1, 1, 1), (2, 1, 2, 3)])
    mu = random_measure(ring, rng)
    k = int(rng.integers(ring.N + 1))
    part = measures.Partition.level(ring, k)
    fine = measures.Partition.discrete(ring)
    H = measures.entropy(mu)
    chain = measures.partition_entropy(mu, part) + measures.cond_entropy(mu, fine, part)
    rep.add("measures.chain_rule", t, abs(H - chain) < 1e-9, ring=ring.params.as_tuple())
    nu = random_measure(ring, rng)
    lam = Fraction(int(rng.integers(1, 10)), 10)
    mix = measures.mixture([(lam, mu), (1 - lam, nu)])
    conc = measures.entropy(mix) >= lam * H + (1 - lam) * measures.entropy(nu) - 1e-9
    rep.add("measures.concavity", t, bool(conc), ring=ring.params.as_tuple())
    rep.add("measures.support_bound", t, H <= math.log(len(mu.support())) + 1e-9)
    rep.add("measures.l2_bound", t, H >= -math.log(measures.l2_squared(mu)) - 1e-9)
    A, _ = sets.regularize(random_subset(ring, rng))
    B, _ = sets.regularize(random_subset(ring, rng))
    if ring.N >= 2:
        al = int(rng.integers(1, ring.q))
        kk = int(rng.integers(ring.N))
        low = ring.at_level(kk)
        conv = measures.pushforward(measures.scalar_convolution(A, B, al), kk)
        xb = low.elem(int(rng.choice(conv.support())))
        exact = measures.conditional(measures.scalar_convolution(A, B, al), xb)
        rep.add("measures.conditional_decomposition", t,
                exact == measures.convolution_conditional_mixture(A, B, al, xb), A=A, B=B, alpha=al,
                xbar=xb.index, k=kk)
        lhs, rhs = measures.conditional_entropy_gap(A, B, al, kk)
        rep.add("measures.entropy_inequality", t, lhs >= rhs - 1e-9, A=A, B=B, alpha=al, k=kk)
    fld = make_ring((int(rng.choice([5, 7, 11])), 1, 1, 1))
    Ab, Bb = random_subset(fld, rng), random_subset(fld, rng)
    emp, closed = measures.avg_scalar_energy(Ab, Bb)
    rep.add("measures.avg_energy", t, emp == closed, A=Ab, B=Bb)


def _random_tail(rng) -> density.TailSet:
    t = int(rng.integers(0, 25))
    f = {0} | {n for n in range(1, t) if rng.random() < 0.5}
    return density.TailSet.make(f, t)


def _density_checks(rng, rep, t):
    X, Y = _random_tail(rng), _random_tail(rng)
    ok, wit = density.mann_check(X, Y)
    rep.add("density.mann", t, ok, X=sorted(X.finite), tX=X.t, Y=sorted(Y.finite), tY=Y.t, witness=wit)
    N = int(rng.integers(2, 65))
    T = {i for i in range(N) if rng.random() < 0.5}
    k1 = int(rng.integers(1, N))
    k2 = int(rng.integers(1, N - k1 + 1)) if N - k1 > 1 else 1
    if k1 + k2 < N:
        ok = density.D_T(T, N, k1 + k2) <= density.D_T(T, N, k1) + density.D_T(T, N, k2)
        rep.add("density.subadditive", t, ok, T=T, N=N, k1=k1, k2=k2)
    rep.add("density.D_T_formulas", t, all(density.D_T(T, N, k) == density.D_T_shifted(T, N, k)
                                          for k in range(N)), T=T, N=N)
    q = int(rng.choice([2, 3, 4, 5, 8, 16]))
    m = tuple(int(rng.choice([1, 1, q, int(rng.integers(1, q + 1))])) for _ in range(N))
    prof = sets.GradedProfile(m, q)
    eps, delta = Fraction(1, 4), Fraction(1, 8)
    if density.satisfies_hypotheses(prof, eps, delta):
        ok, wit = density.large_interval_cover(density.profile_stats(prof), eps, delta)
        rep.add("density.large_interval", t, ok, m=m, q=q, eps=eps, delta=delta,
                witness=None if ok else wit)


def _procedures_checks(rng, rep, t):
    ring = _pick_ring(rng, [(2, 1, 1, 3), (3, 1, 1, 2), (5, 1, 1, 2), (2, 2, 1, 2), (5, 1, 1, 3)])
    A, pa = sets.regularize(random_subset(ring, rng))
    B, pb = sets.regularize(random_subset(ring, rng))
    emp, _ = procedures.empirical_scalar_sum(A, B)
    rep.add("procedures.scalar_sum", t, emp >= procedures.scalar_sum_bound(pa, pb), A=A, B=B)
    fp = [(2, 2), (2, 3), (3, 2), (2, 4)][int(rng.integers(4))]
    fld = make_ring((fp[0], fp[1], 1, 1))
    Bf = random_subset(fld, rng, int(rng.integers(1, fld.size + 1)), must=(0, 1))
    G, _ = procedures.subfield_closure(Bf)
    rep.add("procedures.subfield", t, procedures.is_subfield(G) and G == procedures.field_closure(Bf),
            B=Bf)
    r8 = make_ring((2, 1, 1, 4))
    A2 = random_subset(r8, rng, int(rng.integers(2, 6)), must=(0, 1))
    cert = procedures.bg_search(A2, Fraction(1, 4), 1, 2)
    if cert is not None:
        out = procedures.reduce_or_inject(A2, cert, Fraction(1, 2))
        if isinstance(out, procedures.Reduction):
            ok = out.cert.verified == procedures.bg_covers(A2, out.cert.scalars, out.cert.C, out.cert.eps)
            rep.add("procedures.reduction_verified", t, ok, A=A2)
        else:
            ok, wit = procedures.additive_closure_check(A2, cert.C, cert.eps, Fraction(1, 2))
            rep.add("procedures.injective_implies_closed", t, ok, A=A2, witness=wit)


SUITES: dict[str, Callable] = {
    "ring": _ring_checks,
    "digits": _digits_checks,
    "sets": _sets_checks,
    "measures": _measures_checks,
    "density": _density_checks,
    "procedures": _procedures_checks,
}


def run_suite(name: str, seed: int = 0, trials: int = 100) -> Report:
    names = list(SUITES) if name == "all" else [name]
    if any(n not in SUITES for n in names):
        raise ValueError(f"unknown suite {name!r}")
    rep = Report({"command": "suite", "name": name, "seed": seed, "trials": trials})
    for n in names:
        sid = list(SUITES).index(n)
        for t in range(trials):
            rng = trial_rng(seed, sid, 0, t)
            try:
                SUITES[n](rng, rep, t)
            except sets.CapExceeded as exc:
                rep.add(f"{n}.cap", t, None, reason=str(exc))
    return rep
