"""Constructive steps behind the segment theorem: scalar sums, bounded generation,
reduce-or-inject, subfield closure, e_0 detection, tail extraction and covers."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .ring import Ring, RingError
from .sets import (DEFAULT_OP_CAP, CapExceeded, GradedProfile, J, RingSet,
                   SegmentWitness, gen_set, prodset, regularity_profile,
                   regularize, segment_holds, segment_search, sumset)


def ceil_level(eps: Fraction, N: int) -> int:
    return math.ceil(Fraction(eps) * N)


def floor_level(delta: Fraction, N: int) -> int:
    return math.floor(Fraction(delta) * N)


# -- scalar sums --------------------------------------------------------------------------

def scalar_sum_bound(profA: GradedProfile, profB: GradedProfile) -> Fraction:
    """prod_i max(1, (1/(m_i l_i) + 1/q)^-1)."""
    if len(profA) != len(profB) or profA.q != profB.q:
        raise ValueError("profiles must have equal length and residue field")
    q = profA.q
    out = Fraction(1)
    for m, l in zip(profA.m, profB.m):
        out *= max(Fraction(1), 1 / (Fraction(1, m * l) + Fraction(1, q)))
    return out


def empirical_scalar_sum(A: RingSet, B: RingSet) -> tuple[int, int]:
    """max over omega in Omega of |A + omega B|, with the first residue alpha attaining it."""
    ring = A.ring
    if B.ring != ring:
        raise RingError("sets live in different rings")
    best = (-1, 0)
    for alpha in range(1, ring.q):
        size = len(sumset(A, B.scale(int(ring.teichmuller(alpha)))))
        if size > best[0]:
            best = (size, alpha)
    return best


# -- bounded generation -----------------------------------------------------------------------

@dataclass(frozen=True)
class BGCertificate:
    """ball(ceil(eps N)) ⊆ <A>_C + psi(a_1)<A>_C + ... + psi(a_k)<A>_C."""

    scalars: tuple[int, ...]
    C: int
    eps: Fraction
    verified: bool = False
    omega_power: int = 1  # scalars are taken from prod_{omega_power}(Omega ∪ {1})

    @property
    def k(self) -> int:
        return len(self.scalars)

    def to_record(self) -> dict:
        return {"scalars": list(self.scalars), "C": self.C, "eps": _frac(self.eps),
                "verified": self.verified, "omega_power": self.omega_power}


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def scalar_span(S: RingSet, scalars) -> RingSet:
    """S + psi(a_1) S + ... + psi(a_k) S."""
    ring = S.ring
    out = S
    for a in scalars:
        out = sumset(out, S.scale(int(ring.teichmuller(a))))
    return out


def bg_covers(A: RingSet, scalars, C: int, eps: Fraction, cap: int = DEFAULT_OP_CAP) -> bool:
    ring = A.ring
    ball = RingSet.ball(ring, ceil_level(eps, ring.N))
    return ball.issubset(scalar_span(gen_set(A, C, cap), scalars))


def _greedy_scalars(S: RingSet, ball: RingSet, k: int) -> tuple[int, ...] | None:
    ring = S.ring
    cur, chosen = S, []
    for _ in range(k):
        if ball.issubset(cur):
            break
        best = None
        for a in range(1, ring.q):
            cand = sumset(cur, S.scale(int(ring.teichmuller(a))))
            gain = len(cand & ball)
            if best is None or gain > best[0]:
                best = (gain, a, cand)
        chosen.append(best[1])
        cur = best[2]
    if ball.issubset(cur):
        return tuple(chosen) + (1,) * (k - len(chosen))
    return None


def bg_search(A: RingSet, eps: Fraction, max_k: int, max_C: int,
              exhaustive_k: int = 3, cap: int = DEFAULT_OP_CAP) -> BGCertificate | None:
    """Smallest (k, then C) bounded-generation certificate within the budget.

    For each k, C the scalars come from a greedy max-coverage pass, then from
    an exhaustive scan of multisets when k <= exhaustive_k.  None means the
    budget ran out, not that no certificate exists.
    """
    ring = A.ring
    eps = Fraction(eps)
    ball = RingSet.ball(ring, ceil_level(eps, ring.N))
    gens: dict[int, RingSet] = {}
    for k in range(max_k + 1):
        for C in range(1, max_C + 1):
            if C not in gens:
                gens[C] = gen_set(A, C, cap)
            S = gens[C]
            found = _greedy_scalars(S, ball, k)
            if found is None and 0 < k <= exhaustive_k:
                for combo in itertools.combinations_with_replacement(range(1, ring.q), k):
                    if ball.issubset(scalar_span(S, combo)):
                        found = combo
                        break
            if found is not None:
                ok = ball.issubset(scalar_span(S, found))
                return BGCertificate(tuple(found), C, eps, ok)
    return None


# -- reduce or inject -----------------------------------------------------------------------

@dataclass(frozen=True)
class Reduction:
    cert: BGCertificate
    x: tuple[int, ...]
    x_prime: tuple[int, ...]
    dropped: int


@dataclass(frozen=True)
class InjectivityCertificate:
    cert: BGCertificate
    delta0: Fraction
    level: int


def _find_pair(S: RingSet, d: int) -> tuple[int, int]:
    """x, x' in S with x - x' = d."""
    ring = S.ring
    els = S.elements()
    hit = S.mask[ring.add(els, d)]
    xp = int(els[np.argmax(hit)])
    return int(ring.add(xp, d)), xp


def injectivity_violation(S: RingSet, scalars, d: int):
    """A pair x != x' in S^{k+1} with l(x) = l(x') and x - x' not in (p^d)^{k+1}.

    l(x) = x_0 + sum psi(a_i) x_i.  Works on difference tuples: a violation
    exists iff some t in (S - S)^{k+1} with a coordinate of valuation < d has
    l(t) = 0.  Returns (x, x', i0) with i0 the largest such coordinate, or None.
    """
    ring = S.ring
    E = sumset(S, S.negate())
    coef = [ring.one] + [int(ring.teichmuller(a)) for a in scalars]
    parts = [E.scale(c) for c in coef]
    low = E.elements()
    low = low[ring.val(low) < d]
    zero = RingSet.from_indices(ring, [0])
    for i0 in range(len(coef) - 1, -1, -1):
        rest = [parts[i] for i in range(len(coef)) if i != i0]
        # suffix[j] = rest[j] + ... + rest[-1]
        suffix = [zero]
        for P in reversed(rest):
            suffix.append(sumset(P, suffix[-1]))
        suffix.reverse()
        heads = ring.neg(ring.mul(coef[i0], low))
        ok = suffix[0].mask[heads]
        if not ok.any():
            continue
        t = [0] * len(coef)
        t[i0] = int(low[np.argmax(ok)])
        target = int(heads[np.argmax(ok)])
        others = [i for i in range(len(coef)) if i != i0]
        for j, i in enumerate(others):
            vals = E.elements()
            remain = ring.sub(target, ring.mul(coef[i], vals))
            pick = int(np.argmax(suffix[j + 1].mask[remain]))
            t[i] = int(vals[pick])
            target = int(remain[pick])
        pairs = [_find_pair(S, ti) for ti in t]
        return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), i0
    return None


def reduce_or_inject(A: RingSet, cert: BGCertificate, delta0: Fraction,
                     cap: int = DEFAULT_OP_CAP) -> Reduction | InjectivityCertificate:
    """Either drop a scalar (eps + delta0, k - 1, 8C) or certify delta0-injectivity
    of l on <A>_{2C}^{k+1}."""
    ring = A.ring
    delta0 = Fraction(delta0)
    if not 0 < delta0 < 1:
        raise ValueError("delta0 must lie in (0, 1)")
    d = floor_level(delta0, ring.N)
    S2 = gen_set(A, 2 * cert.C, cap)
    found = injectivity_violation(S2, cert.scalars, d)
    if found is None:
        return InjectivityCertificate(cert, delta0, d)
    x, xp, i0 = found
    alphas = list(cert.scalars)
    if i0 == 0:
        field = ring.residue_field
        inv = int(field.power(alphas[0], field.q - 2))
        new = [int(field.mul(a, inv)) for a in alphas[1:]]
    else:
        new = alphas[:i0 - 1] + alphas[i0:]
    eps = cert.eps + delta0
    C = 8 * cert.C
    ok = bg_covers(A, new, C, eps, cap)
    return Reduction(BGCertificate(tuple(new), C, eps, ok, cert.omega_power), x, xp, i0)


def additive_closure_check(A: RingSet, C: int, eps: Fraction,
                           delta0: Fraction) -> tuple[bool, tuple[int, int] | None]:
    """Is pi_{floor(delta0 N)}(<A>_C ∩ ball(ceil(eps N))) closed under addition?"""
    ring = A.ring
    d = floor_level(delta0, ring.N)
    if d < 1:
        raise ValueError("need floor(delta0 N) >= 1")
    e = ceil_level(eps, ring.N)
    S = gen_set(A, C)
    els = S.elements()
    low = ring.at_level(d)
    X = RingSet.from_indices(low, np.unique(els[ring.val(els) >= e] % low.size))
    xs = X.elements()
    sums = low.add(xs[:, None], xs[None, :])
    bad = np.argwhere(~X.mask[sums])
    if len(bad) == 0:
        return True, None
    i, j = bad[0]
    return False, (int(xs[i]), int(xs[j]))


# -- finite fields --------------------------------------------------------------------------

def is_subfield(X: RingSet) -> bool:
    field = X.ring
    if 0 not in X or field.one not in X:
        return False
    xs = X.elements()
    for op in (field.add, field.sub, field.mul):
        if not X.mask[op(xs[:, None], xs[None, :])].all():
            return False
    return True


def field_closure(B: RingSet) -> RingSet:
    """Closure under +, -, * by breadth-first saturation (an independent oracle)."""
    field = B.ring
    seen = set(int(b) for b in B.elements()) | {0, field.one}
    frontier = list(seen)
    while frontier:
        new = set()
        for x in frontier:
            for y in list(seen):
                for op in (field.add, field.sub, field.mul):
                    for z in (int(op(x, y)), int(op(y, x))):
                        if z not in seen:
                            new.add(z)
        seen |= new
        frontier = list(new)
    return RingSet.from_indices(field, seen)


def subfield_closure(B: RingSet, cap: int = DEFAULT_OP_CAP) -> tuple[RingSet, int]:
    """First subfield among <B>_1, <B>_2, <B>_4, ..., and the least C reaching it."""
    field = B.ring
    if field.N != 1:
        raise ValueError("subfield closure works in the residue field")
    if 0 not in B or field.one not in B:
        raise ValueError("B must contain 0 and 1")
    C = 1
    while True:
        G = gen_set(B, C, cap)
        if is_subfield(G):
            break
        C *= 2
        if C > field.q * 4:
            raise RuntimeError("<B>_C failed to stabilize")
    lo, hi = C // 2, C  # <B>_lo is not a subfield (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if is_subfield(gen_set(B, mid, cap)):
            hi = mid
        else:
            lo = mid
    return G, hi


# -- gradings -------------------------------------------------------------------------------

class E0Error(ValueError):
    pass


def normalize(A: RingSet) -> RingSet:
    """lambda (A - A) with lambda the inverse of the first unit of A - A."""
    ring = A.ring
    D = sumset(A, A.negate())
    els = D.elements()
    units = els[ring.is_unit(els)]
    if len(units) == 0:
        return D
    u = int(units[0])
    inv = int(ring.power(u, _unit_order(ring) - 1))
    return D.scale(inv)


def _unit_order(ring: Ring) -> int:
    return (ring.q - 1) * ring.q ** (ring.N - 1)


def e0_detect(A: RingSet, C1: int, cap: int = DEFAULT_OP_CAP) -> int:
    """min(J(<lambda(A - A)>_{2 C1}) minus {0})."""
    S = gen_set(normalize(A), 2 * C1, cap)
    js = sorted(J(S) - {0})
    if not js:
        raise E0Error(f"no element of positive valuation in <A>_{2 * C1}")
    return js[0]


# -- tails and large sets ---------------------------------------------------------------------

@dataclass(frozen=True)
class TailExtract:
    n_bar: int
    B: RingSet
    N_prime: int
    M: int
    x0: int
    profile: GradedProfile
    growth_ok: bool

    def to_record(self) -> dict:
        return {"n_bar": self.n_bar, "N_prime": self.N_prime, "M": self.M, "x0": str(self.x0),
                "profile": list(self.profile.m), "growth_ok": self.growth_ok,
                "B": self.B.to_record()}


def _fiber_rescale(A: RingSet, x0: int, n: int) -> RingSet:
    """{b : x0 + p^n b in A} at level N - n (A's fiber over x0 mod p^n)."""
    ring = A.ring
    els = A.elements()
    fib = els[els % ring.q ** n == x0 % ring.q ** n]
    diff = ring.sub(fib, x0)
    return RingSet.from_indices(ring.at_level(ring.N - n), diff // ring.q ** n)


def _below_power(size: int, q: int, k: int, r: Fraction) -> bool:
    """size < q^(k r), exactly."""
    a, b = r.numerator, r.denominator
    return size ** b < q ** (k * a)


def tail_extract(A: RingSet, eps: Fraction) -> TailExtract:
    ring, q = A.ring, A.ring.q
    prof = regularity_profile(A)
    if prof is None:
        raise ValueError("tail extraction needs a regular set")
    eps = Fraction(eps)
    quarter = eps / 4
    n_bar = max((k for k in range(ring.N) if _below_power(prof.size(k), q, k, quarter)),
                default=0)
    M = ring.N - n_bar
    x0 = int(A.elements()[0])
    B = _fiber_rescale(A, x0, n_bar)
    growth = all(not _below_power(len(B.project(i)), q, i, quarter) for i in range(1, M + 1))
    bprof = regularity_profile(B)
    return TailExtract(n_bar, B, n_bar, M, x0, bprof or prof, growth and bprof is not None)


@dataclass(frozen=True)
class LargeSetCover:
    n0: int
    xi: int
    B: RingSet
    saturation_C: int | None

    def to_record(self) -> dict:
        return {"n0": self.n0, "xi": str(self.xi), "saturation_C": self.saturation_C,
                "B_size": len(self.B), "B_level": self.B.ring.N}


def large_set_cover(A: RingSet, max_C: int = 8, cap: int = DEFAULT_OP_CAP) -> LargeSetCover:
    """Deepest level n0 < N whose densest fiber beats q^(-3 n0/4)|A|, its rescaled
    fiber B, and the least C <= max_C with <B>_C everything (None if not reached)."""
    ring, q = A.ring, A.ring.q
    if len(A) == 0:
        raise ValueError("empty set")
    els = A.elements()
    n0, xi = 0, int(els[0])
    for k in range(1, ring.N):
        counts = np.bincount(els % q ** k, minlength=q ** k)
        top = int(counts.max())
        if top ** 4 * q ** (3 * k) > len(A) ** 4:
            n0, xi = k, int(np.argmax(counts))
    x0 = int(els[els % q ** n0 == xi][0])
    B = _fiber_rescale(A, x0, n0)
    sat = None
    for C in range(1, max_C + 1):
        if len(gen_set(B, C, cap)) == B.ring.size:
            sat = C
            break
    return LargeSetCover(n0, xi, B, sat)


# -- propagation down the levels -------------------------------------------------------------------

class MissingWitness(ValueError):
    def __init__(self, j: int, level: int):
        super().__init__(f"no element of A - A with valuation exactly {level} (j={j})")
        self.j, self.level = j, level


@dataclass(frozen=True)
class PropagationReport:
    N_m: int
    level: int
    witnesses: dict[int, int]
    covered: bool

    def to_record(self) -> dict:
        return {"N_m": self.N_m, "level": self.level, "covered": self.covered,
                "witnesses": {str(j): str(x) for j, x in self.witnesses.items()}}


def bg_propagate(A: RingSet, m: int, eps2: Fraction, cert: BGCertificate,
                 cap: int = DEFAULT_OP_CAP) -> PropagationReport:
    """Lift a certificate for pi_{N_m}(A) to level N with valuation witnesses x_j."""
    ring, N = A.ring, A.ring.N
    eps2 = Fraction(eps2)
    N_m = math.floor(eps2 ** (m - 1) * N)
    if not bg_covers(A.project(N_m), cert.scalars, cert.C, cert.eps, cap):
        raise ValueError(f"certificate does not hold at level {N_m}")
    D = sumset(A, A.negate()).elements()
    vals = ring.val(D)
    witnesses = {}
    for j in range(1, math.floor(1 / eps2 ** m) + 1):
        lv = math.floor(j * eps2 ** m * N)
        hit = D[vals == lv]
        if len(hit) == 0:
            raise MissingWitness(j, lv)
        witnesses[j] = int(hit[0])
    T = scalar_span(gen_set(A, cert.C, cap), cert.scalars)
    total = T
    for x in witnesses.values():
        total = sumset(total, prodset(RingSet.from_indices(ring, [x]), T))
    level = ceil_level(eps2 ** m, N)
    return PropagationReport(N_m, level, witnesses, RingSet.ball(ring, level).issubset(total))


# -- the whole pipeline ------------------------------------------------------------------------------

@dataclass
class PipelineReport:
    regular_profile: tuple[int, ...] = ()
    tail: TailExtract | None = None
    e0: int | None = None
    cert: BGCertificate | None = None
    steps: list[str] = field(default_factory=list)
    C: int = 1
    witness: SegmentWitness | None = None
    holds: bool = False

    def to_record(self) -> dict:
        return {
            "profile": list(self.regular_profile),
            "tail": None if self.tail is None else {k: v for k, v in self.tail.to_record().items()
                                                    if k != "B"},
            "e0": self.e0,
            "cert": None if self.cert is None else self.cert.to_record(),
            "steps": self.steps,
            "C": self.C,
            "witness": None if self.witness is None else self.witness.to_record(),
            "holds": self.holds,
        }


def segment_pipeline(A: RingSet, eps: Fraction, delta0: Fraction = Fraction(1, 4),
                     C1: int = 1, max_k: int = 2, max_C: int = 2,
                     cap: int = DEFAULT_OP_CAP) -> PipelineReport:
    """regularize -> tail_extract -> e0_detect -> bg_search / reduce_or_inject -> segment_search.

    Stages that run out of budget are noted in ``steps`` and skipped; the
    final segment is searched in <A>_C for the C the certificate stage settled on.
    """
    rep = PipelineReport()
    A1, prof = regularize(A)
    rep.regular_profile = prof.m
    rep.tail = tail_extract(A1, eps)
    B = rep.tail.B
    if B.ring.N >= 1:
        try:
            rep.e0 = e0_detect(B, C1, cap)
        except E0Error as exc:
            rep.steps.append(f"e0: {exc}")
        Bn = normalize(B)
        cert = bg_search(Bn, Fraction(eps) / 4, max_k, max_C, cap=cap)
        if cert is None:
            rep.steps.append("bg_search: budget exhausted")
        while cert is not None and cert.k > 0:
            try:
                out = reduce_or_inject(Bn, cert, delta0, cap)
            except CapExceeded:
                rep.steps.append("reduce_or_inject: cap exceeded")
                break
            if isinstance(out, InjectivityCertificate):
                rep.steps.append(f"injective at k={cert.k}")
                break
            rep.steps.append(f"reduced k={cert.k} -> {out.cert.k}")
            cert = out.cert
        rep.cert = cert
        if cert is not None:
            rep.C = cert.C
    S = gen_set(A, rep.C, cap)
    rep.witness = segment_search(S, 1, cap)
    rep.holds = rep.witness is not None and segment_holds(S, rep.witness)
    return rep
