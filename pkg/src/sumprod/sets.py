"""Subsets of O/p^N as bit-vectors over canonical indices, and the set algebra on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .ring import Ring, RingElem, RingError

DIRECT_PAIR_LIMIT = 1 << 18
DEFAULT_OP_CAP = 1 << 31


class CapExceeded(RuntimeError):
    """A cost guard stopped an enumeration before it finished."""


class RingSet:
    """A subset of a ring, stored as a boolean mask indexed by canonical index."""

    __slots__ = ("ring", "mask", "_card")

    def __init__(self, ring: Ring, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (ring.size,):
            raise RingError(f"mask of shape {mask.shape} does not fit {ring}")
        self.ring = ring
        self.mask = mask
        self.mask.flags.writeable = False
        self._card = int(mask.sum())

    @classmethod
    def from_indices(cls, ring: Ring, indices: Iterable[int]) -> "RingSet":
        mask = np.zeros(ring.size, dtype=bool)
        idx = np.fromiter((int(i) for i in indices), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= ring.size):
            raise RingError(f"index out of range for {ring}")
        mask[idx] = True
        return cls(ring, mask)

    @classmethod
    def from_ints(cls, ring: Ring, values: Iterable[int]) -> "RingSet":
        """Set of images of integers under Z -> O/p^N."""
        vals = np.fromiter((int(v) for v in values), dtype=np.int64)
        return cls.from_indices(ring, ring.from_int(vals) if vals.size else [])

    @classmethod
    def full(cls, ring: Ring) -> "RingSet":
        return cls(ring, np.ones(ring.size, dtype=bool))

    @classmethod
    def empty(cls, ring: Ring) -> "RingSet":
        return cls(ring, np.zeros(ring.size, dtype=bool))

    @classmethod
    def ball(cls, ring: Ring, k: int) -> "RingSet":
        """p^k O reduced mod p^N."""
        k = min(max(k, 0), ring.N)
        mask = np.zeros(ring.size, dtype=bool)
        mask[:: ring.q ** k] = True
        return cls(ring, mask)

    def __len__(self) -> int:
        return self._card

    def __contains__(self, idx) -> bool:
        return bool(self.mask[int(idx)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, RingSet) and self.ring == other.ring
                and np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.ring, self.mask.tobytes()))

    def __repr__(self):
        els = self.elements().tolist()
        shown = els if len(els) <= 12 else els[:12] + ["..."]
        return f"RingSet({self.ring.params.as_tuple()}, {shown})"

    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def issubset(self, other: "RingSet") -> bool:
        _same_ring(self, other)
        return not np.any(self.mask & ~other.mask)

    def __or__(self, other):
        _same_ring(self, other)
        return RingSet(self.ring, self.mask | other.mask)

    def __and__(self, other):
        _same_ring(self, other)
        return RingSet(self.ring, self.mask & other.mask)

    def project(self, k: int) -> "RingSet":
        """pi_{p^k}(A) as a subset of O/p^k."""
        low = self.ring.at_level(k)
        return RingSet.from_indices(low, np.unique(self.elements() % low.size))

    def scale(self, c: int) -> "RingSet":
        """c * A for a ring element index c."""
        return RingSet.from_indices(self.ring, np.unique(self.ring.mul(c, self.elements())))

    def translate(self, c: int) -> "RingSet":
        return RingSet.from_indices(self.ring, self.ring.add(c, self.elements()))

    def negate(self) -> "RingSet":
        return RingSet.from_indices(self.ring, self.ring.neg(self.elements()))

    def lift(self, N: int) -> "RingSet":
        """Preimage of this set in O/p^N (N >= level)."""
        up = self.ring.at_level(N)
        idx = np.arange(up.size)
        return RingSet(up, self.mask[idx % self.ring.size])

    def to_record(self) -> dict:
        return {"ring": list(self.ring.params.as_tuple()),
                "elements": [str(i) for i in self.elements().tolist()]}


def _same_ring(a: RingSet, b: RingSet) -> None:
    if a.ring != b.ring:
        raise RingError(f"sets live in different rings: {a.ring} vs {b.ring}")


# -- sum, difference, product --------------------------------------------------

def _sumset_fft(A: RingSet, B: RingSet) -> RingSet:
    ring = A.ring
    shape = tuple(int(r) for r in ring._radices[::-1])
    fa = np.zeros(ring.size)
    fb = np.zeros(ring.size)
    fa[ring._idx2code[A.elements()]] = 1.0
    fb[ring._idx2code[B.elements()]] = 1.0
    fa, fb = fa.reshape(shape), fb.reshape(shape)
    axes = tuple(range(len(shape)))
    conv = np.fft.irfftn(np.fft.rfftn(fa) * np.fft.rfftn(fb), s=shape, axes=axes).reshape(-1)
    codes = np.flatnonzero(conv > 0.5)
    return RingSet.from_indices(ring, ring._code2idx[codes])


def _pairwise(op, A: RingSet, B: RingSet) -> RingSet:
    ring = A.ring
    a, b = A.elements(), B.elements()
    mask = np.zeros(ring.size, dtype=bool)
    if len(a) > len(b):
        a, b = b, a
        swapped = True
    else:
        swapped = False
    rows = max(1, DIRECT_PAIR_LIMIT // max(len(b), 1))
    for start in range(0, len(a), rows):
        chunk = a[start:start + rows, None]
        res = op(b[None, :], chunk) if swapped else op(chunk, b[None, :])
        mask[res.reshape(-1)] = True
    return RingSet(ring, mask)


def sumset(A: RingSet, B: RingSet, method: str = "auto") -> RingSet:
    _same_ring(A, B)
    if len(A) == 0 or len(B) == 0:
        return RingSet.empty(A.ring)
    if method == "direct" or (method == "auto" and len(A) * len(B) <= DIRECT_PAIR_LIMIT):
        return _pairwise(A.ring.add, A, B)
    return _sumset_fft(A, B)


def diffset(A: RingSet, B: RingSet, method: str = "auto") -> RingSet:
    return sumset(A, B.negate(), method)


def prodset(A: RingSet, B: RingSet, cap: int = DEFAULT_OP_CAP) -> RingSet:
    _same_ring(A, B)
    if len(A) * len(B) > cap:
        raise CapExceeded(f"product set needs {len(A) * len(B)} multiplications (cap {cap})")
    return _pairwise(A.ring.mul, A, B)


def combine(op: str, A: RingSet, B: RingSet) -> RingSet:
    if op == "sumset":
        return sumset(A, B)
    if op == "diffset":
        return diffset(A, B)
    if op == "prodset":
        return prodset(A, B)
    raise ValueError(f"unknown set operation {op!r}")


def _fold(S: RingSet, C: int, step, neutral: int, cap: int) -> RingSet:
    """C-fold iterate of a binary set operation (exactly C operands)."""
    if C < 1:
        raise ValueError("fold count must be positive")
    if neutral in S:
        # monotone: stop once the iterate stabilizes
        cur = S
        for _ in range(C - 1):
            nxt = step(cur, S, cap)
            if nxt == cur:
                break
            cur = nxt
        return cur
    result, base, n = None, S, C
    while n:
        if n & 1:
            result = base if result is None else step(result, base, cap)
        n >>= 1
        if n:
            base = step(base, base, cap)
    return result


def sum_power(S: RingSet, C: int, cap: int = DEFAULT_OP_CAP) -> RingSet:
    return _fold(S, C, lambda a, b, _: sumset(a, b), 0, cap)


def prod_power(S: RingSet, C: int, cap: int = DEFAULT_OP_CAP) -> RingSet:
    return _fold(S, C, prodset, S.ring.one, cap)


def gen_set(A: RingSet, C: int, cap: int = DEFAULT_OP_CAP) -> RingSet:
    """<A>_C = sum_C prod_C A - sum_C prod_C A (exactly C factors and C summands)."""
    if len(A) == 0:
        raise ValueError("gen_set needs a nonempty set")
    if C < 1:
        raise ValueError("C must be positive")
    D = sum_power(prod_power(A, C, cap), C, cap)
    return diffset(D, D)


# -- regularity -------------------------------------------------------------------

@dataclass(frozen=True)
class GradedProfile:
    """Fiber counts (m_0, ..., m_{N-1}) of a regular set over a residue field of order q.

    x_i = log m_i / log q is kept as the pair (m_i, q); threshold tests are done
    on integers.
    """

    m: tuple[int, ...]
    q: int

    def __post_init__(self):
        if any(not 1 <= mi <= self.q for mi in self.m):
            raise ValueError(f"profile entries must lie in [1, {self.q}]: {self.m}")

    def __len__(self):
        return len(self.m)

    def __iter__(self):
        return iter(self.m)

    @property
    def N(self) -> int:
        return len(self.m)

    def x(self, i: int) -> float:
        return math.log(self.m[i]) / math.log(self.q)

    def log_pairs(self) -> list[tuple[int, int]]:
        return [(mi, self.q) for mi in self.m]

    def size(self, k: int | None = None) -> int:
        """m_0 ... m_{k-1}, the size of the level-k projection."""
        return math.prod(self.m[: self.N if k is None else k])


def level_counts(A: RingSet, n: int) -> np.ndarray:
    """Number of children in pi_{n+1}(A) of each vertex of pi_n(A)."""
    q = A.ring.q
    kids = np.unique(A.elements() % q ** (n + 1))
    counts = np.bincount(kids % q ** n, minlength=q ** n)
    return counts[counts > 0]


def regularity_profile(A: RingSet) -> GradedProfile | None:
    """The profile (m_0, ..., m_{N-1}) of A, or None when A is not regular."""
    if len(A) == 0:
        raise ValueError("regularity of the empty set is undefined")
    m = []
    for n in range(A.ring.N):
        c = level_counts(A, n)
        if c.min() != c.max():
            return None
        m.append(int(c[0]))
    return GradedProfile(tuple(m), A.ring.q)


def regularize(A: RingSet) -> tuple[RingSet, GradedProfile]:
    """Extract a regular subset by dyadic pigeonholing, leaves first.

    At each level the surviving vertices are bucketed by floor(log2 #children);
    the bucket carrying the most leaves is kept (lowest bucket on ties) and
    every kept vertex is trimmed to the bucket's minimum child count, keeping
    the children of smallest canonical index.  Each level loses at most a
    factor 2 * (floor(log2 q) + 1).
    """
    if len(A) == 0:
        raise ValueError("cannot regularize the empty set")
    ring, q = A.ring, A.ring.q
    alive = A.elements()
    m = [0] * ring.N
    for n in range(ring.N - 1, -1, -1):
        kids = np.unique(alive % q ** (n + 1))
        parents = kids % q ** n
        order = np.lexsort((kids, parents))
        kids, parents = kids[order], parents[order]
        _, start, counts = np.unique(parents, return_index=True, return_counts=True)
        buckets = np.floor(np.log2(counts)).astype(np.int64)
        # every surviving child carries the same number of leaves
        weight = np.bincount(buckets, weights=counts)
        chosen = buckets == int(np.argmax(weight))
        mn = int(counts[chosen].min())
        rank = np.arange(len(kids)) - np.repeat(start, counts)
        keep_kid = np.repeat(chosen, counts) & (rank < mn)
        keep = np.isin(alive % q ** (n + 1), kids[keep_kid])
        alive = alive[keep]
        m[n] = mn
    return RingSet.from_indices(ring, alive), GradedProfile(tuple(m), q)


def regularize_bound(size: int, q: int, N: int) -> float:
    """The size guarantee |A| / (2 (floor(log2 q) + 1))^N for regularize."""
    return size / (2 * (q.bit_length())) ** N


# -- graded pieces ------------------------------------------------------------------

def graded(X: RingSet, j: int) -> set[int]:
    """gr_j(X): residues pi_p(x) of all x with p^j x in X, by full enumeration."""
    ring = X.ring
    if not 0 <= j < ring.N:
        raise ValueError(f"grading index {j} outside [0, {ring.N})")
    x = np.arange(ring.size, dtype=np.int64)
    hit = X.mask[ring.shift(x, j)]
    return set(np.unique(x[hit] % ring.q).tolist())


def J(X: RingSet) -> set[int]:
    """Levels j with gr_j(X) not inside {0}: the valuations of nonzero members."""
    els = X.elements()
    els = els[els != 0]
    return set(np.unique(X.ring.val(els)).tolist())


def J_by_grading(X: RingSet) -> set[int]:
    return {j for j in range(X.ring.N) if graded(X, j) - {0}}


# -- arithmetic segments ----------------------------------------------------------------

@dataclass(frozen=True)
class SegmentWitness:
    """pi_{p^N2}(p^N1 Z x) is contained in the projection of the witnessed set."""

    x: RingElem
    N1: int
    N2: int

    @property
    def length(self) -> int:
        return self.N2 - self.N1

    def to_record(self) -> dict:
        return {"x": str(self.x.index), "N1": self.N1, "N2": self.N2}


def projection_depth(S: RingSet) -> np.ndarray:
    """For each ring element, the largest L with pi_L(element) in pi_L(S)."""
    ring = S.ring
    idx = np.arange(ring.size, dtype=np.int64)
    depth = np.zeros(ring.size, dtype=np.int64)
    ok = np.ones(ring.size, dtype=bool)
    els = S.elements()
    for L in range(1, ring.N + 1):
        proj = np.zeros(ring.q ** L, dtype=bool)
        proj[els % ring.q ** L] = True
        ok &= proj[idx % ring.q ** L]
        depth += ok
    return depth


def segment_search(S: RingSet, min_length: int = 1,
                   cap: int = DEFAULT_OP_CAP) -> SegmentWitness | None:
    """Longest arithmetic segment pi_{N2}(p^N1 Z x) inside pi_{N2}(S), x a unit.

    Units are scanned in canonical index order.  The winner maximizes N2 - N1,
    then minimizes N1, then comes first in the scan.  Returns None when the
    best length is below ``min_length``.
    """
    if len(S) == 0:
        raise ValueError("segment search needs a nonempty set")
    ring = S.ring
    depth = projection_depth(S)
    units = ring.units()
    order = ring.p ** ring.prec[0]  # additive exponent of the ring
    if len(units) * order * ring.N > cap:
        raise CapExceeded("segment scan exceeds cost cap")
    mult = np.arange(order, dtype=np.int64)
    best = None  # (length, -N1, -unit_pos)
    rows = max(1, DIRECT_PAIR_LIMIT // order)
    for N1 in range(ring.N):
        gens = ring.shift(units, N1)
        for start in range(0, len(units), rows):
            g = gens[start:start + rows]
            multiples = ring.int_multiple(g[:, None], mult[None, :])
            n2 = depth[multiples].min(axis=1)
            length = n2 - N1
            pos = int(np.argmax(length))
            cand = (int(length[pos]), -N1, -(start + pos))
            if best is None or cand > best:
                best = cand
    length, negN1, negpos = best
    if length < max(min_length, 1):
        return None
    return SegmentWitness(ring.elem(int(units[-negpos])), -negN1, -negN1 + length)


def segment_holds(S: RingSet, w: SegmentWitness) -> bool:
    """Independent check of a witness by listing the segment at level N2."""
    ring = S.ring
    low = ring.at_level(w.N2)
    g = int(low.shift(w.x.index % low.size, w.N1))
    seg, cur = {0}, g
    while cur != 0:
        seg.add(cur)
        cur = int(low.add(cur, g))
    proj = set((S.elements() % low.size).tolist())
    return seg <= proj
