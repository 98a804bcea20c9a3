"""Digit calculus on the tree of residues: sections, child labels and the carry cocycle."""
from __future__ import annotations

import numpy as np

from .ring import Ring, RingElem, RingError, make_ring, RingParams


def section(xbar: RingElem, N: int) -> RingElem:
    """psi_{k,N}: pad the digit vector of ``xbar`` with zeros up to level N."""
    k = xbar.level
    if k > N:
        raise RingError(f"cannot lift level {k} element to level {N}")
    return RingElem(xbar.ring.at_level(N), xbar.index)


def child_label(xbar: RingElem, alpha: int) -> RingElem:
    """theta_xbar(alpha): the child of ``xbar`` whose next digit is alpha."""
    ring, n = xbar.ring, xbar.level
    up = ring.at_level(n + 1)  # raises RingError if over the cap
    if not 0 <= alpha < ring.q:
        raise RingError(f"residue element {alpha} out of range")
    return RingElem(up, xbar.index + alpha * ring.q ** n)


def carry_defect(ring_k1: Ring, alpha: int, x1: int, x2: int) -> int:
    """psi_k(x1 + psi(alpha) x2) - psi_k(x1) - psi(alpha) psi_k(x2), at level k+1.

    ``x1``, ``x2`` are indices at level k = ring_k1.N - 1; lifting by psi_k
    keeps the index unchanged.
    """
    k = ring_k1.N - 1
    low = ring_k1.at_level(k)
    a = int(low.teichmuller(alpha))
    s = int(low.add(x1, low.mul(a, x2))) if k else 0
    t = int(ring_k1.teichmuller(alpha))
    return int(ring_k1.sub(ring_k1.sub(s, x1), ring_k1.mul(t, x2)))


def cocycle(alpha: int, k: int, x1: RingElem, x2: RingElem) -> int:
    """sigma_{alpha,k}(x1, x2), found by direct search over the residue field.

    The defining property: the carry defect plus psi(sigma) p^k lies in p^{k+1}O.
    Raises RuntimeError if the solution is not unique (cannot happen for a
    correct digit model).
    """
    if x1.ring != x2.ring or x1.level != k:
        raise RingError("cocycle arguments must both live at level k")
    base = x1.ring
    if not 0 <= alpha < base.q:
        raise RingError(f"residue element {alpha} out of range")
    up = make_ring(RingParams(base.p, base.f, base.e, k + 1), base.cap)
    d = carry_defect(up, alpha, x1.index, x2.index)
    candidates = np.arange(up.q, dtype=np.int64)
    terms = up.add(d, up.shift(up.teichmuller(candidates), k))
    hits = candidates[up.val(terms) >= k + 1]
    if len(hits) != 1:
        raise RuntimeError(f"cocycle not unique: {hits.tolist()}")
    return int(hits[0])


def section_defect(ring2: Ring, section_digits) -> tuple[int, int] | None:
    """Look for x1, x2 in F_q with s(x1) + s(x2) != s(x1 + x2).

    ``ring2`` is O/p^2 and s is the section alpha -> alpha + psi(t(alpha)) p,
    given by the second digits ``section_digits[alpha]``.  Returns the first
    violating pair, or None when s is additive.
    """
    q = ring2.q
    field = ring2.residue_field
    t = np.asarray(section_digits, dtype=np.int64)
    s = np.arange(q) + q * t
    a, b = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    lhs = ring2.add(s[a], s[b])
    rhs = s[field.add(a, b)]
    bad = np.argwhere(lhs != rhs)
    if len(bad) == 0:
        return None
    return int(bad[0, 0]), int(bad[0, 1])
