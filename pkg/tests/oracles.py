"""Slow, independent reference implementations used only by the tests.

Nothing here calls into sumprod except to read a ring's parameters and its
residue polynomial; elements are plain nested lists c[j][i] meaning
sum c[j][i] x^i y^j with y^e = p and g(x) = 0.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import product


class PolyRing:
    def __init__(self, p, f, e, N, g):
        self.p, self.f, self.e, self.N = p, f, e, N
        self.g = list(g)  # low-order coefficients of the monic residue polynomial
        self.mods = [p ** max(0, -(-(N - j) // e)) for j in range(e)]
        self.q = p ** f

    def reduce(self, c):
        return tuple(tuple(c[j][i] % self.mods[j] for i in range(self.f)) for j in range(self.e))

    def zero(self):
        return self.reduce([[0] * self.f for _ in range(self.e)])

    def add(self, a, b):
        return self.reduce([[a[j][i] + b[j][i] for i in range(self.f)] for j in range(self.e)])

    def neg(self, a):
        return self.reduce([[-a[j][i] for i in range(self.f)] for j in range(self.e)])

    def mul(self, a, b):
        e, f, p = self.e, self.f, self.p
        acc = {}
        for j1, i1, j2, i2 in product(range(e), range(f), range(e), range(f)):
            v = a[j1][i1] * b[j2][i2]
            if v:
                acc[(j1 + j2, i1 + i2)] = acc.get((j1 + j2, i1 + i2), 0) + v
        out = [[0] * (2 * f) for _ in range(e)]
        for (j, i), v in acc.items():
            if j >= e:
                j, v = j - e, v * p
            out[j][i] += v
        for j in range(e):
            for i in range(2 * f - 2, f - 1, -1):
                c = out[j][i]
                if c:
                    out[j][i] = 0
                    for t in range(f):
                        out[j][i - f + t] -= c * self.g[t]
        return self.reduce([row[:f] for row in out])

    def power(self, a, n):
        r = self.one()
        for _ in range(n):
            r = self.mul(r, a)
        return r

    def one(self):
        c = [[0] * self.f for _ in range(self.e)]
        if self.N:
            c[0][0] = 1
        return self.reduce(c)

    def residue_lift(self, alpha):
        """The element whose x-coefficients are the base-p digits of alpha."""
        c = [[0] * self.f for _ in range(self.e)]
        for i in range(self.f):
            c[0][i] = (alpha // self.p ** i) % self.p
        return self.reduce(c)

    def teichmuller(self, alpha):
        z = self.residue_lift(alpha)
        for _ in range(self.N + 1):
            z = self.power(z, self.q)
        return z

    def uniformizer_power(self, n):
        c = [[0] * self.f for _ in range(self.e)]
        c[n % self.e][0] = self.p ** (n // self.e)
        return self.reduce(c)

    def from_digits(self, ds):
        x = self.zero()
        for n, d in enumerate(ds):
            x = self.add(x, self.mul(self.teichmuller(d), self.uniformizer_power(n)))
        return x


def oracle_for(ring) -> PolyRing:
    return PolyRing(ring.p, ring.f, ring.e, ring.N, ring.residue_poly)


def as_lists(arr):
    return tuple(tuple(int(v) for v in row) for row in arr)


# -- sets -----------------------------------------------------------------------------

def brute_sumset(ring, A, B):
    return {int(ring.add(a, b)) for a in A for b in B}


def brute_prodset(ring, A, B):
    return {int(ring.mul(a, b)) for a in A for b in B}


def brute_gen(ring, A, C):
    P = set(A)
    for _ in range(C - 1):
        P = brute_prodset(ring, P, A)
    S = set(P)
    for _ in range(C - 1):
        S = brute_sumset(ring, S, P)
    return {int(ring.sub(x, y)) for x in S for y in S}


def brute_profile(ring, A):
    """Fiber counts if A is regular, else None (straight from the definition)."""
    q, m = ring.q, []
    for n in range(ring.N):
        kids = {}
        for a in A:
            kids.setdefault(a % q ** n, set()).add(a % q ** (n + 1))
        sizes = {len(v) for v in kids.values()}
        if len(sizes) != 1:
            return None
        m.append(sizes.pop())
    return tuple(m)


def brute_segment_ok(ring, S, x, N1, N2):
    q = ring.q
    proj = {s % q ** N2 for s in S}
    g = int(ring.shift(x, N1))
    return all(int(ring.int_multiple(g, n)) % q ** N2 in proj for n in range(ring.size))


# -- measures ---------------------------------------------------------------------------

def entropy(weights):
    return -sum(float(w) * math.log(w) for w in weights if w)


def brute_energy(ring, X, Y):
    return sum(1 for x1 in X for y1 in Y for x2 in X for y2 in Y
               if int(ring.add(x1, y1)) == int(ring.add(x2, y2)))


# -- density ----------------------------------------------------------------------------

def brute_sigma(members, horizon):
    return min(Fraction(sum(1 for k in range(1, n + 1) if k in members), n)
               for n in range(1, horizon))


def brute_subfield(field, B):
    S = set(B) | {0, 1}
    while True:
        new = {int(op(a, b)) for a in S for b in S for op in (field.add, field.sub, field.mul)}
        if new <= S:
            return S
        S |= new
