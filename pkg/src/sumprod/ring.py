"""Exact arithmetic in the quotient rings O/p^N of a p-adic field.

The concrete model: O = W[y]/(y^e - p) where W = Z_p[x]/(g) is the unramified
ring of degree f and g is the lexicographically smallest monic irreducible of
degree f over F_p.  An element of O/p^N is stored as coefficients c[j, i] of
x^i y^j, with c[j, i] taken mod p^M_j, M_j = ceil((N - j) / e).

Every element also has a canonical *index*: write x = sum_n psi(d_n) y^n with
Teichmuller digits psi(d_n) and read the digits d_n (residue field indices)
as a base-q integer, least significant first.  Projection to O/p^k is then
``index % q**k`` and multiplication by the uniformizer is a digit shift.

Arithmetic is vectorized: ring methods accept and return numpy arrays of
indices.  ``RingElem`` wraps a single index for convenience.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 1 << 20


class RingError(ValueError):
    """Invalid ring parameters or mismatched operands."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- polynomials over F_p, as coefficient lists (lowest degree first) --------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _polymod(a: list[int], g: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    dg = len(g) - 1
    inv = pow(g[-1], -1, p)
    while len(a) - 1 >= dg:
        c = a[-1] * inv % p
        shift = len(a) - 1 - dg
        for i, gi in enumerate(g):
            a[shift + i] = (a[shift + i] - c * gi) % p
        _trim(a)
    return a


def _polymulmod(a: list[int], b: list[int], g: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _polymod(out, g, p)


def _polygcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while b:
        a, b = b, _polymod(a, b, p)
    return a


def _x_pow_pk(g: list[int], p: int, k: int) -> list[int]:
    """x^(p^k) mod g."""
    r = _polymod([0, 1], g, p)
    for _ in range(k):
        acc, base, e = [1], r, p
        while e:
            if e & 1:
                acc = _polymulmod(acc, base, g, p)
            base = _polymulmod(base, base, g, p)
            e >>= 1
        r = acc
    return r


def is_irreducible(g: list[int], p: int) -> bool:
    """Rabin's irreducibility test for a monic polynomial over F_p."""
    f = len(g) - 1
    if f < 1:
        return False
    if f == 1:
        return True
    x = [0, 1]
    diff = lambda a, b: _trim([(u - v) % p for u, v in
                               zip(a + [0] * (len(b) - len(a)), b + [0] * (len(a) - len(b)))])
    if diff(_x_pow_pk(g, p, f), _polymod(x, g, p)):
        return False
    for r in _prime_factors(f):
        h = diff(_x_pow_pk(g, p, f // r), _polymod(x, g, p))
        if len(_polygcd(g, h, p)) != 1:
            return False
    return True


def smallest_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Lower coefficients (g_0..g_{f-1}) of the first monic irreducible of degree f.

    Candidates are scanned in increasing order of sum g_i p^i.
    """
    if f == 1:
        return (0,)
    for code in range(p ** f):
        low = [(code // p ** i) % p for i in range(f)]
        if low[0] == 0:
            continue
        if is_irreducible(low + [1], p):
            return tuple(low)
    raise RuntimeError(f"no irreducible polynomial of degree {f} over F_{p}")


# -- ring ---------------------------------------------------------------------

@dataclass(frozen=True)
class RingParams:
    p: int
    f: int = 1
    e: int = 1
    N: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise RingError(f"p={self.p} is not prime")
        if self.f < 1 or self.e < 1 or self.N < 0:
            raise RingError(f"invalid ring parameters {self.as_tuple()}")

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def size(self) -> int:
        return self.q ** self.N

    def precisions(self) -> tuple[int, ...]:
        """M_j = ceil((N - j)/e) for j < e: the p-adic precision of the y^j coefficient."""
        return tuple(max(0, -(-(self.N - j) // self.e)) for j in range(self.e))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.p, self.f, self.e, self.N)

    @classmethod
    def parse(cls, text: str) -> "RingParams":
        parts = [int(t) for t in text.replace(" ", "").split(",")]
        if len(parts) != 4:
            raise RingError(f"expected p,f,e,N but got {text!r}")
        return cls(*parts)


class Ring:
    """The finite ring O/p^N with a fixed canonical model (see module docstring).

    Build through :func:`make_ring`, which caches descriptors.
    """

    def __init__(self, params: RingParams, cap: int = DEFAULT_CAP):
        if params.size > cap:
            raise RingError(f"ring of size {params.size} exceeds enumeration cap {cap}")
        self.params = params
        self.p, self.f, self.e, self.N = params.as_tuple()
        self.q = params.q
        self.size = params.size
        self.cap = cap
        self.residue_poly = smallest_irreducible(self.p, self.f)
        if not is_irreducible(list(self.residue_poly) + [1], self.p):
            raise RuntimeError("residue polynomial failed irreducibility check")
        self.prec = params.precisions()
        self._mod0 = self.p ** self.prec[0] if self.N else 1
        self._moduli = np.array([self.p ** m for m in self.prec], dtype=np.int64)
        # mixed radix code: position (j, i) -> weight, j outer, i inner
        radices = np.repeat(self._moduli, self.f)
        self._radices = radices
        self._weights = np.concatenate([[1], np.cumprod(radices)[:-1]]).astype(np.int64)
        self._teich_coeffs = self._build_teichmuller()
        self._idx2code, self._code2idx = self._build_index_tables()

    def __repr__(self):
        return f"Ring{self.params.as_tuple()}"

    def __eq__(self, other):
        return isinstance(other, Ring) and self.params == other.params

    def __hash__(self):
        return hash(self.params)

    # -- coefficient layer ----------------------------------------------------

    def _to_coeffs(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty(codes.shape + (self.e * self.f,), dtype=np.int64)
        rest = codes.copy()
        for pos, r in enumerate(self._radices):
            out[..., pos] = rest % r
            rest //= r
        return out.reshape(codes.shape + (self.e, self.f))

    def _from_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        c = self._reduce(coeffs).reshape(coeffs.shape[:-2] + (self.e * self.f,))
        return c @ self._weights

    def _reduce(self, coeffs: np.ndarray) -> np.ndarray:
        return np.mod(coeffs, self._moduli[:, None])

    def _mul_coeffs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        e, f, p, mod0 = self.e, self.f, self.p, self._mod0
        shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
        out = np.zeros(shape + (2 * e - 1, 2 * f - 1), dtype=np.int64)
        for j1 in range(e):
            for j2 in range(e):
                if j1 + j2 >= 2 * e - 1:
                    continue
                for i1 in range(f):
                    out[..., j1 + j2, i1:i1 + f] += a[..., j1, i1, None] * b[..., j2, :]
            out %= mod0
        for t in range(2 * e - 2, e - 1, -1):  # y^e = p
            out[..., t - e, :] += p * out[..., t, :]
        out = out[..., :e, :] % mod0
        g = self.residue_poly
        for s in range(2 * f - 2, f - 1, -1):  # x^f = -sum g_i x^i
            top = out[..., :, s].copy()
            for i, gi in enumerate(g):
                if gi:
                    out[..., :, s - f + i] -= gi * top
            out %= mod0
        return self._reduce(out[..., :, :f])

    def _pow_coeffs(self, a: np.ndarray, n: int) -> np.ndarray:
        result = np.zeros_like(a)
        result[..., 0, 0] = 1
        result = self._reduce(result)
        base = a
        while n:
            if n & 1:
                result = self._mul_coeffs(result, base)
            base = self._mul_coeffs(base, base)
            n >>= 1
        return result

    def _build_teichmuller(self) -> np.ndarray:
        """Coefficients (q, e, f) of the Teichmuller lift of every residue element."""
        q, f, p = self.q, self.f, self.p
        z = np.zeros((q, self.e, f), dtype=np.int64)
        alphas = np.arange(q)
        for i in range(f):
            z[:, 0, i] = (alphas // p ** i) % p
        z = self._reduce(z)
        for _ in range(self.N + 2):
            nz = self._pow_coeffs(z, q)
            if np.array_equal(nz, z):
                break
            z = nz
        else:
            raise RuntimeError("Teichmuller iteration did not converge")
        if self.e > 1 and np.any(z[:, 1:, :]):
            raise RuntimeError("Teichmuller lift left the unramified subring")
        return z

    def _build_index_tables(self) -> tuple[np.ndarray, np.ndarray]:
        n, q, e = self.size, self.q, self.e
        idx = np.arange(n, dtype=np.int64)
        coeffs = np.zeros((n, self.e, self.f), dtype=np.int64)
        for level in range(self.N):
            d = (idx // q ** level) % q
            a, b = divmod(level, e)
            coeffs[:, b, :] += self._teich_coeffs[d, 0, :] * self.p ** a
            coeffs[:, b, :] %= self._moduli[b]
        idx2code = self._from_coeffs(coeffs)
        code2idx = np.full(n, -1, dtype=np.int64)
        code2idx[idx2code] = idx
        if np.any(code2idx < 0):
            raise RuntimeError("digit encoding is not a bijection")
        return idx2code, code2idx

    # -- vectorized arithmetic on canonical indices ----------------------------

    def coeffs(self, idx) -> np.ndarray:
        return self._to_coeffs(self._idx2code[np.asarray(idx, dtype=np.int64)])

    def from_coeffs(self, coeffs) -> np.ndarray:
        return self._code2idx[self._from_coeffs(np.asarray(coeffs, dtype=np.int64))]

    def add(self, a, b):
        return self.from_coeffs(self.coeffs(a) + self.coeffs(b))

    def sub(self, a, b):
        return self.from_coeffs(self.coeffs(a) - self.coeffs(b))

    def neg(self, a):
        return self.from_coeffs(-self.coeffs(a))

    def mul(self, a, b):
        return self.from_coeffs(self._mul_coeffs(self.coeffs(a), self.coeffs(b)))

    def power(self, a, n: int):
        return self.from_coeffs(self._pow_coeffs(self.coeffs(a), n))

    def int_multiple(self, a, m):
        """m * a for integer m (broadcasts over both)."""
        m = np.asarray(m, dtype=np.int64)
        return self.from_coeffs(self.coeffs(a) * (m % self._mod0)[..., None, None])

    def from_int(self, v):
        """Image of the integer v under Z -> O/p^N."""
        v = np.asarray(v, dtype=np.int64)
        c = np.zeros(v.shape + (self.e, self.f), dtype=np.int64)
        c[..., 0, 0] = v
        return self.from_coeffs(c)

    def to_int(self, a):
        """Integer representative in [0, p^N) when the ring is Z/p^N."""
        if self.f != 1 or self.e != 1:
            raise RingError("to_int needs an unramified ring of degree 1")
        return self._idx2code[np.asarray(a, dtype=np.int64)]

    def val(self, a):
        """p-adic valuation of indices; val(0) = N."""
        a = np.asarray(a, dtype=np.int64)
        v = np.zeros(a.shape, dtype=np.int64)
        alive = np.ones(a.shape, dtype=bool)
        for n in range(self.N):
            alive &= (a // self.q ** n) % self.q == 0
            v += alive
        return v

    def digits(self, a) -> tuple[int, ...]:
        a = int(a)
        return tuple((a // self.q ** n) % self.q for n in range(self.N))

    def from_digits(self, digits) -> int:
        if len(digits) != self.N or any(not 0 <= d < self.q for d in digits):
            raise RingError(f"bad digit vector {digits!r} for {self}")
        return sum(int(d) * self.q ** n for n, d in enumerate(digits))

    def is_unit(self, a):
        return np.asarray(a) % self.q != 0

    def units(self) -> np.ndarray:
        idx = np.arange(self.size, dtype=np.int64)
        return idx[idx % self.q != 0]

    @property
    def uniformizer(self) -> int:
        return self.q if self.N >= 2 else 0

    @property
    def one(self) -> int:
        return 1 if self.N >= 1 else 0

    def teichmuller(self, alpha):
        """Canonical index of psi(alpha); digits (alpha, 0, ..., 0)."""
        alpha = np.asarray(alpha, dtype=np.int64)
        if np.any((alpha < 0) | (alpha >= self.q)):
            raise RingError("residue element out of range")
        return alpha if self.N else np.zeros_like(alpha)

    def teichmuller_table(self) -> dict[int, np.ndarray]:
        """Residue element -> coefficient array (e, f) of its Teichmuller lift."""
        return {a: self._teich_coeffs[a].copy() for a in range(self.q)}

    def shift(self, a, j: int):
        """Multiply by uniformizer^j: digits move up by j."""
        return (np.asarray(a, dtype=np.int64) * self.q ** j) % self.size

    def project_idx(self, a, k: int):
        return np.asarray(a, dtype=np.int64) % self.q ** k

    def at_level(self, k: int) -> "Ring":
        return make_ring(RingParams(self.p, self.f, self.e, k), self.cap)

    @property
    def residue_field(self) -> "Ring":
        return make_ring(RingParams(self.p, self.f, 1, 1), self.cap)

    def elem(self, index: int) -> "RingElem":
        return RingElem(self, int(index))

    # -- serialization ----------------------------------------------------------

    def encode(self, a: "RingElem") -> int:
        if a.ring != self:
            raise RingError(f"{a} does not live in {self}")
        return a.index

    def decode(self, index: int) -> "RingElem":
        index = int(index)
        if not 0 <= index < self.size:
            raise RingError(f"index {index} out of range for {self}")
        return RingElem(self, index)


@functools.lru_cache(maxsize=64)
def _make_ring(params: RingParams, cap: int) -> Ring:
    return Ring(params, cap)


def make_ring(params: RingParams | tuple, cap: int = DEFAULT_CAP) -> Ring:
    if not isinstance(params, RingParams):
        params = RingParams(*params)
    if params.size > cap:
        raise RingError(f"ring of size {params.size} exceeds enumeration cap {cap}")
    return _make_ring(params, cap)


@dataclass(frozen=True)
class RingElem:
    """One element of O/p^k, identified by its canonical index."""

    ring: Ring
    index: int

    def __post_init__(self):
        if not 0 <= self.index < self.ring.size:
            raise RingError(f"index {self.index} out of range for {self.ring}")

    @property
    def level(self) -> int:
        return self.ring.N

    @property
    def digits(self) -> tuple[int, ...]:
        return self.ring.digits(self.index)

    def _check(self, other: "RingElem") -> None:
        if not isinstance(other, RingElem) or other.ring != self.ring:
            raise RingError("operands live in different rings or levels")

    def __add__(self, other):
        self._check(other)
        return RingElem(self.ring, int(self.ring.add(self.index, other.index)))

    def __sub__(self, other):
        self._check(other)
        return RingElem(self.ring, int(self.ring.sub(self.index, other.index)))

    def __mul__(self, other):
        self._check(other)
        return RingElem(self.ring, int(self.ring.mul(self.index, other.index)))

    def __neg__(self):
        return RingElem(self.ring, int(self.ring.neg(self.index)))

    def __pow__(self, n: int):
        return RingElem(self.ring, int(self.ring.power(self.index, n)))

    def __repr__(self):
        return f"RingElem({self.ring.params.as_tuple()}, {self.index})"


def arith(op: str, a: RingElem, b: RingElem | None = None) -> RingElem:
    if op == "neg":
        return -a
    if b is None:
        raise RingError(f"{op} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise RingError(f"unknown operation {op!r}")


def val(a: RingElem) -> int:
    return int(a.ring.val(a.index))


def project(a: RingElem, k: int) -> RingElem:
    if not 0 <= k <= a.level:
        raise RingError(f"cannot project level {a.level} element to level {k}")
    return RingElem(a.ring.at_level(k), a.index % a.ring.q ** k)


def teichmuller(ring: Ring, alpha: int) -> RingElem:
    return RingElem(ring, int(ring.teichmuller(alpha)))


def from_int(ring: Ring, v: int) -> RingElem:
    return RingElem(ring, int(ring.from_int(v)))
