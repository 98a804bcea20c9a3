"""Schnirelmann density, Mann sums and the combinatorics of x_i profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .sets import GradedProfile


@dataclass(frozen=True)
class TailSet:
    """finite ∪ [t, ∞) when ``tail`` is set, otherwise just ``finite``.

    Always kept in normal form: finite ⊆ [0, t) and, with a tail, t - 1 is
    not a member (so t is the least threshold).
    """

    finite: frozenset[int]
    t: int
    tail: bool = True

    def __post_init__(self):
        if self.t < 0 or any(n < 0 or n >= self.t for n in self.finite):
            raise ValueError("finite part must lie in [0, t)")

    @classmethod
    def make(cls, finite: Iterable[int], t: int | None = None) -> "TailSet":
        """Normalize; ``t=None`` means a finite set."""
        finite = set(finite)
        if t is None:
            return cls(frozenset(finite), max(finite, default=-1) + 1, False)
        finite = {n for n in finite if n < t}
        while t > 0 and t - 1 in finite:
            t -= 1
            finite.discard(t)
        return cls(frozenset(finite), t, True)

    @classmethod
    def naturals(cls) -> "TailSet":
        return cls(frozenset(), 0, True)

    def __contains__(self, n: int) -> bool:
        return n in self.finite or (self.tail and n >= self.t)

    def is_everything(self) -> bool:
        return self.tail and self.t == 0

    def members_below(self, bound: int) -> list[int]:
        return [n for n in range(bound) if n in self]

    def count(self, n: int) -> int:
        """|X ∩ [1, n]|."""
        c = sum(1 for x in self.finite if 1 <= x <= n)
        if self.tail and n >= max(self.t, 1):
            c += n - max(self.t, 1) + 1
        return c

    def __add__(self, other: "TailSet") -> "TailSet":
        if not self.finite and not self.tail or not other.finite and not other.tail:
            raise ValueError("sumset with the empty set")
        lo_x, lo_y = min(self.members_below(self.t + 1)), min(other.members_below(other.t + 1))
        if self.tail and other.tail:
            T = min(self.t + lo_y, other.t + lo_x)
        elif self.tail:
            T = self.t + lo_y
        elif other.tail:
            T = other.t + lo_x
        else:
            T = None
        bound = T if T is not None else self.t + other.t
        xs, ys = self.members_below(bound), set(other.members_below(bound))
        found = {x + y for x in xs for y in ys if x + y < bound}
        return TailSet.make(found, T)


def kfold_sum(X: TailSet, k: int) -> TailSet:
    if k < 1:
        raise ValueError("k must be positive")
    out = X
    for _ in range(k - 1):
        out = out + X
    return out


def schnirelmann(X: TailSet) -> Fraction:
    """inf_{n >= 1} |X ∩ [1, n]| / n.

    Past the threshold the ratio 1 + (c - t + 1)/n is nondecreasing, so the
    window [1, max(2t, 1)] attains the infimum; finite sets have density 0.
    """
    if not X.tail:
        return Fraction(0)
    return min(Fraction(X.count(n), n) for n in range(1, max(2 * X.t, 1) + 1))


def mann_check(X: TailSet, Y: TailSet) -> tuple[bool, int | None]:
    """Mann's inequality for X + Y; on failure the n with the offending ratio."""
    if 0 not in X or 0 not in Y:
        raise ValueError("Mann's theorem needs 0 in both sets")
    S = X + Y
    if S.is_everything():
        return True, None
    target = schnirelmann(X) + schnirelmann(Y)
    for n in range(1, max(2 * S.t, 1) + 1):
        if Fraction(S.count(n), n) < target:
            return False, n
    if not S.tail and target > 0:
        # finite sums have density 0; the ratio drops below target eventually
        return False, math.ceil((S.count(S.t) + 1) / target)
    return True, None


# -- x_i profiles ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProfileStats:
    profile: GradedProfile
    B: frozenset[int]
    T: frozenset[int]

    @property
    def N(self) -> int:
        return self.profile.N

    @property
    def q(self) -> int:
        return self.profile.q

    def x(self, i: int) -> float:
        return self.profile.x(i)


def profile_stats(profile: GradedProfile) -> ProfileStats:
    """B = {i : x_i != 0} and T = {i : x_i >= 1/2}, both decided on integers."""
    B = frozenset(i for i, m in enumerate(profile.m) if m != 1)
    T = frozenset(i for i, m in enumerate(profile.m) if m * m >= profile.q)
    return ProfileStats(profile, B, T)


def D_T(T: Iterable[int], N: int, k: int) -> int:
    """|(T ∩ [0, N-1-k]) \\ (T - k)|."""
    T = set(T)
    return len({i for i in T if i <= N - 1 - k} - {t - k for t in T})


def D_T_shifted(T: Iterable[int], N: int, k: int) -> int:
    """|((T + k) ∩ [0, N-1]) \\ T|, the same count seen from the other end."""
    T = set(T)
    return len({t + k for t in T if t + k <= N - 1} - T)


def avg_DT(stats: ProfileStats) -> Fraction:
    return Fraction(sum(D_T(stats.T, stats.N, k) for k in range(stats.N)), stats.N)


def average_D_report(stats: ProfileStats, eps: Fraction) -> dict:
    """Both normalizations of the averaged D_T bound, measured, not asserted."""
    N = stats.N
    total = sum(D_T(stats.T, N, k) for k in range(N))
    ds = [D_T(stats.T, N, k) for k in range(N)]
    lo = math.ceil(N * eps ** 3 / 32)
    j0 = max(range(lo, N), key=lambda j: (ds[j], -j), default=None)
    return {
        "sum_DT": total,
        "avg_DT": Fraction(total, N),
        "N_eps3_over_16": N * eps ** 3 / 16,
        "N2_eps3_over_16": N * N * eps ** 3 / 16,
        "j0": j0,
        "DT_j0": ds[j0] if j0 is not None else None,
        "N_eps3_over_32": N * eps ** 3 / 32,
    }


def satisfies_hypotheses(profile: GradedProfile, eps: Fraction, delta: Fraction) -> bool:
    """x_0, x_1 != 0 and sum_{i<l} x_i >= l eps for every integer l in [N delta, N].

    With eps = a/b the second test is (m_0 ... m_{l-1})^b >= q^(l a).
    """
    eps, delta = Fraction(eps), Fraction(delta)
    m, q, N = profile.m, profile.q, profile.N
    if N < 2 or m[0] == 1 or m[1] == 1:
        return False
    a, b = eps.numerator, eps.denominator
    for l in range(max(0, math.ceil(N * delta)), N + 1):
        if math.prod(m[:l]) ** b < q ** (l * a):
            return False
    return True


def min_summands(B: Iterable[int], upto: int) -> list[list[int] | None]:
    """For each n < upto, a shortest list of nonzero elements of B summing to n."""
    coins = sorted({b for b in B if b > 0})
    best: list[int | None] = [0] + [None] * (upto - 1)
    last: list[int] = [0] * upto
    for n in range(1, upto):
        for c in coins:
            if c > n:
                break
            prev = best[n - c]
            if prev is not None and (best[n] is None or prev + 1 < best[n]):
                best[n], last[n] = prev + 1, c
    out: list[list[int] | None] = []
    for n in range(upto):
        if best[n] is None:
            out.append(None)
            continue
        parts, r = [], n
        while r:
            parts.append(last[r])
            r -= last[r]
        out.append(parts)
    return out


def large_interval_cover(stats: ProfileStats, eps: Fraction,
                         delta: Fraction) -> tuple[bool, dict[int, list[int]] | int]:
    """Is every integer in (ceil(1/eps) delta N, N) a sum of at most 3 ceil(1/eps) elements of B?

    Returns (True, decompositions) or (False, first uncovered integer).
    """
    eps, delta = Fraction(eps), Fraction(delta)
    N, c = stats.N, math.ceil(1 / eps)
    budget = 3 * c
    lo = c * delta * N
    start = math.floor(lo) + 1
    sols = min_summands(stats.B, N)
    cover: dict[int, list[int]] = {}
    for n in range(start, N):
        s = sols[n]
        if s is None or len(s) > budget:
            return False, n
        cover[n] = s
    return True, cover
