"""Exact probability measures on finite rings and residue fields.

Weights are Fractions; only entropies leave exact arithmetic.  All entropies
use the natural logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .digits import cocycle
from .ring import Ring, RingElem, RingError
from .sets import RingSet


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteMeasure:
    """A probability measure on the canonical indices of ``carrier``."""

    carrier: Ring
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.weights) != self.carrier.size:
            raise MeasureError("weight vector does not match the carrier")
        if any(w < 0 for w in self.weights):
            raise MeasureError("negative weight")
        if sum(self.weights) != 1:
            raise MeasureError("weights do not sum to 1")

    def __getitem__(self, idx: int) -> Fraction:
        return self.weights[int(idx)]

    def support(self) -> np.ndarray:
        return np.array([i for i, w in enumerate(self.weights) if w], dtype=np.int64)

    def as_dict(self) -> dict[int, Fraction]:
        return {i: w for i, w in enumerate(self.weights) if w}

    # constructors

    @classmethod
    def from_dict(cls, carrier: Ring, weights: Mapping[int, Fraction]) -> "FiniteMeasure":
        w = [Fraction(0)] * carrier.size
        for i, v in weights.items():
            w[int(i)] += Fraction(v)
        return cls(carrier, tuple(w))

    @classmethod
    def uniform(cls, carrier: Ring) -> "FiniteMeasure":
        return cls(carrier, (Fraction(1, carrier.size),) * carrier.size)

    @classmethod
    def point(cls, carrier: Ring, idx: int = 0) -> "FiniteMeasure":
        return cls.from_dict(carrier, {idx: 1})

    @classmethod
    def counting(cls, A: RingSet) -> "FiniteMeasure":
        """P_A, the normalized counting measure of a nonempty set."""
        if len(A) == 0:
            raise MeasureError("counting measure of the empty set")
        w = Fraction(1, len(A))
        return cls.from_dict(A.ring, {int(i): w for i in A.elements()})

    @classmethod
    def counting_on(cls, carrier: Ring, indices: Iterable[int]) -> "FiniteMeasure":
        return cls.counting(RingSet.from_indices(carrier, indices))


def _scatter(carrier: Ring, targets: np.ndarray, weights: list[Fraction]) -> FiniteMeasure:
    """Measure with mass weights[i] placed at targets[i] (repeats add up)."""
    if not weights:
        raise MeasureError("no mass to place")
    den = math.lcm(*(w.denominator for w in weights))
    nums = np.array([int(w * den) for w in weights], dtype=object)
    acc = np.zeros(carrier.size, dtype=object)
    np.add.at(acc, targets, nums)
    return FiniteMeasure(carrier, tuple(Fraction(int(v), den) for v in acc))


def pushforward(mu: FiniteMeasure, k: int) -> FiniteMeasure:
    """pi_{p^k}[mu] on O/p^k."""
    low = mu.carrier.at_level(k)
    s = mu.support()
    return _scatter(low, s % low.size, [mu[i] for i in s])


def conditional(mu: FiniteMeasure, xbar: RingElem) -> FiniteMeasure:
    """mu_xbar on the residue field: mass of each child theta_xbar(alpha), renormalized."""
    ring, n = mu.carrier, xbar.level
    if n >= ring.N or xbar.ring != ring.at_level(n):
        raise MeasureError(f"cannot condition a level-{ring.N} measure on level {n}")
    field = ring.residue_field
    q = ring.q
    s = mu.support()
    here = s[s % q ** n == xbar.index]
    total = sum((mu[i] for i in here), Fraction(0))
    if total == 0:
        raise MeasureError(f"conditioning on a null fiber {xbar}")
    digit = (here // q ** n) % q
    return _scatter(field, digit, [mu[i] / total for i in here])


def convolve(mu: FiniteMeasure, nu: FiniteMeasure) -> FiniteMeasure:
    """Pushforward of mu x nu under addition."""
    if mu.carrier != nu.carrier:
        raise MeasureError("convolution of measures on different carriers")
    ring = mu.carrier
    a, b = mu.support(), nu.support()
    sums = ring.add(a[:, None], b[None, :]).reshape(-1)
    w = [mu[i] * nu[j] for i in a for j in b]
    return _scatter(ring, sums, w)


def dilate(c: int, mu: FiniteMeasure) -> FiniteMeasure:
    """Pushforward of mu under x -> c x (c a ring index)."""
    s = mu.support()
    return _scatter(mu.carrier, mu.carrier.mul(int(c), s), [mu[i] for i in s])


def translate(beta: int, nu: FiniteMeasure) -> FiniteMeasure:
    """lambda_beta(nu)(z) = nu(z - beta)."""
    s = nu.support()
    return _scatter(nu.carrier, nu.carrier.add(s, int(beta)), [nu[i] for i in s])


def mixture(parts: list[tuple[Fraction, FiniteMeasure]]) -> FiniteMeasure:
    carrier = parts[0][1].carrier
    acc = [Fraction(0)] * carrier.size
    for a, mu in parts:
        for i, w in mu.as_dict().items():
            acc[i] += a * w
    return FiniteMeasure(carrier, tuple(acc))


def l2_squared(mu: FiniteMeasure) -> Fraction:
    return sum((w * w for w in mu.weights if w), Fraction(0))


# -- entropy ----------------------------------------------------------------------

def _h(ps: Iterable[Fraction]) -> float:
    return -sum(float(p) * math.log(p) for p in ps if p)


def entropy(mu: FiniteMeasure) -> float:
    return _h(mu.weights)


@dataclass(frozen=True)
class Partition:
    """A partition of a carrier given by a block label for every index."""

    labels: tuple[int, ...]

    @classmethod
    def level(cls, ring: Ring, k: int) -> "Partition":
        """The fibers of pi_{p^k} on ``ring``."""
        return cls(tuple((np.arange(ring.size) % ring.q ** k).tolist()))

    @classmethod
    def discrete(cls, ring: Ring) -> "Partition":
        return cls(tuple(range(ring.size)))

    @classmethod
    def from_blocks(cls, size: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        labels = [-1] * size
        for b, block in enumerate(blocks):
            for i in block:
                if labels[i] != -1:
                    raise MeasureError("blocks overlap")
                labels[i] = b
        if -1 in labels:
            raise MeasureError("blocks do not cover the carrier")
        return cls(tuple(labels))

    def refines(self, coarser: "Partition") -> bool:
        """True when every block of self sits inside one block of ``coarser``."""
        seen: dict[int, int] = {}
        for fine, coarse in zip(self.labels, coarser.labels):
            if seen.setdefault(fine, coarse) != coarse:
                return False
        return True


LevelPartition = Partition.level


def block_masses(mu: FiniteMeasure, part: Partition) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for i, w in mu.as_dict().items():
        lab = part.labels[i]
        out[lab] = out.get(lab, Fraction(0)) + w
    return out


def partition_entropy(mu: FiniteMeasure, part: Partition) -> float:
    return _h(block_masses(mu, part).values())


def cond_entropy(mu: FiniteMeasure, fine: Partition, coarse: Partition) -> float:
    """H(mu; fine | coarse), computed block by block from the definition."""
    if not fine.refines(coarse):
        raise MeasureError("conditional entropy needs a refining pair of partitions")
    outer = block_masses(mu, coarse)
    inner: dict[int, dict[int, Fraction]] = {}
    for i, w in mu.as_dict().items():
        d = inner.setdefault(coarse.labels[i], {})
        d[fine.labels[i]] = d.get(fine.labels[i], Fraction(0)) + w
    total = 0.0
    for c, m in outer.items():
        total += float(m) * _h(v / m for v in inner[c].values())
    return total


# -- energy -------------------------------------------------------------------------

def energy(X: RingSet, Y: RingSet) -> int:
    """E(X, Y): quadruples (x1, y1, x2, y2) with x1 + y1 = x2 + y2."""
    if len(X) == 0 or len(Y) == 0:
        raise MeasureError("energy of an empty set")
    if X.ring != Y.ring:
        raise RingError("sets live in different rings")
    sums = X.ring.add(X.elements()[:, None], Y.elements()[None, :]).reshape(-1)
    r = np.bincount(sums, minlength=X.ring.size).astype(object)
    return int(sum(v * v for v in r))


def avg_scalar_energy(A: RingSet, B: RingSet) -> tuple[Fraction, Fraction]:
    """Average over nonzero alpha of ||P_A * alpha P_B||_2^2, and its closed form.

    A and B are subsets of the residue field (a level-1 ring).
    """
    field = A.ring
    if field.N != 1 or B.ring != field:
        raise MeasureError("averaged energy is defined on subsets of the residue field")
    if len(A) == 0 or len(B) == 0:
        raise MeasureError("energy of an empty set")
    PA, PB = FiniteMeasure.counting(A), FiniteMeasure.counting(B)
    units = range(1, field.q)
    empirical = sum((l2_squared(convolve(PA, dilate(a, PB))) for a in units), Fraction(0))
    empirical /= field.q - 1
    a, b = len(A), len(B)
    closed = Fraction(1, a * b) + Fraction((a - 1) * (b - 1), (field.q - 1) * a * b)
    return empirical, closed


def energy_bound(a: int, b: int, q: int) -> Fraction:
    """min(1, 1/(|A||B|) + 1/q)."""
    return min(Fraction(1), Fraction(1, a * b) + Fraction(1, q))


# -- conditional measures of convolutions ------------------------------------------------

def scalar_convolution(A: RingSet, B: RingSet, alpha: int) -> FiniteMeasure:
    """P_A * psi_{0,N}(alpha) P_B."""
    ring = A.ring
    return convolve(FiniteMeasure.counting(A),
                    dilate(int(ring.teichmuller(alpha)), FiniteMeasure.counting(B)))


def convolution_conditional_mixture(A: RingSet, B: RingSet, alpha: int,
                                    xbar: RingElem) -> FiniteMeasure:
    """The mixture of translated field convolutions predicted for the
    conditional measure of P_A * psi(alpha) P_B at xbar."""
    ring, k = A.ring, xbar.level
    low = ring.at_level(k)
    PA, PB = FiniteMeasure.counting(A), FiniteMeasure.counting(B)
    pa, pb = pushforward(PA, k), pushforward(PB, k)
    whole = pushforward(scalar_convolution(A, B, alpha), k)[xbar.index]
    if whole == 0:
        raise MeasureError(f"conditioning on a null fiber {xbar}")
    lift = int(low.teichmuller(alpha))
    parts = []
    for x1 in pa.support():
        for x2 in pb.support():
            if k and int(low.add(x1, low.mul(lift, x2))) != xbar.index:
                continue
            weight = pa[x1] * pb[x2] / whole
            e1, e2 = low.elem(x1), low.elem(x2)
            inner = convolve(conditional(PA, e1), dilate(alpha, conditional(PB, e2)))
            sigma = cocycle(alpha, k, e1, e2)
            parts.append((weight, translate(sigma, inner)))
    return mixture(parts)


def conditional_entropy_gap(A: RingSet, B: RingSet, alpha: int, k: int) -> tuple[float, float]:
    """(H(P_A * psi(alpha) P_B; B_{k+1} | B_k), fiber average of H((P_A)_x1 * alpha (P_B)_x2))."""
    ring = A.ring
    mu = scalar_convolution(A, B, alpha)
    lhs = cond_entropy(mu, Partition.level(ring, k + 1), Partition.level(ring, k))
    PA, PB = FiniteMeasure.counting(A), FiniteMeasure.counting(B)
    low = ring.at_level(k)
    xs1 = np.unique(A.elements() % low.size)
    xs2 = np.unique(B.elements() % low.size)
    total = 0.0
    for x1 in xs1:
        c1 = conditional(PA, low.elem(x1))
        for x2 in xs2:
            total += entropy(convolve(c1, dilate(alpha, conditional(PB, low.elem(x2)))))
    return lhs, total / (len(xs1) * len(xs2))
