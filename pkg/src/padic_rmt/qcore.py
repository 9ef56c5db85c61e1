"""Partitions, signatures, exact q-series primitives, and the sup-distance on discrete laws.

Partitions are plain tuples of nonnegative ints, weakly decreasing, with
trailing zeros stripped.  Signatures are plain tuples of ints, weakly
decreasing, whose length is meaningful (no normalization).  Exact scalars are
``fractions.Fraction``; floats only appear where an infinite product has to be
truncated.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

Scalar = Union[int, Fraction, float]

INF = math.inf


def normalize_partition(parts: Iterable[int]) -> Tuple[int, ...]:
    """Strip trailing zeros and validate weak decrease / nonnegativity."""
    t = tuple(int(x) for x in parts)
    if any(t[i] < t[i + 1] for i in range(len(t) - 1)):
        raise ValueError(f"not weakly decreasing: {t}")
    if t and t[-1] < 0:
        raise ValueError(f"negative part in partition: {t}")
    while t and t[-1] == 0:
        t = t[:-1]
    return t


def is_signature(parts: Iterable[int]) -> bool:
    t = tuple(parts)
    return all(t[i] >= t[i + 1] for i in range(len(t) - 1))


def conjugate(lam: Tuple[int, ...]) -> Tuple[int, ...]:
    """Conjugate partition: column lengths of the diagram of ``lam``."""
    lam = normalize_partition(lam)
    if not lam:
        return ()
    out = []
    for j in range(1, lam[0] + 1):
        out.append(sum(1 for x in lam if x >= j))
    return tuple(out)


def mult(lam: Tuple[int, ...], i: int) -> int:
    """Number of parts of ``lam`` equal to ``i`` (zero parts do not count unless i == 0)."""
    return sum(1 for x in lam if x == i)


def nlam(lam: Tuple[int, ...]) -> int:
    """Sum of (i-1) * lam_i over rows, 1-indexed."""
    lam = normalize_partition(lam)
    return sum(i * x for i, x in enumerate(lam))


def weight(lam: Iterable[int]) -> int:
    return sum(lam)


def interlaces(mu: Tuple[int, ...], lam: Tuple[int, ...]) -> bool:
    """True iff lam_1 >= mu_1 >= lam_2 >= ... >= mu_{k-1} >= lam_k.

    ``lam`` has length k and ``mu`` length k-1 (signature branching).
    """
    k = len(lam)
    if len(mu) != k - 1:
        raise ValueError("interlacing needs len(mu) == len(lam) - 1")
    return all(lam[i] >= mu[i] >= lam[i + 1] for i in range(k - 1))


def contains(lam: Tuple[int, ...], mu: Tuple[int, ...]) -> bool:
    """Diagram containment mu subset lam, for partitions."""
    mu = normalize_partition(mu)
    lam = normalize_partition(lam)
    if len(mu) > len(lam):
        return False
    return all(mu[i] <= lam[i] for i in range(len(mu)))


def horizontal_strip(mu: Tuple[int, ...], lam: Tuple[int, ...]) -> bool:
    """True iff lam/mu is a horizontal strip (mu interlaces below lam), partitions."""
    mu = normalize_partition(mu)
    lam = normalize_partition(lam)
    padded = mu + (0,) * (len(lam) - len(mu))
    if len(mu) > len(lam):
        return False
    for i in range(len(lam)):
        hi = lam[i]
        lo = lam[i + 1] if i + 1 < len(lam) else 0
        if not (hi >= padded[i] >= lo):
            return False
    return True


def qpoch(a: Scalar, t: Scalar, n: Union[int, float] = INF, tol: float = 1e-15) -> Scalar:
    """q-Pochhammer (a; t)_n = prod_{i=1}^n (1 - a t^(i-1)).

    Finite ``n`` with Fraction/int inputs stays exact.  ``n = math.inf``
    truncates once the geometric tail bound |a| |t|^m / (1-|t|) drops below
    ``tol`` and returns a float; it requires |t| < 1.
    """
    if n is INF or n is None:
        af, tf = float(a), float(t)
        if abs(tf) >= 1:
            raise ValueError("infinite q-Pochhammer needs |t| < 1")
        prod = 1.0
        m = 0
        term = abs(af)
        while term / (1 - abs(tf)) >= tol or m == 0:
            prod *= 1.0 - af * tf**m
            m += 1
            term = abs(af) * abs(tf) ** m
            if m > 100000:
                raise RuntimeError("q-Pochhammer truncation did not converge")
        return prod
    n = int(n)
    if n < 0:
        raise ValueError("finite q-Pochhammer order must be nonnegative")
    prod: Scalar = Fraction(1) if isinstance(a, (int, Fraction)) and isinstance(t, (int, Fraction)) else 1.0
    tp: Scalar = prod * 1  # t^(i-1) accumulator in the same arithmetic
    for i in range(n):
        prod = prod * (1 - a * tp)
        tp = tp * t
    return prod


def qbinom(a: int, b: int, t: Scalar) -> Scalar:
    """Gaussian binomial (t;t)_a / ((t;t)_b (t;t)_{a-b}); 0 outside 0 <= b <= a."""
    if b < 0 or b > a:
        return Fraction(0) if isinstance(t, (int, Fraction)) else 0.0
    num = qpoch(t, t, a)
    den = qpoch(t, t, b) * qpoch(t, t, a - b)
    if isinstance(num, Fraction):
        return num / den
    return num / den


class DiscreteLaw:
    """A finitely supported law over signatures of a fixed length.

    ``probs`` maps tuple -> probability (Fraction or float).  ``exact`` flags
    whether the values are exact rationals; exact complete laws must have
    total mass 1.
    """

    def __init__(self, probs: Mapping[Tuple[int, ...], Scalar], exact: bool = False,
                 complete: bool = False):
        self.probs: Dict[Tuple[int, ...], Scalar] = {}
        length = None
        for key, val in probs.items():
            key = tuple(int(x) for x in key)
            if length is None:
                length = len(key)
            elif len(key) != length:
                raise ValueError("mixed signature lengths in one law")
            if val < 0:
                raise ValueError(f"negative probability at {key}")
            if val != 0:
                self.probs[key] = val
        self.length = length if length is not None else 0
        self.exact = exact
        self.complete = complete
        if exact and complete and sum(self.probs.values()) != 1:
            raise ValueError("exact complete law does not have total mass 1")

    def total_mass(self) -> Scalar:
        return sum(self.probs.values())

    def __getitem__(self, key: Tuple[int, ...]) -> Scalar:
        return self.probs.get(tuple(key), 0)

    def support(self):
        return self.probs.keys()

    @classmethod
    def from_samples(cls, samples: Iterable[Tuple[int, ...]]) -> "DiscreteLaw":
        counts: Dict[Tuple[int, ...], int] = {}
        n = 0
        for s in samples:
            key = tuple(int(x) for x in s)
            counts[key] = counts.get(key, 0) + 1
            n += 1
        if n == 0:
            raise ValueError("no samples")
        return cls({k: v / n for k, v in counts.items()})

    def to_json_dict(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}"
            return float(v)

        return {
            "length": self.length,
            "exact": self.exact,
            "probs": [[list(k), enc(v)] for k, v in sorted(self.probs.items())],
        }


def dinf(m1: DiscreteLaw, m2: DiscreteLaw) -> float:
    """Sup over the union support of |m1{x} - m2{x}|."""
    if m1.length != m2.length and m1.probs and m2.probs:
        raise ValueError(f"signature length mismatch: {m1.length} vs {m2.length}")
    keys = set(m1.support()) | set(m2.support())
    best = 0.0
    for k in keys:
        d = abs(float(m1[k]) - float(m2[k]))
        if d > best:
            best = d
    return best


def fraction_to_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def fraction_from_str(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den) if den else 1)
