"""Shared brute-force oracles for the test suite.

These deliberately avoid the library's own branching-based code paths: the
Hall-Littlewood evaluation below goes through the symmetrization definition,
so agreement with the chain evaluation is a genuine two-route check.
"""

from fractions import Fraction
from itertools import permutations
import random

from padic_rmt.qcore import normalize_partition, qpoch


def rand_partition(rng: random.Random, max_part: int, max_len: int):
    parts = sorted((rng.randint(0, max_part) for _ in range(rng.randint(0, max_len))),
                   reverse=True)
    return normalize_partition(parts)


def hl_factorial(m: int, t: Fraction) -> Fraction:
    out = Fraction(1)
    for j in range(1, m + 1):
        out *= (1 - t**j) / (1 - t)
    return out


def brute_hl_P(lam, xs, t: Fraction) -> Fraction:
    """Symmetrization formula for P_lam(xs; 0, t), exact at distinct rational points."""
    lam = normalize_partition(lam)
    n = len(xs)
    assert len(lam) <= n
    lam_p = list(lam) + [0] * (n - len(lam))
    # v_lam = prod over part values (including 0) of the t-factorial of multiplicities
    mults = {}
    for v in lam_p:
        mults[v] = mults.get(v, 0) + 1
    v_lam = Fraction(1)
    for m in mults.values():
        v_lam *= hl_factorial(m, t)
    total = Fraction(0)
    for perm in permutations(range(n)):
        y = [xs[i] for i in perm]
        term = Fraction(1)
        for i in range(n):
            term *= y[i] ** lam_p[i]
        for i in range(n):
            for j in range(i + 1, n):
                term *= (y[i] - t * y[j]) / (y[i] - y[j])
        total += term
    return total / v_lam


def p_via_chains(lam, xs, branch_psi) -> Fraction:
    """P_lam(xs) as a sum over interlacing chains with one-variable coefficients."""
    lam = normalize_partition(lam)
    if len(xs) == 0:
        return Fraction(1) if not lam else Fraction(0)
    if len(lam) > len(xs):
        return Fraction(0)
    total = Fraction(0)
    for mu in horizontal_strips_below(lam):
        coef = branch_psi(lam, mu)
        if coef == 0:
            continue
        total += coef * p_via_chains(mu, xs[:-1], branch_psi) * xs[-1] ** (sum(lam) - sum(mu))
    return total


def q_via_chains(lam, xs, branch_phi) -> Fraction:
    lam = normalize_partition(lam)
    if len(xs) == 0:
        return Fraction(1) if not lam else Fraction(0)
    total = Fraction(0)
    for mu in horizontal_strips_below(lam):
        coef = branch_phi(lam, mu)
        if coef == 0:
            continue
        total += coef * q_via_chains(mu, xs[:-1], branch_phi) * xs[-1] ** (sum(lam) - sum(mu))
    return total


def horizontal_strips_below(lam):
    """All partitions mu with lam/mu a horizontal strip."""
    lam = normalize_partition(lam)
    if not lam:
        return [()]
    out = []

    def rec(i, prefix):
        if i == len(lam):
            out.append(normalize_partition(tuple(prefix)))
            return
        lo = lam[i + 1] if i + 1 < len(lam) else 0
        hi = min(lam[i], prefix[-1]) if prefix else lam[i]
        for v in range(lo, hi + 1):
            prefix.append(v)
            rec(i + 1, prefix)
            prefix.pop()

    rec(0, [])
    return out


def partitions_up_to(max_weight: int, max_len: int = None):
    """All partitions of weight <= max_weight (optionally bounded length)."""
    result = [()]
    for w in range(1, max_weight + 1):
        result.extend(partitions_of(w, max_len))
    return result


def partitions_of(w: int, max_len: int = None, max_part: int = None):
    out = []

    def rec(remaining, cap, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        if max_len is not None and len(prefix) >= max_len:
            return
        for v in range(min(cap, remaining), 0, -1):
            prefix.append(v)
            rec(remaining - v, v, prefix)
            prefix.pop()

    rec(w, w if max_part is None else min(w, max_part), [])
    return out
