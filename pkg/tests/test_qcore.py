import math
import random
from fractions import Fraction

import pytest

from padic_rmt.qcore import (
    DiscreteLaw,
    conjugate,
    dinf,
    fraction_from_str,
    fraction_to_str,
    nlam,
    normalize_partition,
    qbinom,
    qpoch,
)
from helpers import rand_partition


def test_conjugate_examples():
    assert conjugate(()) == ()
    assert conjugate((4, 2, 2, 1)) == (4, 3, 1, 1)
    assert conjugate((1, 1, 1)) == (3,)


def test_conjugate_involution_random():
    rng = random.Random(7)
    for _ in range(10_000):
        lam = rand_partition(rng, 30, 12)
        assert conjugate(conjugate(lam)) == lam


def test_qpoch_finite_exact():
    assert qpoch(Fraction(1, 2), Fraction(1, 2), 0) == 1
    assert qpoch(Fraction(1, 2), Fraction(1, 2), 2) == Fraction(3, 8)
    # functional equation (a;t)_{m+n} = (a;t)_m (a t^m; t)_n
    rng = random.Random(3)
    for _ in range(50):
        a = Fraction(rng.randint(-4, 4), rng.randint(1, 5))
        t = Fraction(rng.randint(-3, 3), 7)
        m, n = rng.randint(0, 10), rng.randint(0, 10)
        assert qpoch(a, t, m + n) == qpoch(a, t, m) * qpoch(a * t**m, t, n)


def test_qpoch_infinite_matches_brute_force():
    val = qpoch(0.5, 0.5, math.inf, tol=1e-15)
    brute = 1.0
    for i in range(60):
        brute *= 1 - 0.5 * 0.5**i
    assert abs(val - brute) < 1e-14


def test_qpoch_infinite_rejects_bad_t():
    with pytest.raises(ValueError):
        qpoch(0.5, 1.0, math.inf)


def test_qbinom():
    t = Fraction(1, 2)
    assert qbinom(2, 1, Fraction(0, 1) + t) == 1 + t
    for n in range(6):
        assert qbinom(n, 0, t) == 1
    # direct factorial-quotient oracle
    num = qpoch(t, t, 4)
    den = qpoch(t, t, 2) ** 2
    assert qbinom(4, 2, t) == num / den
    assert qbinom(3, 5, t) == 0
    assert qbinom(3, -1, t) == 0


def test_qbinom_symmetry_exact():
    rng = random.Random(11)
    for _ in range(200):
        a = rng.randint(0, 10)
        b = rng.randint(-2, 12)
        t = Fraction(rng.randint(1, 5), 7)
        assert qbinom(a, b, t) == qbinom(a, a - b, t)


def test_nlam():
    assert nlam(()) == 0
    assert nlam((2, 1)) == 1
    lam = (4, 2, 2, 1)
    assert nlam(lam) == 9
    # cross-check against the conjugate-binomial formula
    rng = random.Random(5)
    for _ in range(300):
        lam = rand_partition(rng, 12, 8)
        alt = sum(c * (c - 1) // 2 for c in conjugate(lam))
        assert nlam(lam) == alt


def test_dinf_basic():
    m = DiscreteLaw({(0,): 0.5, (1,): 0.5})
    assert dinf(m, m) == 0
    a = DiscreteLaw({(0,): 1.0})
    b = DiscreteLaw({(1,): 1.0})
    assert dinf(a, b) == 1
    m1 = DiscreteLaw({(0,): 0.2, (1,): 0.5, (2,): 0.3})
    m2 = DiscreteLaw({(0,): 0.1, (1,): 0.6, (3,): 0.3})
    assert dinf(m1, m2) == pytest.approx(0.3)


def test_dinf_triangle_inequality():
    rng = random.Random(13)
    for _ in range(200):
        support = [(x,) for x in range(4)]

        def rand_law():
            w = [rng.random() for _ in support]
            s = sum(w)
            return DiscreteLaw({k: v / s for k, v in zip(support, w)})

        a, b, c = rand_law(), rand_law(), rand_law()
        assert dinf(a, c) <= dinf(a, b) + dinf(b, c) + 1e-12


def test_dinf_length_mismatch():
    a = DiscreteLaw({(0,): 1.0})
    b = DiscreteLaw({(1, 0): 1.0})
    with pytest.raises(ValueError):
        dinf(a, b)


def test_partition_validation():
    with pytest.raises(ValueError):
        normalize_partition((1, 2))
    with pytest.raises(ValueError):
        normalize_partition((1, -1))
    assert normalize_partition((3, 1, 0, 0)) == (3, 1)


def test_fraction_round_trip():
    x = Fraction(-22, 7)
    assert fraction_from_str(fraction_to_str(x)) == x
