"""Exact Hall-Littlewood / q-Whittaker machinery.

Branching coefficients, principal and skew-principal specializations, the
mixed exponential+alpha specialization of the dual polynomials via a tableau
DP, one-box transition rates, and numerical evaluation of q-Whittaker Laurent
polynomials at complex points.

Everything here is exact over ``fractions.Fraction`` unless float/complex
inputs are passed in.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .qcore import (
    Scalar,
    conjugate,
    contains,
    horizontal_strip,
    interlaces,
    nlam,
    normalize_partition,
    qbinom,
    qpoch,
    weight,
)

Partition = Tuple[int, ...]
Signature = Tuple[int, ...]


def _mults(parts: Sequence[int]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for x in parts:
        out[x] = out.get(x, 0) + 1
    return out


def psi_hl(lam: Signature, mu: Signature, t: Scalar) -> Scalar:
    """One-variable branching coefficient of P, Hall-Littlewood case.

    With ``len(mu) == len(lam) - 1`` both arguments are signatures and the
    multiplicity product runs over all integers, making the value invariant
    under shifting both arguments by a constant.  Otherwise both arguments
    are treated as partitions and only positive part values contribute.
    Returns 0 when ``mu`` does not interlace below ``lam``.
    """
    lam, mu = tuple(lam), tuple(mu)
    if len(mu) == len(lam) - 1:
        if not interlaces(mu, lam):
            return Fraction(0)
        positive_only = False
    else:
        lam, mu = normalize_partition(lam), normalize_partition(mu)
        if not horizontal_strip(mu, lam):
            return Fraction(0)
        positive_only = True
    ml, mm = _mults(lam), _mults(mu)
    out: Scalar = Fraction(1)
    for i, m_mu in mm.items():
        if positive_only and i <= 0:
            continue
        if m_mu == ml.get(i, 0) + 1:
            out = out * (1 - t**m_mu)
    return out


def phi_hl(lam: Partition, mu: Partition, t: Scalar) -> Scalar:
    """One-variable branching coefficient of Q, Hall-Littlewood case."""
    lam, mu = normalize_partition(lam), normalize_partition(mu)
    if not horizontal_strip(mu, lam):
        return Fraction(0)
    ml, mm = _mults(lam), _mults(mu)
    out: Scalar = Fraction(1)
    for i, m_lam in ml.items():
        if i > 0 and m_lam == mm.get(i, 0) + 1:
            out = out * (1 - t**m_lam)
    return out


def psi_qw(lam: Signature, mu: Signature, q: Scalar) -> Scalar:
    """One-variable branching coefficient of P, q-Whittaker case.

    The Gaussian-binomial product is valid verbatim for signatures with
    ``len(mu) == len(lam) - 1``; partitions may be passed at any lengths.
    """
    lam, mu = tuple(lam), tuple(mu)
    if len(mu) == len(lam) - 1:
        if not interlaces(mu, lam):
            return Fraction(0)
    else:
        lam = normalize_partition(lam)
        mu = normalize_partition(mu)
        if not horizontal_strip(mu, lam):
            return Fraction(0)
        if not lam:
            return Fraction(1)
        mu = mu + (0,) * (len(lam) - len(mu))
        lam = lam + (0,)
    out: Scalar = Fraction(1)
    for i in range(len(mu)):
        out = out * qbinom(lam[i] - lam[i + 1], lam[i] - mu[i], q)
    return out


def phi_qw(lam: Partition, mu: Partition, q: Scalar) -> Scalar:
    """One-variable branching coefficient of Q, q-Whittaker case."""
    lam, mu = normalize_partition(lam), normalize_partition(mu)
    if not horizontal_strip(mu, lam):
        return Fraction(0)
    if not lam:
        return Fraction(1)
    mu_p = mu + (0,) * (len(lam) - len(mu))
    out: Scalar = 1 / qpoch(q, q, lam[0] - mu_p[0])
    for i in range(len(lam) - 1):
        out = out * qbinom(mu_p[i] - mu_p[i + 1], mu_p[i] - lam[i + 1], q)
    return out


def _f_ratio(a_pow: int, x: int, y: int, q: Scalar, t: Scalar) -> Scalar:
    """f(t^a q^x) / f(t^a q^y) for f(u) = (tu;q)_inf / (qu;q)_inf, as a finite product."""
    if x == y:
        return Fraction(1)
    if x > y:
        return 1 / _f_ratio(a_pow, y, x, q, t)
    num: Scalar = Fraction(1)
    den: Scalar = Fraction(1)
    for r in range(y - x):
        num = num * (1 - t ** (a_pow + 1) * q ** (x + r))
        den = den * (1 - t**a_pow * q ** (x + 1 + r))
    return num / den


def psi_macdonald(lam: Partition, mu: Partition, q: Scalar, t: Scalar) -> Scalar:
    """General two-parameter branching coefficient for P (finite-product form).

    Used as an independent oracle for the specialized formulas above.
    """
    lam, mu = normalize_partition(lam), normalize_partition(mu)
    if not horizontal_strip(mu, lam):
        return Fraction(0)
    n = len(lam)
    lam_p = lam + (0,) * (n + 1 - len(lam))
    mu_p = mu + (0,) * (n + 1 - len(mu))
    out: Scalar = Fraction(1)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            a = j - i
            out = out * _f_ratio(a, mu_p[i - 1] - mu_p[j - 1], lam_p[i - 1] - mu_p[j - 1], q, t)
            out = out * _f_ratio(a, lam_p[i - 1] - lam_p[j], mu_p[i - 1] - lam_p[j], q, t)
    return out


def phi_macdonald(lam: Partition, mu: Partition, q: Scalar, t: Scalar) -> Scalar:
    """General two-parameter branching coefficient for Q (finite-product form).

    The product range must run to len(lam): with the shorter range the value
    degenerates on one-row skew shapes, contradicting Q = b * P.
    """
    lam, mu = normalize_partition(lam), normalize_partition(mu)
    if not horizontal_strip(mu, lam):
        return Fraction(0)
    n = len(lam)
    lam_p = lam + (0,) * (n + 1 - len(lam))
    mu_p = mu + (0,) * (n + 1 - len(mu))
    out: Scalar = Fraction(1)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            a = j - i
            out = out * _f_ratio(a, lam_p[i - 1] - lam_p[j - 1], lam_p[i - 1] - mu_p[j - 1], q, t)
            out = out * _f_ratio(a, mu_p[i - 1] - mu_p[j], mu_p[i - 1] - lam_p[j], q, t)
    return out


def b_lam_qw(lam: Partition, q: Scalar) -> Scalar:
    """Dual normalization Q = b * P in the q-Whittaker case: prod_i 1/(q;q)_{gap_i}."""
    lam = normalize_partition(lam)
    out: Scalar = Fraction(1)
    for i in range(len(lam)):
        nxt = lam[i + 1] if i + 1 < len(lam) else 0
        out = out / qpoch(q, q, lam[i] - nxt)
    return out


def b_lam_hl(lam: Partition, t: Scalar) -> Scalar:
    """Dual normalization in the Hall-Littlewood case: prod_i (t;t)_{m_i(lam)}."""
    lam = normalize_partition(lam)
    out: Scalar = Fraction(1)
    for _, m in _mults(lam).items():
        out = out * qpoch(t, t, m)
    return out


def b_lam_macdonald(lam: Partition, q: Scalar, t: Scalar) -> Scalar:
    """Arm/leg product for the dual normalization; oracle for the two special cases."""
    lam = normalize_partition(lam)
    lamc = conjugate(lam)
    out: Scalar = Fraction(1)
    for i in range(1, len(lam) + 1):
        for j in range(1, lam[i - 1] + 1):
            arm = lam[i - 1] - j
            leg = lamc[j - 1] - i
            out = out * (1 - q**arm * t ** (leg + 1)) / (1 - q ** (arm + 1) * t**leg)
    return out


def principal_P(lam: Partition, u: Scalar, n_vars: Optional[int], t: Scalar) -> Scalar:
    """P specialized at the geometric alphabet u, ut, ..., ut^(n_vars-1); HL case.

    ``n_vars=None`` means the infinite alphabet u, ut, ut^2, ...; the finite
    alphabet ratio of Pochhammers then degenerates to 1.
    """
    lam = normalize_partition(lam)
    ell = len(lam)
    if n_vars is not None and ell > n_vars:
        raise ValueError(f"partition length {ell} exceeds variable count {n_vars}")
    out: Scalar = u ** weight(lam) * t ** nlam(lam)
    if n_vars is not None:
        out = out * qpoch(t, t, n_vars) / qpoch(t, t, n_vars - ell)
    for _, m in _mults(lam).items():
        out = out / qpoch(t, t, m)
    return out


def skew_principal_P(lam: Partition, mu: Partition, u: Scalar, t: Scalar) -> Scalar:
    """Skew P at the infinite geometric alphabet u, ut, ...; HL case.

    Column-statistics product; 0 unless mu is contained in lam.  Written as
    P_lam(1,t,...) times per-column correction ratios, the form in which the
    quotient is actually used downstream.
    """
    lam, mu = normalize_partition(lam), normalize_partition(mu)
    if not contains(lam, mu):
        return Fraction(0)
    lc, mc = conjugate(lam), conjugate(mu)
    width = len(lc)
    lc_p = lc + (0,)
    mc_p = mc + (0,) * (width + 1 - len(mc))
    out: Scalar = u ** (weight(lam) - weight(mu)) * principal_P(lam, Fraction(1), None, t)
    for x in range(width):
        d = lc_p[x] - mc_p[x]
        out = out * t ** (d * (d - 1) // 2 - lc_p[x] * (lc_p[x] - 1) // 2)
        gap = mc_p[x] - mc_p[x + 1]
        for r in range(gap):
            out = out * (1 - t ** (1 + d + r))
    return out


# ---------------------------------------------------------------------------
# Mixed exponential (gamma) + single-alpha specialization of Q, by tableau DP.
# ---------------------------------------------------------------------------

_chain_weight_cache: Dict[Tuple[Partition, int, Scalar], Fraction] = {}


def _phi_one_box(new_lam: Partition, row: int, t: Scalar) -> Scalar:
    """phi for adding one box whose row now has value new_lam[row]."""
    v = new_lam[row]
    m_v = sum(1 for x in new_lam if x == v)
    return 1 - t**m_v


def chain_weight(lam: Partition, c: int, t: Scalar) -> Fraction:
    """Sum over standard skew tableaux of lam/(c) of the product of one-box phi's.

    Computed by DP over the sublattice of partitions between (c) and lam,
    adding one box per step; never enumerates tableaux explicitly.  Memoized
    per (lam, c, t).
    """
    lam = normalize_partition(lam)
    key = (lam, c, t)
    if key in _chain_weight_cache:
        return _chain_weight_cache[key]
    if c > (lam[0] if lam else 0):
        raise ValueError("row (c) not contained in lam")
    start = normalize_partition((c,))
    table: Dict[Partition, Scalar] = {start: Fraction(1)}
    total = weight(lam)
    for _ in range(total - c):
        nxt: Dict[Partition, Scalar] = {}
        for shape, w in table.items():
            if w == 0:
                continue
            shape_l = list(shape)
            rows = len(shape_l)
            for r in range(rows + 1):
                if r < rows:
                    new_val = shape_l[r] + 1
                    if r > 0 and new_val > shape_l[r - 1]:
                        continue
                    cand = tuple(shape_l[:r] + [new_val] + shape_l[r + 1:])
                else:
                    cand = tuple(shape_l + [1])
                if not contains(lam, cand):
                    continue
                nxt[cand] = nxt.get(cand, Fraction(0)) + w * _phi_one_box(cand, r, t)
        table = nxt
    result = table.get(lam, Fraction(0))
    _chain_weight_cache[key] = result
    return result


def debug_dump_chain_tables() -> str:
    """JSON dump of the memoized tableau-DP results (shape, cut, t) -> weight."""
    import json

    entries = [
        {"shape": list(lam), "cut": c, "t": str(t),
         "weight": f"{w.numerator}/{w.denominator}"}
        for (lam, c, t), w in sorted(_chain_weight_cache.items(),
                                     key=lambda kv: (kv[0][0], kv[0][1]))
    ]
    return json.dumps(entries)


def q_gamma_alpha_coeffs(lam: Partition, a: Scalar, t: Scalar) -> Dict[int, Fraction]:
    """Exact coefficients of the mixed specialization of Q as a polynomial.

    Returns {n: coeff} such that Q_lam(gamma(g), alpha(a); 0, t) equals
    sum_n coeff_n * (g/(1-t))^n.  The alpha part enters through single-row
    shapes only; phi_(c) = (1-t) for every c >= 1 (one-variable dual
    branching), and the remaining boxes are filled by the tableau DP.
    """
    lam = normalize_partition(lam)
    tot = weight(lam)
    out: Dict[int, Fraction] = {}
    cmax = lam[0] if lam else 0
    for c in range(cmax + 1):
        w = chain_weight(lam, c, t)
        if w == 0:
            continue
        phi_c = Fraction(1) if c == 0 else (1 - t)
        n = tot - c
        coeff = phi_c * (a**c) * w / math.factorial(n)
        out[n] = out.get(n, Fraction(0)) + coeff
    return out


def q_gamma_alpha(lam: Partition, g: Scalar, a: Scalar, t: Scalar) -> Scalar:
    """Q_lam(gamma(g), alpha(a); 0, t); exact when all inputs are rational."""
    coeffs = q_gamma_alpha_coeffs(lam, a, t)
    one_minus_t = 1 - t
    if isinstance(g, (int, Fraction)) and isinstance(t, (int, Fraction)):
        y = Fraction(g) / one_minus_t
        return sum((c * y**n for n, c in coeffs.items()), Fraction(0))
    y = float(g) / float(one_minus_t)
    return float(sum(float(c) * y**n for n, c in coeffs.items()))


# ---------------------------------------------------------------------------
# q-Whittaker Laurent polynomials and one-box transitions.
# ---------------------------------------------------------------------------


def qw_laurent_P(mu: Signature, w: Sequence[complex], q: Scalar) -> complex:
    """P_mu(w_1..w_k; q, 0) for a signature mu (negative parts allowed), k <= 3.

    Evaluated as a sum over interlacing chains; negative parts are handled
    through the translation property.  Complexity grows quickly with k, hence
    the guard; the series route serves larger k.
    """
    mu = tuple(int(x) for x in mu)
    k = len(mu)
    if k == 0:
        return 1.0 + 0j
    if k > 3:
        raise ValueError("qw_laurent_P is capped at 3 variables")
    if any(x == 0 for x in w):
        raise ValueError("variables must be nonzero")
    if len(w) != k:
        raise ValueError("variable count must match signature length")
    shift = mu[-1]
    lam = tuple(x - shift for x in mu)
    qf = q

    def rec(sig: Signature, vals: Sequence[complex]) -> complex:
        j = len(sig)
        if j == 1:
            return vals[0] ** sig[0]
        tot = 0.0 + 0j

        def loop(idx: int, nu: List[int]):
            nonlocal tot
            if idx == j - 1:
                nu_t = tuple(nu)
                coef = complex(psi_qw(sig, nu_t, qf))
                if coef != 0:
                    tot += coef * rec(nu_t, vals[:-1]) * vals[-1] ** (sum(sig) - sum(nu_t))
                return
            for v in range(sig[idx + 1], sig[idx] + 1):
                nu.append(v)
                loop(idx + 1, nu)
                nu.pop()

        loop(0, [])
        return tot

    base = rec(lam, list(w))
    if shift == 0:
        return base
    prod = 1.0 + 0j
    for x in w:
        prod *= x
    return base * prod**shift


def pieri_transition(mu: Partition, nu: Partition, n_vars: int, t: Scalar) -> Scalar:
    """One-box transition probability of the Poissonized product chain.

    Nonzero only when nu is mu plus one box; rows sum to 1 exactly over all
    ways of adding a box (length capped at n_vars).
    """
    mu, nu = normalize_partition(mu), normalize_partition(nu)
    if len(mu) > n_vars or len(nu) > n_vars:
        raise ValueError("partition longer than variable count")
    if weight(nu) != weight(mu) + 1 or not contains(nu, mu):
        return Fraction(0)
    ratio = principal_P(nu, Fraction(1), n_vars, t) / principal_P(mu, Fraction(1), n_vars, t)
    return (1 - t) / (1 - t**n_vars) * phi_hl(nu, mu, t) / (1 - t) * ratio
