"""The limit distribution of shifted column counts: series, closed forms, contour.

The law of the first k columns is a probability measure on weakly decreasing
integer k-tuples, parametrized by t in (0,1) and chi > 0.  Three evaluation
routes are provided and cross-checked in the test suite:

* ``pmf_series``   -- the residue series, any k; alternating coefficient sums
                      are assembled exactly in rational arithmetic with chi
                      symbolic, then evaluated in floats.
* ``pmf_k1/pmf_k2``-- closed forms for k = 1, 2.
* ``pmf_contour``  -- k-fold contour integral over a truncated hook-shaped
                      contour, k <= 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .hallittlewood import q_gamma_alpha_coeffs
from .qcore import Scalar, conjugate, qbinom, qpoch

Signature = Tuple[int, ...]


@dataclass(frozen=True)
class LimitLawParams:
    """Parameters of the limit law plus truncation controls."""

    k: int
    t: Fraction
    chi: float
    series_tol: float = 1e-14
    series_min_terms: int = 5

    def __post_init__(self):
        if not (0 < self.t < 1):
            raise ValueError("t must lie in (0,1)")
        if not self.chi > 0:
            raise ValueError("chi must be positive")
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if self.k < 1:
            raise ValueError("k must be a positive integer")


@dataclass(frozen=True)
class ContourSpec:
    """Truncated-contour quadrature controls.

    The contour is the pair of horizontal rays at imaginary part +-1 joined by
    the right unit semicircle, traversed counterclockwise, with the rays cut
    off at real part -x_max.  Composite Gauss-Legendre panels of width
    ``panel_width`` carry ``nodes_per_panel`` nodes each; one refinement pass
    with halved panels provides the error estimate.

    Quadrature runs in the rescaled coordinates in which the exponential
    factor is exp(chi * z): the raw parametrization piles up to exp(chi *
    t^(L_k) * x_max) on the unit semicircle and destroys every digit by
    cancellation once chi * t^(L_k) is large, while the rescaling (an exact,
    pole-free change of variables) keeps magnitudes of order exp(chi).
    ``x_max`` refers to the rescaled coordinates.
    """

    x_max: float
    panel_width: float = 0.5
    nodes_per_panel: int = 16

    def __post_init__(self):
        if not self.x_max > 1:
            raise ValueError("x_max must exceed 1")


class QuadratureError(RuntimeError):
    pass


def default_contour(t: float, chi: float, l_min: int) -> ContourSpec:
    """Truncation matched to the exp(chi * Re z) decay on the rescaled rays."""
    return ContourSpec(x_max=max(50.0, 40.0 / chi))


# ---------------------------------------------------------------------------
# Residue series
# ---------------------------------------------------------------------------


def _mu_interlacing(L: Sequence[int]) -> Iterable[Tuple[int, ...]]:
    """All (k-1)-tuples interlacing below L."""
    k = len(L)
    if k == 1:
        yield ()
        return
    ranges = [range(L[i + 1], L[i] + 1) for i in range(k - 1)]
    for mu in iter_product(*ranges):
        yield mu


def series_term_poly(L: Sequence[int], m: int, t: Fraction) -> Dict[int, Fraction]:
    """Exact coefficients {n: c_n} of the m-th series term as a polynomial.

    The term multiplying exp(-chi t^d) at depth m = L_k - d equals
    sum_n c_n (t^d chi)^n; everything is assembled in rational arithmetic so
    the alternating inner sum suffers no cancellation error.
    """
    L = tuple(int(x) for x in L)
    k = len(L)
    if any(L[i] < L[i + 1] for i in range(k - 1)):
        raise ValueError("L must be weakly decreasing")
    d = L[-1] - m
    pref = t ** sum((L[i] - d) * (L[i] - d - 1) // 2 for i in range(k))
    pref /= qpoch(t, t, m)
    for i in range(k - 1):
        pref /= qpoch(t, t, L[i] - L[i + 1])
    out: Dict[int, Fraction] = {}
    for mu in _mu_interlacing(L):
        sign = -1 if (sum(L) - sum(mu) - d) % 2 else 1
        coef = Fraction(sign)
        for i in range(k - 1):
            coef *= qbinom(L[i] - L[i + 1], L[i] - mu[i], t)
        if coef == 0:
            continue
        shape = conjugate(tuple(x - d for x in mu))
        qcoeffs = q_gamma_alpha_coeffs(shape, Fraction(1), t)
        for n, c in qcoeffs.items():
            out[n] = out.get(n, Fraction(0)) + pref * coef * c
    return out


def pmf_series_info(params: LimitLawParams, L: Sequence[int]) -> Tuple[float, dict]:
    """Residue-series probability of the length-k marginal hitting L."""
    L = tuple(int(x) for x in L)
    if len(L) != params.k:
        raise ValueError("signature length must equal k")
    t = params.t
    tf = float(t)
    chi = params.chi
    total = 0.0
    small_streak = 0
    m = 0
    last_terms: List[float] = []
    while True:
        d = L[-1] - m
        y = chi * tf**d
        if y < 690:
            poly = series_term_poly(L, m, t)
            val = sum(float(c) * y**n for n, c in poly.items())
            term = math.exp(-y) * val
        else:
            # exp(-y) < 1e-299 annihilates any float-representable polynomial
            term = 0.0
        total += term
        last_terms.append(abs(term))
        if abs(term) < params.series_tol * max(abs(total), 1e-300):
            small_streak += 1
        else:
            small_streak = 0
        m += 1
        if small_streak >= 3 and m >= params.series_min_terms:
            break
        if m > 400:
            raise RuntimeError("series did not satisfy the stopping rule")
    norm = qpoch(tf, tf, math.inf, tol=1e-17)
    value = total / norm
    info = {
        "terms_used": m,
        "est_error": sum(last_terms[-3:]) / norm,
        "method": "series",
    }
    return value, info


def pmf_series(params: LimitLawParams, L: Sequence[int]) -> float:
    return pmf_series_info(params, L)[0]


# ---------------------------------------------------------------------------
# Closed forms for k = 1 and k = 2
# ---------------------------------------------------------------------------


def pmf_k1(t: Scalar, chi: float, x: int, tol: float = 1e-16, min_terms: int = 5) -> float:
    """k = 1 probability at the integer x, by the alternating exponential series."""
    tf = float(t)
    total = 0.0
    poch = 1.0  # (t;t)_m
    tpow = 1.0  # t^binom(m,2)
    sign = 1.0
    m = 0
    streak = 0
    while True:
        expo = chi * tf ** (x - m)
        term = (math.exp(-expo) if expo < 700 else 0.0) * sign * tpow / poch
        total += term
        if abs(term) < tol * max(abs(total), 1e-300):
            streak += 1
        else:
            streak = 0
        m += 1
        if streak >= 3 and m >= min_terms:
            break
        if m > 500:
            raise RuntimeError("k=1 series did not converge")
        tpow *= tf ** (m - 1)
        poch *= 1 - tf**m
        sign = -sign
    return total / qpoch(tf, tf, math.inf, tol=1e-17)


def pmf_k1_mp(t, chi, x: int, dps: int = 60):
    """High-precision k = 1 probability (mpmath), for moment windows where the
    alternating sum cancels catastrophically in doubles."""
    import mpmath as mp

    with mp.workdps(dps):
        tf = mp.mpf(t.numerator) / t.denominator if isinstance(t, Fraction) else mp.mpf(t)
        chif = mp.mpf(chi)
        total = mp.mpf(0)
        m = 0
        streak = 0
        tiny = mp.mpf(10) ** (-dps - 10)
        while True:
            term = (
                mp.e ** (-chif * tf ** (x - m))
                * (-1) ** m
                * tf ** (m * (m - 1) // 2)
                / _qpoch_mp(tf, tf, m, mp)
            )
            total += term
            if abs(term) < tiny * max(abs(total), tiny):
                streak += 1
            else:
                streak = 0
            m += 1
            if streak >= 3 and m >= 5:
                break
            if m > 2000:
                raise RuntimeError("high-precision series did not converge")
        norm = mp.qp(tf)  # (t;t)_inf
        return total / norm


def _qpoch_mp(a, t, n, mp):
    out = mp.mpf(1)
    for i in range(n):
        out *= 1 - a * t**i
    return out


def pmf_k2(t: Scalar, chi: float, L: int, x: int, tol: float = 1e-16,
           min_terms: int = 5) -> float:
    """k = 2 probability at (L + x, L), x >= 0, from the double-sum closed form.

    Inner alternating sums are assembled exactly per depth m, then weighted by
    the exponential factor in floats.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    t = Fraction(t) if not isinstance(t, Fraction) else t
    tf = float(t)
    total = 0.0
    m = 0
    streak = 0
    while True:
        pref = Fraction(-1 if m % 2 else 1) * t ** (m * m + (x - 1) * m + x * (x - 1) // 2)
        y = chi * tf ** (L - m)
        inner = 0.0
        for i in range(x + 1):
            c = Fraction(-1 if (x - i) % 2 else 1) / qpoch(t, t, x - i)
            c *= qbinom(m + i, i, t)
            piece = y ** (i + m) / math.factorial(i + m)
            if i + m >= 1:
                piece += y ** (i + m - 1) / math.factorial(i + m - 1)
            inner += float(c) * piece
        expo = chi * tf ** (L - m)
        term = (math.exp(-expo) if expo < 700 else 0.0) * float(pref) * inner
        total += term
        if abs(term) < tol * max(abs(total), 1e-300):
            streak += 1
        else:
            streak = 0
        m += 1
        if streak >= 3 and m >= min_terms:
            break
        if m > 400:
            raise RuntimeError("k=2 series did not converge")
    return total / qpoch(tf, tf, math.inf, tol=1e-17)


def moment_k1(t, chi: float, m: int, rel_tol: float = 1e-10, dps: int = 60,
              max_radius: int = 400) -> float:
    """m-th moment of chi^(-1) t^(-X) under the k = 1 law, by adaptive window sum.

    Uses high-precision probabilities: the positive tail carries weights
    t^(-m x) that amplify float cancellation noise beyond any tolerance.
    """
    import mpmath as mp

    with mp.workdps(dps):
        tf = mp.mpf(t.numerator) / t.denominator if isinstance(t, Fraction) else mp.mpf(t)
        chif = mp.mpf(chi)
        total = mp.mpf(0)

        def weighted(x):
            return (chif ** (-1) * tf ** (-x)) ** m * pmf_k1_mp(t, chi, x, dps=dps)

        # grow symmetric window until both tails are negligible
        total += weighted(0)
        up = 1
        streak = 0
        while streak < 4:
            w = weighted(up)
            total += w
            streak = streak + 1 if abs(w) < rel_tol * abs(total) / 100 else 0
            up += 1
            if up > max_radius:
                raise RuntimeError("moment window exhausted upward")
        down = -1
        streak = 0
        while streak < 4:
            w = weighted(down)
            total += w
            streak = streak + 1 if abs(w) < rel_tol * abs(total) / 100 else 0
            down -= 1
            if down < -max_radius:
                raise RuntimeError("moment window exhausted downward")
        return float(total)


def moment_k1_reference(t: Fraction, m: int) -> Fraction:
    """The closed-form moment t^(-binom(m+1,2)) (t;t)_m / m!."""
    return t ** (-m * (m + 1) // 2) * qpoch(t, t, m) / Fraction(math.factorial(m))


# ---------------------------------------------------------------------------
# Contour integration
# ---------------------------------------------------------------------------


def _gl_panels(a: float, b: float, panel_width: float, nodes: int):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    n_panels = max(1, int(math.ceil((b - a) / panel_width)))
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    wts = (half[:, None] * wg[None, :]).ravel()
    return pts, wts


def contour_nodes(spec: ContourSpec):
    """Nodes w and complex weights dw along the truncated contour, counterclockwise.

    Bottom ray (-x_max - i -> -i), right unit semicircle (-i -> +i), top ray
    (+i -> -x_max + i).
    """
    pw, npp = spec.panel_width, spec.nodes_per_panel
    xs, ws = _gl_panels(-spec.x_max, 0.0, pw, npp)
    bottom_w = xs - 1j
    bottom_dw = ws.astype(complex)
    th, wth = _gl_panels(-math.pi / 2, math.pi / 2, pw, npp)
    circ_w = np.exp(1j * th)
    circ_dw = 1j * circ_w * wth
    # top ray runs from 0 back down to -x_max
    top_w = xs[::-1] + 1j
    top_dw = -ws[::-1].astype(complex)
    w = np.concatenate([bottom_w, circ_w, top_w])
    dw = np.concatenate([bottom_dw, circ_dw, top_dw])
    return w, dw


def _qpoch_inf_cplx(z: np.ndarray, t: float, eps: float = 1e-18) -> np.ndarray:
    """(z; t)_infty elementwise, truncated with a certified geometric tail."""
    zmax = float(np.max(np.abs(z))) if z.size else 0.0
    if zmax == 0:
        return np.ones_like(z)
    n = max(1, int(math.ceil((math.log(max(zmax, 1.0)) + math.log(1 / eps)
                              + math.log(1 / (1 - t))) / math.log(1 / t))) + 2)
    out = np.ones_like(z)
    zt = z.copy()
    for _ in range(n):
        out *= 1.0 - zt
        zt *= t
    return out


def _ray_factor(w: np.ndarray, t: float, chi_eff: float) -> np.ndarray:
    """e^(chi_eff w) / (w (-1/w;t)_inf (-tw;t)_inf): the single-variable factor."""
    return np.exp(chi_eff * w) / (
        w * _qpoch_inf_cplx(-1.0 / w, t) * _qpoch_inf_cplx(-t * w, t)
    )


def _ray_factor_scaled(z: np.ndarray, t: float, chi: float, sigma: float) -> np.ndarray:
    """The single-variable factor after w = sigma z, also absorbing dw/w = dz/z."""
    return np.exp(chi * z) / (
        z * _qpoch_inf_cplx(-1.0 / (sigma * z), t) * _qpoch_inf_cplx(-t * sigma * z, t)
    )


def _theta_coeff_range(t: float, rmax: float, eps: float = 1e-24) -> int:
    """Smallest n with t^binom(n,2) rmax^(n+1) < eps for all larger indices."""
    n = 1
    while True:
        if (n * (n - 1) / 2) * math.log(1 / t) - (n + 1) * math.log(max(rmax, 1.0)) > math.log(1 / eps):
            return n
        n += 1
        if n > 2000:
            raise QuadratureError("theta expansion did not truncate")


def _pmf_contour_once(k: int, t: float, chi: float, L: Sequence[int],
                      spec: ContourSpec) -> float:
    z, dz = contour_nodes(spec)
    sigma = t ** (-L[-1])  # rescaling w = sigma z normalizes the exponential
    if k == 1:
        integrand = sigma * np.exp(chi * z) / _qpoch_inf_cplx(-sigma * z, t)
        val = np.sum(integrand * dz) / (2j * math.pi)
        return float(val.real)
    # k = 2: expand the cross factor (w1/w2;t)_inf (w2/w1;t)_inf through the
    # triple product so the double integral splits into products of
    # one-dimensional panel quadratures.  The cross factor is scale-invariant,
    # so only the single-variable integrals see sigma.
    x = L[0] - L[1]
    base = _ray_factor_scaled(z, t, chi, sigma) * dz
    rmax = float(np.max(np.abs(z)))
    nmax = _theta_coeff_range(t, rmax)
    powers_needed = range(-(nmax + x + 2), nmax + 3)
    g: Dict[int, complex] = {}
    logz = np.log(z.astype(complex))
    for a in powers_needed:
        g[a] = complex(np.sum(base * np.exp(a * logz)))
    qinf = qpoch(t, t, math.inf, tol=1e-17)
    total = 0.0 + 0j
    for n in range(-nmax, nmax + 1):
        theta_c = (-1) ** n * t ** (n * (n - 1) / 2)
        if theta_c == 0:
            continue
        for j in range(x + 1):
            cj = t ** ((j + 1) * j / 2) * qbinom(x, j, t) * sigma ** (-x - j)
            for cp in range(j, x + 1):
                coef = theta_c * cj * qbinom(x - j, x - cp, t)
                if coef == 0:
                    continue
                a1 = n - cp
                a2 = -n - (x + j - cp)
                term = g[a1] * g[a2] - g[a1 - 1] * g[a2 + 1]
                total += coef * term
    total /= qinf
    pref = qinf / 2.0
    for i in range(k - 1):
        gap = L[i] - L[i + 1]
        pref *= t ** (((L[i] - L[-1]) * (L[i] - L[-1] - 1)) / 2) / qpoch(t, t, gap)
    val = pref * total / (2j * math.pi) ** 2
    return float(val.real)


def pmf_contour_info(params: LimitLawParams, L: Sequence[int],
                     contour: Optional[ContourSpec] = None) -> Tuple[float, dict]:
    """Contour-integral probability for k <= 2, with one-refinement error estimate."""
    if params.k > 2:
        raise ValueError("contour route implemented for k <= 2 only")
    L = tuple(int(x) for x in L)
    if len(L) != params.k:
        raise ValueError("signature length must equal k")
    if any(L[i] < L[i + 1] for i in range(len(L) - 1)):
        raise ValueError("L must be weakly decreasing")
    t = float(params.t)
    spec = contour or default_contour(t, params.chi, L[-1])
    coarse = _pmf_contour_once(params.k, t, params.chi, L, spec)
    fine_spec = ContourSpec(spec.x_max, spec.panel_width / 2, spec.nodes_per_panel)
    fine = _pmf_contour_once(params.k, t, params.chi, L, fine_spec)
    est = abs(fine - coarse)
    if est > 1e-6:
        raise QuadratureError(f"panel refinement did not converge: diff={est:.3e}")
    return fine, {"terms_used": 2, "est_error": est, "method": "contour"}


def pmf_contour(params: LimitLawParams, L: Sequence[int],
                contour: Optional[ContourSpec] = None) -> float:
    return pmf_contour_info(params, L, contour)[0]


def pmf_contour_k1_crosscheck(t: float, chi: float, L: int,
                              contour: Optional[ContourSpec] = None) -> float:
    """Literal unrescaled k = 1 parametrization, as an independent cross-check.

    Only usable while chi t^L stays moderate: the integrand reaches
    exp(chi t^L) on the unit semicircle, so large effective rates destroy all
    digits through cancellation (which is why the primary path rescales).
    """
    tf = float(t)
    chi_eff = chi * tf**L
    spec = contour or ContourSpec(x_max=max(50.0, 40.0 / chi_eff))
    w, dw = contour_nodes(spec)
    integrand = np.exp(chi_eff * w) / _qpoch_inf_cplx(-w, tf)
    return float((np.sum(integrand * dw) / (2j * math.pi)).real)


def pmf_contour_direct_k2(t: float, chi: float, L: Sequence[int],
                          spec: ContourSpec) -> float:
    """Literal tensor-product double quadrature; test oracle for modest x_max."""
    L = tuple(L)
    x = L[0] - L[1]
    w, dw = contour_nodes(spec)
    chi_eff = chi * t ** L[1]
    base = _ray_factor(w, t, chi_eff) * dw
    w1 = w[:, None]
    w2 = w[None, :]
    cross = _qpoch_inf_cplx(w1 / w2, t) * _qpoch_inf_cplx(w2 / w1, t)
    ssum = np.zeros_like(cross)
    for j in range(x + 1):
        cj = t ** ((j + 1) * j / 2) * qbinom(x, j, t)
        for cp in range(j, x + 1):
            coef = cj * qbinom(x - j, x - cp, t)
            ssum += coef * w1 ** (-cp) * w2 ** (-(x + j - cp))
    total = np.sum(base[:, None] * base[None, :] * cross * ssum)
    qinf = qpoch(t, t, math.inf, tol=1e-17)
    pref = qinf / 2.0 * t ** ((x * (x - 1)) / 2) / qpoch(t, t, x)
    return float((pref * total / (2j * math.pi) ** 2).real)


def evaluate_record(params: LimitLawParams, L: Sequence[int], method: str) -> dict:
    """One JSON-ready record for the CLI."""
    if method == "series":
        value, info = pmf_series_info(params, L)
    elif method == "contour":
        value, info = pmf_contour_info(params, L)
    elif method == "closed_k1":
        if params.k != 1:
            raise ValueError("closed_k1 needs k = 1")
        value = pmf_k1(params.t, params.chi, L[0])
        info = {"terms_used": None, "est_error": None, "method": "closed_k1"}
    elif method == "closed_k2":
        if params.k != 2:
            raise ValueError("closed_k2 needs k = 2")
        value = pmf_k2(params.t, params.chi, L[1], L[0] - L[1])
        info = {"terms_used": None, "est_error": None, "method": "closed_k2"}
    else:
        raise ValueError(f"unknown method {method!r}")
    return {"L": list(L), "pmf": value, **info}
