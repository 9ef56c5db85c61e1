"""The reflected rate-t^i walk, the insertion map, geometric-impulse sampling,
and exact small-state transition laws.

``n = None`` selects the half-infinite versions; their truncation points are
certified by explicit union bounds and the residual probability is logged,
never silently dropped.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .hallittlewood import (
    b_lam_hl,
    phi_hl,
    principal_P,
    q_gamma_alpha,
    skew_principal_P,
)
from .qcore import Scalar, normalize_partition, qpoch

log = logging.getLogger(__name__)

Signature = Tuple[int, ...]


@dataclass(frozen=True)
class GxParams:
    x: float
    t: float

    def __post_init__(self):
        if not (0 < self.x < 1 and 0 < self.t < 1):
            raise ValueError("G_x needs 0 < x < 1 and 0 < t < 1")


@dataclass(frozen=True)
class WalkState:
    parts: Signature
    time: float
    t: float

    def to_json_line(self) -> str:
        import json

        return json.dumps({"time": self.time, "parts": list(self.parts)})


# --- insertion map -------------------------------------------------------------


def insertion(a: Sequence[int], lam: Sequence[int]) -> Signature:
    """iota(a; lam): min of the left neighbor and the running suffix maximum.

    Lengths are reconciled by zero-padding the impulses and extending lam
    (nonnegative state assumed for the extension, matching the half-infinite
    convention where untouched parts are 0).
    """
    a = list(a)
    lam = list(lam)
    if any(x < 0 for x in a):
        raise ValueError("impulses must be nonnegative")
    n = max(len(a), len(lam))
    a += [0] * (n - len(a))
    if len(lam) < n:
        if lam and lam[-1] < 0:
            raise ValueError("cannot zero-extend a state with negative parts")
        lam += [0] * (n - len(lam))
    if any(lam[i] < lam[i + 1] for i in range(n - 1)):
        raise ValueError("state must be weakly decreasing")
    suffix = [0] * n
    run = None
    for i in range(n - 1, -1, -1):
        cand = lam[i] + a[i]
        run = cand if run is None else max(run + a[i], cand)
        suffix[i] = run
    out = []
    for i in range(n):
        lim = suffix[i] if i == 0 else min(lam[i - 1], suffix[i])
        out.append(lim)
    return tuple(out)


def insertion_particle(a: Sequence[int], lam: Sequence[int]) -> Signature:
    """Blocking/donating particle description of the insertion map (oracle).

    The rightmost particle with positive impulse moves first; a particle
    blocked by its left neighbor donates the unused remainder of its impulse.
    """
    a = list(a)
    lam = list(lam)
    n = max(len(a), len(lam))
    a += [0] * (n - len(a))
    if len(lam) < n:
        lam += [0] * (n - len(lam))
    state = list(lam)
    for ell in range(n - 1, -1, -1):
        if a[ell] <= 0:
            continue
        room = a[ell] if ell == 0 else min(a[ell], state[ell - 1] - state[ell])
        state[ell] += room
        if ell > 0:
            a[ell - 1] += a[ell] - room  # blocked remainder is donated leftward
    return tuple(state)


# --- the blocked-geometric impulse law ------------------------------------------


def gx_pmf(ell: int, x: Scalar, t: Scalar) -> Fraction:
    """Pr(max(Geom(x) - Geom(t), 0) = ell), exact."""
    x, t = Fraction(x), Fraction(t)
    if ell < 0:
        return Fraction(0)
    base = (1 - x) / (1 - t * x)
    if ell == 0:
        return base
    return base * (1 - t) * x**ell


def sample_Gx(params: GxParams, rng: np.random.Generator) -> int:
    """Draw max(Geom(x) - Geom(t), 0) from two inverted uniforms."""
    g1 = int(math.log(1.0 - rng.random()) / math.log(params.x))
    g2 = int(math.log(1.0 - rng.random()) / math.log(params.t))
    return max(g1 - g2, 0)


def certified_impulse_cutoff(x: float, t: float, tol: float = 1e-12) -> int:
    """Smallest i* with sum_{j > i*} Pr(impulse_j > 0) < tol, by union bound."""
    # Pr(X_j > 0) = x t^(j-1) (1-t)/(1 - t x t^(j-1)) <= x t^(j-1); the tail
    # sum is bounded by x t^(i*) / (1-t).
    i = 1
    while x * t**i / (1 - t) >= tol:
        i += 1
        if i > 10**6:
            raise RuntimeError("impulse cutoff did not converge")
    return i


def hl_cauchy_step(lam: Sequence[int], x: float, n: Optional[int], t: float,
                   rng: np.random.Generator) -> Signature:
    """One geometric-impulse update: draw row impulses and insert.

    ``n = None`` runs the half-infinite version, drawing impulses up to a
    certified cutoff; the residual event probability is logged at DEBUG level.
    """
    if not (0 < x < 1):
        raise ValueError("x must lie in (0,1)")
    lam = tuple(lam)
    if n is None:
        cutoff = max(certified_impulse_cutoff(x, t), len(lam) + 1)
        residual = x * t**cutoff / (1 - t)
        log.debug("impulse tail truncated at %d (residual bound %.3e)", cutoff, residual)
        n_eff = cutoff
    else:
        n_eff = n
        if len(lam) > n:
            raise ValueError("state longer than n")
    draws = [sample_Gx(GxParams(x * t**i, t), rng) for i in range(n_eff)]
    out = insertion(draws, list(lam) + [0] * (n_eff - len(lam)))
    if n is None:
        return normalize_partition(out)
    return out


def hl_cauchy_multi(lam: Sequence[int], alphas: Sequence[float], n: Optional[int],
                    t: float, rng: np.random.Generator) -> Signature:
    """Sequential composition of single-alpha updates."""
    state = tuple(lam)
    for x in alphas:
        state = hl_cauchy_step(state, x, n, t, rng)
    return state


def geometric_alphas(t: float, cutoff: float = 1e-15) -> List[float]:
    """The alpha list t, t^2, ... truncated below ``cutoff`` (substeps beyond
    are the identity with overwhelming probability)."""
    out = []
    x = t
    while x >= cutoff:
        out.append(x)
        x *= t
    return out


def exact_cauchy_pmf(lam: Sequence[int], nu: Sequence[int], x: Scalar,
                     n: Optional[int], t: Scalar) -> Fraction:
    """Exact one-step probability of the geometric-impulse update lam -> nu.

    Both tuples are read as elements of the length-n state space (padded with
    zeros); zero rows participate in the multiplicity product.  ``n = None``
    sets t^n x = 0.
    """
    x, t = Fraction(x), Fraction(t)
    lam = normalize_partition(lam)
    nu = normalize_partition(nu)
    if n is not None and (len(lam) > n or len(nu) > n):
        raise ValueError("state longer than n")
    # horizontal strip condition on the padded tuples
    lam_p = lam + (0,) * (max(len(nu), len(lam)) - len(lam))
    for i in range(len(lam_p)):
        hi = nu[i] if i < len(nu) else 0
        lo = nu[i + 1] if i + 1 < len(nu) else 0
        if not (hi >= lam_p[i] >= lo):
            return Fraction(0)
    pref = (1 - x) if n is None else (1 - x) / (1 - t**n * x)
    # multiplicity product over all part values including zeros (finite n)
    def mults(parts, length):
        out: Dict[int, int] = {}
        for v in parts:
            out[v] = out.get(v, 0) + 1
        if length is not None:
            out[0] = out.get(0, 0) + (length - len(parts))
        return out

    ml = mults(lam, n)
    mn = mults(nu, n)
    prod = Fraction(1)
    for j, m_lam in ml.items():
        if n is None and j == 0:
            continue
        if m_lam == mn.get(j, 0) + 1:
            prod *= 1 - t**m_lam
    geom = Fraction(1)
    for i in range(len(nu)):
        li = lam[i] if i < len(lam) else 0
        geom *= (x * t**i) ** (nu[i] - li)
    return pref * prod * geom


def exact_cauchy_pmf_hl(lam: Sequence[int], nu: Sequence[int], x: Scalar,
                        n: Optional[int], t: Scalar) -> Fraction:
    """The same transition probability through the symmetric-function route:
    dual skew polynomial times a ratio of principal specializations."""
    x, t = Fraction(x), Fraction(t)
    lam = normalize_partition(lam)
    nu = normalize_partition(nu)
    if n is not None and (len(lam) > n or len(nu) > n):
        raise ValueError("state longer than n")
    phi = phi_hl(nu, lam, t)
    if phi == 0:
        return Fraction(0)
    q_skew = phi * x ** (sum(nu) - sum(lam))
    p_ratio = principal_P(nu, Fraction(1), n, t) / principal_P(lam, Fraction(1), n, t)
    cauchy = (1 - x * t**n) / (1 - x) if n is not None else 1 / (1 - x)
    return q_skew * p_ratio / cauchy


# --- reflected walk --------------------------------------------------------------


def simulate_S(n: Optional[int], nu: Sequence[int], tau_end: float, t: float,
               rng: np.random.Generator,
               snapshot_times: Optional[Sequence[float]] = None,
               on_snapshot: Optional[Callable[[WalkState], None]] = None) -> WalkState:
    """Event-driven run of the reflected rate-t^i walk up to time tau_end.

    Clock i (1-based) rings at rate t^i; the rung entry increases by one,
    donated to the start of its run of equal entries when blocked.  For
    n = None the state grows lazily and the total rate is t/(1-t).
    """
    if tau_end < 0:
        raise ValueError("tau_end must be nonnegative")
    state = list(nu)
    if any(state[i] < state[i + 1] for i in range(len(state) - 1)):
        raise ValueError("initial state must be weakly decreasing")
    if n is None and state and state[-1] < 0:
        raise ValueError("half-infinite walk needs nonnegative initial parts")
    if n is not None:
        state += [0] * (n - len(state))
    rate = t / (1 - t) if n is None else t * (1 - t**n) / (1 - t)
    time = 0.0
    pending = sorted(snapshot_times or [])
    snap_idx = 0
    while True:
        time_next = time - math.log(1.0 - rng.random()) / rate
        while snap_idx < len(pending) and time < pending[snap_idx] <= min(time_next, tau_end):
            if on_snapshot:
                on_snapshot(WalkState(tuple(state), pending[snap_idx], t))
            snap_idx += 1
        time = time_next
        if time > tau_end:
            break
        u = rng.random()
        if n is None:
            idx = 1 + int(math.log(1.0 - u) / math.log(t))
        else:
            idx = int(math.ceil(math.log(1.0 - u * (1 - t**n)) / math.log(t)))
            idx = min(max(idx, 1), n)
        if n is None and idx > len(state):
            state += [0] * (idx - len(state))
        a = idx - 1
        while a > 0 and state[a - 1] == state[idx - 1]:
            a -= 1
        state[a] += 1
        assert all(state[i] >= state[i + 1] for i in range(len(state) - 1))
    return WalkState(tuple(state), tau_end, t)


def walk_batch(n: int, init: Sequence[int], tau_end: float, t: float,
               n_samples: int, seed: int) -> np.ndarray:
    """Kernel-backed batch of final states for finite n."""
    init_arr = np.zeros(n, np.int64)
    for i, v in enumerate(init):
        init_arr[i] = v
    out = np.zeros((n_samples, n), np.int64)
    kernels.batch_walk(n, init_arr, float(tau_end), float(t), n_samples,
                       seed % 2**32, out)
    return out


def cauchy_multi_batch(n: int, init: Sequence[int], alphas: Sequence[float],
                       steps: int, t: float, n_samples: int, seed: int) -> np.ndarray:
    """Kernel-backed batch of the steps-fold alpha-list composition."""
    init_arr = np.zeros(n, np.int64)
    for i, v in enumerate(init):
        init_arr[i] = v
    out = np.zeros((n_samples, n), np.int64)
    kernels.batch_cauchy_multi(n, init_arr, np.asarray(alphas, np.float64),
                               steps, float(t), n_samples, seed % 2**32, out)
    return out


# --- exact small-state process laws ----------------------------------------------


def plancherel_pmf(lam: Sequence[int], tau: float, n: int, t: Scalar) -> float:
    """Exact marginal of the exponential-specialization process at time tau."""
    t = Fraction(t)
    lam = normalize_partition(lam)
    if len(lam) > n:
        return 0.0
    p_val = principal_P(lam, Fraction(1), n, t)
    q_val = q_gamma_alpha(lam, Fraction(tau).limit_denominator(10**12), Fraction(0), t)
    norm = math.exp(-tau * float((1 - t**n) / (1 - t)))
    return float(p_val * q_val) * norm


def haar_step_prob(lam: Sequence[int], nu: Sequence[int], N: int, t: Scalar) -> Fraction:
    """Exact one-product transition for the iid-uniform-entries ensemble.

    The geometric alpha list collapses in closed form: dual skew polynomial at
    t, t^2, ... equals a ratio of dual normalizations times the skew principal
    value, and the Cauchy normalizer telescopes to prod_i (1 - t^i)^(-1).
    """
    t = Fraction(t)
    lam = normalize_partition(lam)
    nu = normalize_partition(nu)
    if len(nu) > N:
        return Fraction(0)
    skew = skew_principal_P(nu, lam, Fraction(1), t)
    if skew == 0:
        return Fraction(0)
    q_skew = b_lam_hl(nu, t) / b_lam_hl(lam, t) * t ** (sum(nu) - sum(lam)) * skew
    ratio = principal_P(nu, Fraction(1), N, t) / principal_P(lam, Fraction(1), N, t)
    norm = Fraction(1)
    for i in range(1, N + 1):
        norm *= 1 - t**i
    return q_skew * ratio * norm


class HaarStepKernel:
    """Float evaluation of the one-product transition with per-shape caches.

    Same closed form as :func:`haar_step_prob`; the exact-rational twin stays
    the oracle for small shapes, this one feeds the law convolution where
    thousands of matrix elements are needed.
    """

    def __init__(self, N: int, t: float):
        self.N = N
        self.t = float(t)
        self.norm = 1.0
        for i in range(1, N + 1):
            self.norm *= 1 - self.t**i
        self._principal: Dict[Signature, float] = {}
        self._principal_inf: Dict[Signature, float] = {}
        self._b: Dict[Signature, float] = {}
        self._qtt: List[float] = [1.0]
        self._conj: Dict[Signature, Tuple[int, ...]] = {}
        self._rows: Dict[Tuple[Signature, float], Tuple[Dict[Signature, float], float]] = {}

    def conj(self, lam: Signature) -> Tuple[int, ...]:
        c = self._conj.get(lam)
        if c is None:
            c = tuple(sum(1 for x in lam if x >= j) for j in range(1, (lam[0] + 1) if lam else 1))
            self._conj[lam] = c
        return c

    def row(self, lam: Signature, row_tol: float = 1e-8, max_added: int = 80):
        key = (lam, row_tol)
        cached = self._rows.get(key)
        if cached is None:
            cached = haar_step_row(lam, self.N, self.t, row_tol, max_added, kernel=self)
            self._rows[key] = cached
        return cached

    def _qpoch_tt(self, n: int) -> float:
        while len(self._qtt) <= n:
            m = len(self._qtt)
            self._qtt.append(self._qtt[-1] * (1 - self.t**m))
        return self._qtt[n]

    def principal(self, lam: Signature) -> float:
        v = self._principal.get(lam)
        if v is None:
            t = self.t
            n_stat = sum(i * x for i, x in enumerate(lam))
            v = t**n_stat * self._qpoch_tt(self.N) / self._qpoch_tt(self.N - len(lam))
            mults: Dict[int, int] = {}
            for x in lam:
                mults[x] = mults.get(x, 0) + 1
            for m in mults.values():
                v /= self._qpoch_tt(m)
            self._principal[lam] = v
        return v

    def principal_inf(self, lam: Signature) -> float:
        v = self._principal_inf.get(lam)
        if v is None:
            t = self.t
            n_stat = sum(i * x for i, x in enumerate(lam))
            v = t**n_stat
            mults: Dict[int, int] = {}
            for x in lam:
                mults[x] = mults.get(x, 0) + 1
            for m in mults.values():
                v /= self._qpoch_tt(m)
            self._principal_inf[lam] = v
        return v

    def b_hl(self, lam: Signature) -> float:
        v = self._b.get(lam)
        if v is None:
            mults: Dict[int, int] = {}
            for x in lam:
                mults[x] = mults.get(x, 0) + 1
            v = 1.0
            for m in mults.values():
                v *= self._qpoch_tt(m)
            self._b[lam] = v
        return v

    def prob(self, lam: Signature, nu: Signature) -> float:
        if len(nu) > self.N:
            return 0.0
        if len(lam) > len(nu) or any(lam[i] > nu[i] for i in range(len(lam))):
            return 0.0
        t = self.t
        lc, mc = self.conj(nu), self.conj(lam)
        width = len(lc)
        lc_p = lc + (0,)
        mc_p = mc + (0,) * (width + 1 - len(mc))
        skew = self.principal_inf(nu)
        for x in range(width):
            d = lc_p[x] - mc_p[x]
            skew *= t ** (d * (d - 1) // 2 - lc_p[x] * (lc_p[x] - 1) // 2)
            for r in range(mc_p[x] - mc_p[x + 1]):
                skew *= 1 - t ** (1 + d + r)
        q_skew = self.b_hl(nu) / self.b_hl(lam) * t ** (sum(nu) - sum(lam)) * skew
        return q_skew * self.principal(nu) / self.principal(lam) * self.norm


def _supersets_by_added(lam: Signature, added: int, max_len: int):
    """All partitions nu containing lam with |nu/lam| = added, length <= max_len."""
    lam = list(lam) + [0] * (max_len - len(lam))
    out = []

    def rec(i, remaining, prefix):
        if i == max_len:
            if remaining == 0:
                shape = tuple(prefix)
                while shape and shape[-1] == 0:
                    shape = shape[:-1]
                out.append(shape)
            return
        lo = lam[i]
        hi = lam[i] + remaining
        if i > 0:
            hi = min(hi, prefix[-1])
        for v in range(hi, lo - 1, -1):
            prefix.append(v)
            rec(i + 1, remaining - (v - lam[i]), prefix)
            prefix.pop()

    rec(0, added, [])
    return out


def haar_step_row(lam: Signature, N: int, t: Scalar, row_tol: float = 1e-9,
                  max_added: int = 80,
                  kernel: Optional[HaarStepKernel] = None
                  ) -> Tuple[Dict[Signature, float], float]:
    """One kernel row in floats, grown in |nu/lam| until the residual is small.

    The residual is trustworthy because the full row sums to 1.
    """
    kern = kernel or HaarStepKernel(N, float(t))
    row: Dict[Signature, float] = {}
    acc = 0.0
    for added in range(max_added + 1):
        for nu in _supersets_by_added(lam, added, N):
            v = kern.prob(lam, nu)
            if v:
                row[nu] = v
                acc += v
        if 1.0 - acc < row_tol:
            break
    return row, max(0.0, 1.0 - acc)


def convolve_law(law: Dict[Signature, float], row_fn, steps: int,
                 prune: float = 1e-12) -> Tuple[Dict[Signature, float], float]:
    """Push a finitely supported law through ``steps`` applications of a kernel.

    ``row_fn(state)`` returns (row dict, residual).  Returns the final law and
    the total untracked mass (kernel residuals plus pruned states).
    """
    lost = 0.0
    current = dict(law)
    for _ in range(steps):
        nxt: Dict[Signature, float] = {}
        for state, mass in current.items():
            if mass < prune:
                lost += mass
                continue
            row, res = row_fn(state)
            lost += mass * res
            for nu, pr in row.items():
                nxt[nu] = nxt.get(nu, 0.0) + mass * pr
        current = nxt
    return current, lost
