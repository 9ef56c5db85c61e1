"""Hot Monte Carlo kernels: matrix products mod p^K, Smith normal form,
reflected-walk simulation, and the geometric-impulse sampler.

Every kernel is written in nopython-compatible NumPy and compiled with numba
unless the environment variable ``RMT_PURE_NUMPY`` is set to a non-empty
value (other than ``0``), in which case the same functions run as plain
Python/NumPy.  ``benchmarks/bench_kernels.py`` compares the two backends.

All kernels draw randomness from ``np.random.random()`` only, seeded once per
batch call, so runs are bit-reproducible per backend given the seed.
Samplers that need nonuniform variates build them from uniforms by inversion.

The int64 arithmetic path requires n * p^(2K) < 2^62; batch entry points
check this before dispatching.
"""

from __future__ import annotations

import math
import os

import numpy as np

_env = os.environ.get("RMT_PURE_NUMPY", "").strip()
NUMBA_ENABLED = _env in ("", "0")
if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def _wrap(f):
        return _njit(cache=True)(f)
else:
    def _wrap(f):
        return f


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


def check_int64_domain(n: int, p: int, K: int) -> None:
    if n * (p ** K) ** 2 >= 2 ** 62:
        raise ValueError(
            f"modulus too large for the int64 kernel path: n={n}, p^K={p**K}"
        )


# --- low-level helpers -------------------------------------------------------


def _modinv(a, m):
    """Inverse of a modulo m (a must be a unit)."""
    r0, r1 = m, a % m
    s0, s1 = 0, 1
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    return s0 % m


modinv = _wrap(_modinv)


def _val_p(x, p, cap):
    """p-adic valuation of x, capped (0 maps to cap)."""
    if x == 0:
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
        if v >= cap:
            return cap
    return v


val_p = _wrap(_val_p)


def _fill_uniform(a, pk):
    n, m = a.shape
    for i in range(n):
        for j in range(m):
            a[i, j] = np.int64(np.random.random() * pk)


fill_uniform = _wrap(_fill_uniform)


def _det_mod_p(a, p):
    """Determinant mod p of a copy of the int64 matrix a (entries any residues)."""
    n = a.shape[0]
    w = a % p
    det = np.int64(1)
    for c in range(n):
        piv = -1
        for r in range(c, n):
            if w[r, c] % p != 0:
                piv = r
                break
        if piv < 0:
            return np.int64(0)
        if piv != c:
            for j in range(c, n):
                tmp = w[c, j]
                w[c, j] = w[piv, j]
                w[piv, j] = tmp
            det = (-det) % p
        det = (det * w[c, c]) % p
        inv = modinv(w[c, c], p)
        for r in range(c + 1, n):
            f = (w[r, c] * inv) % p
            if f != 0:
                for j in range(c, n):
                    w[r, j] = (w[r, j] - f * w[c, j]) % p
    return det % p


det_mod_p = _wrap(_det_mod_p)


def _mat_mult_mod(a, b, out, pk):
    n = a.shape[0]
    m = b.shape[1]
    inner = a.shape[1]
    for i in range(n):
        for j in range(m):
            acc = np.int64(0)
            for l in range(inner):
                acc += a[i, l] * b[l, j]
            out[i, j] = acc % pk


mat_mult_mod = _wrap(_mat_mult_mod)


def _snf_int64(a, p, K):
    """In-place Smith normal form valuations of the int64 matrix a mod p^K.

    Returns (parts, saturated): parts sorted weakly decreasing; entries equal
    to K where the pivot search saturated (no entry of valuation < K left).
    """
    n, m = a.shape
    nmin = min(n, m)
    pk = np.int64(p) ** K
    parts = np.zeros(nmin, np.int64)
    saturated = False
    for step in range(nmin):
        best_v = K
        bi = -1
        bj = -1
        for i in range(step, n):
            for j in range(step, m):
                v = val_p(a[i, j], p, K)
                if v < best_v:
                    best_v = v
                    bi = i
                    bj = j
                    if v == 0:
                        break
            if best_v == 0:
                break
        if bi < 0:
            saturated = True
            for r in range(step, nmin):
                parts[r] = K
            break
        # move pivot to (step, step)
        if bi != step:
            for j in range(m):
                tmp = a[step, j]
                a[step, j] = a[bi, j]
                a[bi, j] = tmp
        if bj != step:
            for i in range(n):
                tmp = a[i, step]
                a[i, step] = a[i, bj]
                a[i, bj] = tmp
        # normalize the pivot row so the pivot becomes exactly p^best_v
        pv = np.int64(p) ** best_v
        unit = a[step, step] // pv
        inv = modinv(unit, pk)
        for j in range(step, m):
            a[step, j] = (a[step, j] * inv) % pk
        # clear the pivot column below, then the pivot row to the right
        for i in range(step + 1, n):
            f = a[i, step] // pv
            if f != 0:
                for j in range(step, m):
                    a[i, j] = (a[i, j] - f * a[step, j]) % pk
        for j in range(step + 1, m):
            f = a[step, j] // pv
            if f != 0:
                a[step, j] = (a[step, j] - f * a[step, step]) % pk
        parts[step] = best_v
    # weakly decreasing order
    parts[:] = -np.sort(-parts)
    return parts, saturated


snf_int64 = _wrap(_snf_int64)


def _sample_invertible(a, p, pk, budget):
    """Fill a with a uniform matrix conditioned invertible mod p; False if budget hit."""
    for _ in range(budget):
        fill_uniform(a, pk)
        if det_mod_p(a, p) != 0:
            return True
    return False


sample_invertible = _wrap(_sample_invertible)


def _poisson_knuth(lam):
    thresh = math.exp(-lam)
    k = 0
    prod = 1.0
    while True:
        prod *= np.random.random()
        if prod <= thresh:
            return k
        k += 1


poisson_knuth = _wrap(_poisson_knuth)


# --- batch ensembles ----------------------------------------------------------


def _batch_product_chain(N, s, p, K, corner_D, n_samples, seed, out_parts, out_sat):
    """SN of s-fold products; corner_D = 0 means iid uniform entries, otherwise
    corners of invertible (N+corner_D)-matrices."""
    np.random.seed(seed)
    pk = np.int64(p) ** K
    acc = np.zeros((N, N), np.int64)
    fac = np.zeros((N, N), np.int64)
    tmp = np.zeros((N, N), np.int64)
    big = np.zeros((N + corner_D, N + corner_D), np.int64)
    ok = True
    for sample in range(n_samples):
        for step in range(s):
            if corner_D == 0:
                fill_uniform(fac, pk)
            else:
                if not sample_invertible(big, p, pk, 1000):
                    ok = False
                    return ok
                for i in range(N):
                    for j in range(N):
                        fac[i, j] = big[i, j]
            if step == 0:
                for i in range(N):
                    for j in range(N):
                        acc[i, j] = fac[i, j]
            else:
                mat_mult_mod(fac, acc, tmp, pk)
                for i in range(N):
                    for j in range(N):
                        acc[i, j] = tmp[i, j]
        parts, sat = snf_int64(acc, p, K)
        for i in range(N):
            out_parts[sample, i] = parts[i]
        out_sat[sample] = sat
    return ok


batch_product_chain = _wrap(_batch_product_chain)


def _batch_x_process(N, tau, p, K, n_samples, seed, out_parts, out_sat):
    """SN of the Poissonized product U_P D V_P ... U_1 D V_1 U_0, D = diag(p,1,..)."""
    np.random.seed(seed)
    pk = np.int64(p) ** K
    acc = np.zeros((N, N), np.int64)
    u = np.zeros((N, N), np.int64)
    tmp = np.zeros((N, N), np.int64)
    ok = True
    for sample in range(n_samples):
        count = poisson_knuth(tau)
        if not sample_invertible(acc, p, pk, 1000):
            return False
        for _ in range(count):
            if not sample_invertible(u, p, pk, 1000):
                return False
            # acc <- V * acc, then first row of acc multiplied by p (D*), then U*
            mat_mult_mod(u, acc, tmp, pk)
            for j in range(N):
                tmp[0, j] = (tmp[0, j] * p) % pk
            if not sample_invertible(u, p, pk, 1000):
                return False
            mat_mult_mod(u, tmp, acc, pk)
        parts, sat = snf_int64(acc, p, K)
        for i in range(N):
            out_parts[sample, i] = parts[i]
        out_sat[sample] = sat
    return ok


batch_x_process = _wrap(_batch_x_process)


# --- reflected Poisson walk ----------------------------------------------------


def _walk_push(state, i):
    """Increment entry i (0-based) or the start of its run of equal values."""
    a = i
    while a > 0 and state[a - 1] == state[i]:
        a -= 1
    state[a] += 1


walk_push = _wrap(_walk_push)


def _batch_walk(n, init, tau_end, t, n_samples, seed, out_parts):
    """Final state of the rate-t^i reflected walk at time tau_end, per sample."""
    np.random.seed(seed)
    rate = t * (1.0 - t**n) / (1.0 - t)
    log_t = math.log(t)
    one_minus_tn = 1.0 - t**n
    state = np.zeros(n, np.int64)
    for sample in range(n_samples):
        for i in range(n):
            state[i] = init[i]
        time = 0.0
        while True:
            time += -math.log(1.0 - np.random.random()) / rate
            if time > tau_end:
                break
            u = np.random.random()
            x = 1.0 - u * one_minus_tn
            idx = int(math.ceil(math.log(x) / log_t))
            if idx < 1:
                idx = 1
            if idx > n:
                idx = n
            walk_push(state, idx - 1)
        for i in range(n):
            out_parts[sample, i] = state[i]


batch_walk = _wrap(_batch_walk)


# --- geometric-impulse Cauchy sampler -------------------------------------------


def _geom_floor(x):
    """Geometric on {0,1,...} with success decay x: floor(log U / log x)."""
    return np.int64(math.log(1.0 - np.random.random()) / math.log(x))


geom_floor = _wrap(_geom_floor)


def _draw_gx(x, t):
    """max(Geom(x) - Geom(t), 0), the blocked-impulse law."""
    g1 = geom_floor(x)
    g2 = geom_floor(t)
    d = g1 - g2
    if d < 0:
        return np.int64(0)
    return d


draw_gx = _wrap(_draw_gx)


def _insertion_inplace(state, impulses, n):
    """state <- iota(impulses; state), via the running-suffix-max closed form.

    The impulse buffer is reused to hold intermediate values; the clamp uses
    the original left neighbor, so writes to state happen only at the end.
    """
    big = np.int64(1) << 60
    run = -big
    for i in range(n - 1, -1, -1):
        cand = state[i] + impulses[i]
        if run + impulses[i] > cand:
            run = run + impulses[i]
        else:
            run = cand
        impulses[i] = run  # suffix maximum M_i
    for i in range(n):
        lim = big if i == 0 else state[i - 1]
        if impulses[i] > lim:
            impulses[i] = lim
    for i in range(n):
        state[i] = impulses[i]


insertion_inplace = _wrap(_insertion_inplace)


def _cauchy_substep(state, impulses, n, x, t):
    """One geometric-impulse update with parameter x: skip the almost-sure
    trivial case via the telescoped all-zero probability, else sample the
    impulses conditioned on not-all-zero and insert."""
    tn = t**n
    p_trivial = (1.0 - x) / (1.0 - x * tn)
    if np.random.random() < p_trivial:
        return
    seen = False
    xi = x
    for i in range(n):
        if seen:
            impulses[i] = draw_gx(xi, t)
        else:
            p0 = (1.0 - xi) / (1.0 - t * xi)
            # Pr(X_i .. X_n not all zero) = (xi - x t^n) / (1 - x t^n); the
            # ratio of consecutive tail events is written cancellation-free.
            thresh = p0 * (xi * t - x * tn) / (xi - x * tn)
            if np.random.random() < thresh:
                impulses[i] = 0
            else:
                impulses[i] = 1 + geom_floor(xi)
                seen = True
        xi *= t
    insertion_inplace(state, impulses, n)


cauchy_substep = _wrap(_cauchy_substep)


def _batch_cauchy_multi(n, init, alphas, steps, t, n_samples, seed, out_parts):
    """steps-fold composition of the alpha-list update, per sample."""
    np.random.seed(seed)
    state = np.zeros(n, np.int64)
    impulses = np.zeros(n, np.int64)
    n_alphas = alphas.shape[0]
    for sample in range(n_samples):
        for i in range(n):
            state[i] = init[i]
        for _ in range(steps):
            for a in range(n_alphas):
                cauchy_substep(state, impulses, n, alphas[a], t)
        for i in range(n):
            out_parts[sample, i] = state[i]


batch_cauchy_multi = _wrap(_batch_cauchy_multi)
