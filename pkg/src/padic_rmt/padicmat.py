"""Matrix ensembles over Z/p^K: sampling, products, and Smith normal form.

The mod-p^K model is faithful to the infinite-precision setting exactly on
the event that no pivot saturates (all singular numbers < K); every sampler
here propagates a saturation flag so that callers can certify that event.

Hot batch paths go through :mod:`padic_rmt.kernels`; the single-matrix API
keeps a pure-Python big-integer fallback for moduli beyond the int64 domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .qcore import conjugate


def is_probable_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 10**6:
        d = 2
        while d * d <= p:
            if p % d == 0:
                return False
            d += 1
        return True
    # large p: accept a fast Fermat test witness check
    for a in (2, 3, 5, 7):
        if pow(a, p - 1, p) != 1:
            return False
    return True


@dataclass(frozen=True)
class SingularNumbers:
    """Pivot valuations, weakly decreasing; ``saturated`` marks entries that are
    only certified as >= K (they are reported equal to K)."""

    parts: Tuple[int, ...]
    saturated: bool

    def conj(self) -> Tuple[int, ...]:
        return conjugate(tuple(x for x in self.parts if x > 0))

    def to_json_dict(self) -> dict:
        return {"parts": list(self.parts), "saturated": self.saturated}


class MatModPK:
    """Dense matrix over Z/p^K with p prime and K >= 1."""

    def __init__(self, p: int, K: int, entries):
        if K < 1:
            raise ValueError("K must be >= 1")
        if not is_probable_prime(p):
            raise ValueError(f"p = {p} is not prime")
        self.p = int(p)
        self.K = int(K)
        self.pk = self.p**self.K
        arr = np.asarray(entries, dtype=object)
        if arr.ndim != 2:
            raise ValueError("entries must be a 2-D array")
        if any(not (0 <= int(x) < self.pk) for x in arr.ravel()):
            raise ValueError("entries must be residues in [0, p^K)")
        self._obj = arr
        self.n_rows, self.n_cols = arr.shape

    @property
    def entries(self):
        return self._obj

    def int64_view(self) -> Optional[np.ndarray]:
        n = max(self.n_rows, self.n_cols)
        try:
            kernels.check_int64_domain(n, self.p, self.K)
        except ValueError:
            return None
        return self._obj.astype(np.int64)

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "K": self.K,
            "n": self.n_rows,
            "entries": [int(x) for x in self._obj.ravel()],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "MatModPK":
        n = d["n"]
        ent = np.array(d["entries"], dtype=object).reshape(n, -1)
        return cls(d["p"], d["K"], ent)


def matmul(a: MatModPK, b: MatModPK) -> MatModPK:
    if (a.p, a.K) != (b.p, b.K):
        raise ValueError("modulus mismatch")
    prod = (a.entries @ b.entries) % a.pk
    return MatModPK(a.p, a.K, prod)


def sample_additive_haar(N: int, p: int, K: int, rng: np.random.Generator) -> MatModPK:
    """Entries iid uniform on [0, p^K): the mod-p^K pushforward of the additive
    Haar ensemble."""
    ent = rng.integers(0, p**K, size=(N, N), dtype=np.int64 if p**K < 2**62 else object)
    return MatModPK(p, K, np.asarray(ent, dtype=object))


def sample_bernoulli_entries(N: int, p: int, K: int,
                             rng: np.random.Generator) -> MatModPK:
    """0/1-entry matrix mod p^K; a non-Haar toggle kept out of all acceptance
    comparisons."""
    ent = rng.integers(0, 2, size=(N, N))
    return MatModPK(p, K, np.asarray(ent, dtype=object))


def sample_haar_gl(N: int, p: int, K: int, rng: np.random.Generator,
                   budget: int = 1000) -> MatModPK:
    """Uniform invertible matrix mod p^K (uniform + invertibility rejection)."""
    for _ in range(budget):
        m = sample_additive_haar(N, p, K, rng)
        if _det_mod_p_obj(m.entries, p) != 0:
            return m
    raise RuntimeError("invertibility rejection budget exceeded")


def sample_haar_gl_corner(N: int, D: int, p: int, K: int, rng: np.random.Generator,
                          budget: int = 1000) -> MatModPK:
    """Top-left N x N corner of a uniform invertible (N+D) x (N+D) matrix."""
    if D < 1:
        raise ValueError("D must be >= 1")
    big = sample_haar_gl(N + D, p, K, rng, budget)
    return MatModPK(p, K, big.entries[:N, :N])


def _det_mod_p_obj(entries, p: int) -> int:
    """Determinant mod p over Python ints (any matrix size / modulus)."""
    n = entries.shape[0]
    w = [[int(x) % p for x in row] for row in entries]
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if w[r][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            w[c], w[piv] = w[piv], w[c]
            det = -det % p
        det = det * w[c][c] % p
        inv = pow(w[c][c], -1, p)
        for r in range(c + 1, n):
            f = w[r][c] * inv % p
            if f:
                for j in range(c, n):
                    w[r][j] = (w[r][j] - f * w[c][j]) % p
    return det % p


def snf(a: MatModPK) -> SingularNumbers:
    """Smith normal form valuations by repeated minimal-valuation pivoting."""
    arr64 = a.int64_view()
    if arr64 is not None:
        parts, sat = kernels.snf_int64(arr64, a.p, a.K)
        return SingularNumbers(tuple(int(x) for x in parts), bool(sat))
    return _snf_python(a)


def _snf_python(a: MatModPK) -> SingularNumbers:
    p, K, pk = a.p, a.K, a.pk
    w = [[int(x) for x in row] for row in a.entries]
    n, m = a.n_rows, a.n_cols
    nmin = min(n, m)
    parts: List[int] = []
    saturated = False

    def valuation(x: int) -> int:
        if x == 0:
            return K
        v = 0
        while x % p == 0 and v < K:
            x //= p
            v += 1
        return v

    for step in range(nmin):
        best = (K, -1, -1)
        for i in range(step, n):
            for j in range(step, m):
                v = valuation(w[i][j])
                if v < best[0]:
                    best = (v, i, j)
        v, bi, bj = best
        if bi < 0:
            saturated = True
            parts.extend([K] * (nmin - step))
            break
        if bi != step:
            w[step], w[bi] = w[bi], w[step]
        if bj != step:
            for row in w:
                row[step], row[bj] = row[bj], row[step]
        pv = p**v
        inv = pow(w[step][step] // pv, -1, pk)
        w[step] = [(x * inv) % pk for x in w[step]]
        for i in range(step + 1, n):
            f = w[i][step] // pv
            if f:
                w[i] = [(x - f * y) % pk for x, y in zip(w[i], w[step])]
        for j in range(step + 1, m):
            f = w[step][j] // pv
            if f:
                w[step][j] = (w[step][j] - f * w[step][step]) % pk
        parts.append(v)
    return SingularNumbers(tuple(sorted(parts, reverse=True)), saturated)


def det_valuation(a: MatModPK) -> Tuple[int, bool]:
    """(valuation of det mod p^K, capped_flag); exact integer determinant."""
    from fractions import Fraction

    n = a.n_rows
    w = [[int(x) for x in row] for row in a.entries]
    # Bareiss fraction-free elimination over Z
    sign = 1
    for c in range(n - 1):
        piv = next((r for r in range(c, n) if w[r][c] != 0), None)
        if piv is None:
            return a.K, True
        if piv != c:
            w[c], w[piv] = w[piv], w[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                num = w[r][j] * w[c][c] - w[r][c] * w[c][j]
                if c:
                    num //= w[c - 1][c - 1]
                w[r][j] = num
            w[r][c] = 0
    det = sign * w[n - 1][n - 1]
    det %= a.pk
    if det == 0:
        return a.K, True
    v = 0
    while det % a.p == 0:
        det //= a.p
        v += 1
    return v, False


def product_chain(N: int, s: int, ensemble: str, p: int, K: int,
                  rng: np.random.Generator, corner_D: int = 0) -> SingularNumbers:
    """SN of an s-fold product from one of the two matrix ensembles."""
    acc = None
    for _ in range(s):
        if ensemble == "haar_entries":
            fac = sample_additive_haar(N, p, K, rng)
        elif ensemble == "gl_corner":
            fac = sample_haar_gl_corner(N, corner_D, p, K, rng)
        else:
            raise ValueError(f"unknown ensemble {ensemble!r}")
        acc = fac if acc is None else matmul(fac, acc)
    if acc is None:
        raise ValueError("s must be >= 1")
    return snf(acc)


def simulate_X_process(N: int, tau: float, p: int, K: int,
                       rng: np.random.Generator) -> SingularNumbers:
    """One sample of the Poissonized rank-one-defect product at time tau."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    count = rng.poisson(tau)
    acc = sample_haar_gl(N, p, K, rng)
    d = np.ones(N, dtype=object)
    d[0] = p
    for _ in range(count):
        v = sample_haar_gl(N, p, K, rng)
        u = sample_haar_gl(N, p, K, rng)
        step = (v.entries * d[:, None]) % acc.pk  # D*V scales the first row
        step = MatModPK(p, K, step)
        acc = matmul(u, MatModPK(p, K, (step.entries @ acc.entries) % acc.pk))
    return snf(acc)


# --- batch entry points (kernel-backed) ---------------------------------------


def product_chain_batch(N: int, s: int, ensemble: str, p: int, K: int,
                        n_samples: int, seed: int, corner_D: int = 0):
    """(parts array [n_samples, N], saturated flags) for the product ensembles."""
    kernels.check_int64_domain(N + corner_D, p, K)
    out_parts = np.zeros((n_samples, N), np.int64)
    out_sat = np.zeros(n_samples, np.bool_)
    d = corner_D if ensemble == "gl_corner" else 0
    if ensemble == "gl_corner" and corner_D < 1:
        raise ValueError("gl_corner needs corner_D >= 1")
    if ensemble not in ("haar_entries", "gl_corner"):
        raise ValueError(f"unknown ensemble {ensemble!r}")
    ok = kernels.batch_product_chain(N, s, p, K, d, n_samples,
                                     seed % 2**32, out_parts, out_sat)
    if not ok:
        raise RuntimeError("invertibility rejection budget exceeded")
    return out_parts, out_sat


def x_process_batch(N: int, tau: float, p: int, K: int, n_samples: int, seed: int):
    kernels.check_int64_domain(N, p, K)
    out_parts = np.zeros((n_samples, N), np.int64)
    out_sat = np.zeros(n_samples, np.bool_)
    ok = kernels.batch_x_process(N, float(tau), p, K, n_samples,
                                 seed % 2**32, out_parts, out_sat)
    if not ok:
        raise RuntimeError("invertibility rejection budget exceeded")
    return out_parts, out_sat


def random_unimodular(N: int, p: int, K: int, rng: np.random.Generator,
                      n_ops: int = 40) -> MatModPK:
    """Product of random elementary row operations mod p^K (unit determinant
    up to sign); used by construct-then-recover tests."""
    pk = p**K
    m = np.eye(N, dtype=object)
    for _ in range(n_ops):
        i, j = rng.integers(0, N, size=2)
        if i == j:
            continue
        c = int(rng.integers(0, pk))
        m[i, :] = (m[i, :] + c * m[j, :]) % pk
    return MatModPK(p, K, m)
