"""Hot loops of Gram-matrix assembly.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
fallback with identical semantics.  The numba path is used when numba is
importable and the environment variable ``PARAINTERP_DISABLE_NUMBA`` is not
set to a true value; the flag is read on every call so tests can toggle it.

When ``p**n`` colourings are too many to enumerate, Green sums are computed
by counting set partitions instead (tables that only depend on whether two
Green indices are equal, which covers every preset).
"""

from __future__ import annotations

import itertools
import math
import os

import numpy as np

DISABLE_ENV = "PARAINTERP_DISABLE_NUMBA"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        return decorator


def numba_enabled() -> bool:
    flag = os.environ.get(DISABLE_ENV, "").strip().lower()
    return HAVE_NUMBA and flag not in ("1", "true", "yes", "on")


def backend() -> str:
    return "numba" if numba_enabled() else "numpy"


# -- Green-index sums ---------------------------------------------------------
#
# For a permutation tau of 0..n-1 and a p x p table D:
#     S(tau) = p^-n * sum_{alpha in [p]^n} prod_{a<b, tau[a]>tau[b]} D[alpha_a, alpha_b]


@njit(cache=True)
def _green_sums_nb(perms, table):
    m, n = perms.shape
    p = table.shape[0]
    total = p**n
    out = np.zeros(m, dtype=np.complex128)
    alpha = np.zeros(n, dtype=np.int64)
    pa = np.zeros(n * (n - 1) // 2 + 1, dtype=np.int64)
    pb = np.zeros(n * (n - 1) // 2 + 1, dtype=np.int64)
    for t in range(m):
        cnt = 0
        for a in range(n):
            for b in range(a + 1, n):
                if perms[t, a] > perms[t, b]:
                    pa[cnt] = a
                    pb[cnt] = b
                    cnt += 1
        acc = 0.0 + 0.0j
        for k in range(total):
            r = k
            for a in range(n):
                alpha[a] = r % p
                r //= p
            prod = 1.0 + 0.0j
            for c in range(cnt):
                prod *= table[alpha[pa[c]], alpha[pb[c]]]
            acc += prod
        out[t] = acc / total
    return out


def _green_sums_np(perms: np.ndarray, table: np.ndarray) -> np.ndarray:
    m, n = perms.shape
    p = table.shape[0]
    # column a holds alpha_a; row order matches the numba digit decoding
    alphas = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)[:, ::-1]
    out = np.empty(m, dtype=np.complex128)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for t in range(m):
        inv = (perms[t][:, None] > perms[t][None, :]) & upper
        a_idx, b_idx = np.nonzero(inv)
        vals = table[alphas[:, a_idx], alphas[:, b_idx]]
        out[t] = np.prod(vals, axis=1).sum() / alphas.shape[0]
    return out


def _set_partitions(n: int):
    """Restricted-growth strings: block label of each position, labels in first-use order."""
    labels = [0] * n

    def rec(pos, used):
        if pos == n:
            yield tuple(labels), used
            return
        for b in range(used + 1):
            labels[pos] = b
            yield from rec(pos + 1, max(used, b + 1))

    if n == 0:
        yield (), 0
        return
    yield from rec(0, 0)


def green_sums_by_partition(perms: np.ndarray, same: complex, diff: complex, p: int) -> np.ndarray:
    """Green sums for tables ``D = diff + (same - diff) I``.

    Colourings are grouped by which positions share an index: a set partition
    with k blocks is realized by ``p (p-1) ... (p-k+1)`` colourings.  Cost is
    Bell(n) per permutation, independent of p.
    """
    m, n = perms.shape
    parts = [(np.array(lab), math.perm(p, k)) for lab, k in _set_partitions(n) if k <= p]
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    out = np.empty(m, dtype=np.complex128)
    for t in range(m):
        inv = (perms[t][:, None] > perms[t][None, :]) & upper
        a_idx, b_idx = np.nonzero(inv)
        acc = 0j
        for lab, count in parts:
            eq = lab[a_idx] == lab[b_idx]
            acc += count * same ** int(eq.sum()) * diff ** int((~eq).sum())
        out[t] = acc / float(p) ** n
    return out


def _equality_structured(table: np.ndarray) -> bool:
    p = table.shape[0]
    if p < 2:
        return True
    off = table[~np.eye(p, dtype=bool)]
    return bool(np.all(np.diag(table) == table[0, 0]) and np.all(off == off[0]))


COLOURING_LIMIT = 10**6


def green_sums(perms: np.ndarray, table: np.ndarray) -> np.ndarray:
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    table = np.ascontiguousarray(table, dtype=np.complex128)
    if perms.ndim != 2:
        raise ValueError("perms must be a 2-d array")
    p, n = table.shape[0], perms.shape[1]
    if p**n > COLOURING_LIMIT:
        if not _equality_structured(table):
            raise ValueError(f"{p}^{n} colourings exceed the enumeration limit")
        diff = table[0, 1] if p > 1 else 0.0
        return green_sums_by_partition(perms, table[0, 0], diff, p)
    if numba_enabled():
        return _green_sums_nb(perms, table)
    return _green_sums_np(perms, table)


# -- Gram assembly ------------------------------------------------------------
#
# Basis element r is the tuple base[perms[r]].  For row r (pi) and column c
# (sigma) let tau = sigma^-1 pi.  Then
#     G[r, c] = sums[rank(tau)] * prod_{a<b, tau[a]>tau[b]} qb[pi[a], pi[b]]
# where qb[x, y] = q[base[x], base[y]] and rank is the lexicographic rank.


@njit(cache=True)
def _assemble_nb(perms, inv_perms, qb, sums, fact):
    m, n = perms.shape
    out = np.zeros((m, m), dtype=np.complex128)
    tau = np.zeros(n, dtype=np.int64)
    for r in range(m):
        for c in range(r, m):
            for a in range(n):
                tau[a] = inv_perms[c, perms[r, a]]
            prod = 1.0 + 0.0j
            rank = 0
            for a in range(n):
                smaller = 0
                for b in range(a + 1, n):
                    if tau[a] > tau[b]:
                        smaller += 1
                        prod *= qb[perms[r, a], perms[r, b]]
                rank += smaller * fact[n - 1 - a]
            val = sums[rank] * prod
            out[r, c] = val
            if c != r:
                out[c, r] = np.conj(val)
    return out


def _assemble_np(perms, inv_perms, qb, sums, fact):
    m, n = perms.shape
    out = np.zeros((m, m), dtype=np.complex128)
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    weights = fact[n - 1 - np.arange(n)]
    for r in range(m):
        pi = perms[r]
        taus = inv_perms[:, pi]  # taus[c, a] = sigma_c^-1(pi(a))
        inv = (taus[:, :, None] > taus[:, None, :]) & upper
        ranks = inv.sum(axis=2) @ weights
        qf = qb[pi[:, None], pi[None, :]]
        prods = np.where(inv, qf[None, :, :], 1.0).prod(axis=(1, 2))
        out[r] = sums[ranks] * prods
    return np.triu(out) + np.triu(out, 1).conj().T


def assemble(perms: np.ndarray, qb: np.ndarray, sums: np.ndarray) -> np.ndarray:
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    n = perms.shape[1]
    inv_perms = np.argsort(perms, axis=1).astype(np.int64)
    fact = np.array([math.factorial(k) for k in range(n + 1)], dtype=np.int64)
    qb = np.ascontiguousarray(qb, dtype=np.complex128)
    sums = np.ascontiguousarray(sums, dtype=np.complex128)
    if numba_enabled():
        return _assemble_nb(perms, inv_perms, qb, sums, fact)
    return _assemble_np(perms, inv_perms, qb, sums, fact)
