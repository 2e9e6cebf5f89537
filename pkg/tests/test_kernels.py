import itertools

import numpy as np
import pytest

from conftest import random_hermitian
from parainterp import _kernels, build_gram, make_preset


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    if request.param == "numpy":
        monkeypatch.setenv(_kernels.DISABLE_ENV, "1")
    else:
        monkeypatch.delenv(_kernels.DISABLE_ENV, raising=False)
    assert _kernels.backend() == request.param
    return request.param


def test_flag_values(monkeypatch):
    for val in ("1", "true", "YES", "on"):
        monkeypatch.setenv(_kernels.DISABLE_ENV, val)
        assert not _kernels.numba_enabled()
    monkeypatch.setenv(_kernels.DISABLE_ENV, "0")
    assert _kernels.numba_enabled() == _kernels.HAVE_NUMBA


@pytest.mark.parametrize("n,p", [(1, 3), (3, 2), (4, 3)])
def test_green_sums_backends_agree(n, p, rng):
    perms = np.array(list(itertools.permutations(range(n))))
    table = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
    a = _kernels._green_sums_np(perms, table)
    b = _kernels._green_sums_nb(perms, table)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


def test_assembly_backends_agree(backend, rng):
    spec = make_preset("multiparam", q=random_hermitian(rng, 5, 0.9), p=2)
    base = (4, 0, 2, 1, 3)
    g = build_gram(spec, base)
    pos = {s: k for k, s in enumerate(base)}
    perms = np.array([[pos[s] for s in el] for el in g.basis.elements])
    qb = spec.q[np.ix_(base, base)]
    sums = _kernels.green_sums(np.array(list(itertools.permutations(range(5)))), spec.green_table)
    np.testing.assert_allclose(_kernels._assemble_np(perms, np.argsort(perms, axis=1), qb, sums,
                                                     np.array([1, 1, 2, 6, 24, 120])),
                               g.entries, atol=1e-14)


def test_backends_give_same_gram(monkeypatch, rng):
    spec = make_preset("multiparam", q=random_hermitian(rng, 4, 1.0), p=3)
    monkeypatch.delenv(_kernels.DISABLE_ENV, raising=False)
    fast = build_gram(spec, (0, 1, 2, 3)).entries
    monkeypatch.setenv(_kernels.DISABLE_ENV, "1")
    slow = build_gram(spec, (0, 1, 2, 3)).entries
    np.testing.assert_allclose(fast, slow, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("n,p", [(3, 2), (4, 3), (4, 7), (5, 4)])
def test_partition_sums_match_colourings(n, p):
    perms = np.array(list(itertools.permutations(range(n))))
    for same, diff in [(1.0, -1.0), (1.0, 0.35)]:
        table = np.full((p, p), diff, dtype=complex)
        np.fill_diagonal(table, same)
        a = _kernels._green_sums_np(perms, table)
        b = _kernels.green_sums_by_partition(perms, same, diff, p)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


def test_large_order_uses_partitions():
    g = build_gram(make_preset("green", q=0.6, p=1000, sites=4), (0, 1, 2, 3))
    assert g.entries.shape == (24, 24)
