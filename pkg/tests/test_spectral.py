import itertools

import numpy as np
import pytest

from parainterp import ValidationError, build_gram, make_preset
from parainterp.spectral import positivity_scan, rank_scan_anyon, spectrum


def sign_matrix_rank(n, p, eps):
    """Rank of the q = eps Gram matrix from its permutation-group form.

    For |q| = 1 the Gram entry is eps^inv(tau) S_p(tau), S_p the Green sum,
    so the rank is that of the class function on S_n built from colourings.
    """
    perms = list(itertools.permutations(range(n)))
    alphas = list(itertools.product(range(p), repeat=n))

    def val(tau):
        inv = [(a, b) for a in range(n) for b in range(a + 1, n) if tau[a] > tau[b]]
        s = sum(np.prod([1 if al[a] == al[b] else -1 for a, b in inv]) for al in alphas)
        return eps ** len(inv) * s / p**n

    def compose_inv(s, t):
        inv_s = [0] * n
        for k, x in enumerate(s):
            inv_s[x] = k
        return tuple(inv_s[t[k]] for k in range(n))

    m = np.array([[val(compose_inv(s, t)) for s in perms] for t in perms])
    return np.linalg.matrix_rank(m, tol=1e-9)


def test_p1_eigenvalues():
    rep = spectrum(build_gram(make_preset("quon", q=0.3, sites=2), (0, 1)))
    np.testing.assert_allclose(rep.eigenvalues, [0.7, 1.3], atol=1e-15)
    assert rep.rank == 2


def test_positive_near_boundary():
    rep = spectrum(build_gram(make_preset("green", q=0.99, p=2, sites=5), tuple(range(5))))
    assert rep.min_eig > 0
    assert rep.rank == 120


@pytest.mark.parametrize("n,p,expected", [(3, 1, 1), (4, 1, 1), (3, 2, 3), (4, 2, 6), (3, 3, 4), (4, 3, 9)])
@pytest.mark.parametrize("q", [1.0, -1.0])
def test_rank_at_para_points(n, p, expected, q):
    # expected = sum of dimensions of S_n irreps with at most p rows
    rep = spectrum(build_gram(make_preset("green", q=q, p=p, sites=n), tuple(range(n))))
    assert rep.rank == expected
    assert sign_matrix_rank(n, p, q) == expected


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        spectrum(np.array([[1, 2], [0, 1]]))


def test_positivity_scan_csv():
    scan = positivity_scan(lambda q: make_preset("quon", q=q, sites=2), (0, 1), [-1, 0, 1])
    assert scan.to_csv() == "param,min_eig,rank\n-1,0,1\n0,1,2\n1,0,1\n"
    np.testing.assert_array_equal(scan.singular_points, [-1, 1])
    assert len(scan.violations) == 0


def test_scan_threads_match_serial():
    fam = lambda q: make_preset("green", q=q, p=3, sites=4)
    grid = np.linspace(-1, 1, 9)
    a = positivity_scan(fam, (0, 1, 2, 3), grid)
    b = positivity_scan(fam, (0, 1, 2, 3), grid, workers=4)
    assert a.to_csv() == b.to_csv()


def test_scan_grid_checks():
    fam = lambda q: make_preset("quon", q=q, sites=2)
    with pytest.raises(ValidationError):
        positivity_scan(fam, (0, 1), [0.5, 0.1])
    with pytest.raises(ValidationError):
        positivity_scan(fam, (0, 1), [0.0, 1.5])


def test_anyon_rank_scan_two_particles():
    scan = rank_scan_anyon(np.linspace(0, 1, 5), np.array([[0, 0.3], [-0.3, 0]]), 2, (0, 1))
    assert list(scan.ranks) == [2] * 5
