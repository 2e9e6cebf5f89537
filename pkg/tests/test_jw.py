import math

import numpy as np
import pytest

from parainterp import ResourceLimitError, ValidationError
from parainterp import jw


def test_single_mode_operator():
    rep = jw.build_rep(1, 1, 3)
    np.testing.assert_allclose(rep.annihilators[0].toarray(),
                               [[0, 1, 0], [0, 0, math.sqrt(2)], [0, 0, 0]])
    assert sorted(set(rep.numbers[0])) == [0, 1, 2]


def test_dimension_and_commutator():
    rep = jw.build_rep(2, 2, 3)
    assert rep.dim == 81
    for m, bop in enumerate(rep.annihilators):
        for k, n in enumerate(rep.numbers):
            comm = (np.diag(n) @ bop.toarray()) - (bop.toarray() @ np.diag(n))
            expect = -bop.toarray() if k == m else 0 * bop.toarray()
            np.testing.assert_allclose(comm, expect, atol=1e-13)


def test_limits():
    with pytest.raises(ResourceLimitError):
        jw.build_rep(2, 3, 5)
    with pytest.raises(ValidationError):
        jw.build_rep(2, 2, 1)


def test_q_number():
    np.testing.assert_allclose(jw.q_number(np.arange(4), 1.0), [0, 1, 2, 3])
    np.testing.assert_allclose(jw.q_number(np.arange(1, 4), 0.0), [1, 1, 1])
    np.testing.assert_allclose(jw.q_number(np.arange(1, 4), -1.0), [1, 0, 1])


def test_params():
    phi = np.array([[0, 0.4], [-0.4, 0]])
    pr = jw.JwParams.from_phi(0.5, 0.5, phi)
    np.testing.assert_allclose(pr.phi, phi)
    assert pr.omega == pytest.approx(0, abs=1e-16)
    with pytest.raises(ValidationError):
        jw.JwParams(1.5, 0, np.zeros((2, 2)))


def test_omega_zero_amplitude_one():
    rep = jw.build_rep(1, 2, 3)
    pr = jw.JwParams.zero_c(0.5, 0.5, 1)
    bs = jw.jw_map(rep, pr)
    vals = np.abs(bs[(0, 1)].data)
    np.testing.assert_allclose(vals, 1.0)


def test_para_bose_point_is_boson_with_string():
    rep = jw.build_rep(2, 2, 3)
    pr = jw.JwParams.zero_c(0.0, 1.0, 2)
    bs = jw.jw_map(rep, pr)
    for (i, a), op in bs.items():
        m = rep.mode(i, a)
        sign = (-1.0) ** sum((rep.green_number(b) for b in range(1, a)), np.zeros(rep.dim))
        np.testing.assert_allclose(op.toarray(), np.diag(sign) @ rep.annihilators[m].toarray(),
                                   atol=1e-15)


@pytest.mark.parametrize("lam,mu", [(0.0, 0.0), (0.25, 0.75), (0.5, 0.5), (0.8, 0.1), (1.0, 1.0)])
def test_relations_hold(lam, mu):
    rep = jw.build_rep(2, 2, 3)
    pr = jw.JwParams.from_phi(lam, mu, np.array([[0, 1.1], [-1.1, 0]]))
    res = jw.algebra_residual(jw.jw_map(rep, pr), pr, rep, relations=("R1", "R2", "R3"))
    for rel in ("R1", "R2", "R3"):
        assert res.max(rel) < 1e-12


def test_symmetric_shift_of_c_is_invisible():
    rep = jw.build_rep(2, 2, 3)
    c = np.array([[0.2, 0.0], [0.9, -0.3]])
    sym = np.array([[0.5, 0.7], [0.7, 1.3]])
    a = jw.JwParams(0.3, 0.6, c)
    b = jw.JwParams(0.3, 0.6, c + sym)
    ra = jw.algebra_residual(jw.jw_map(rep, a), a, rep)
    rb = jw.algebra_residual(jw.jw_map(rep, b), b, rep)
    for rel in ("R1", "R3"):
        assert abs(ra.max(rel) - rb.max(rel)) < 1e-12


def test_same_site_cross_green_exchange_is_minus_one_at_mu_one():
    # at mu = 1 the exchange phase for (i,1),(i,2) is -1 whatever lambda is
    rep = jw.build_rep(1, 2, 3)
    pr = jw.JwParams.zero_c(0.3, 1.0, 1)
    bs = jw.jw_map(rep, pr)
    x, y = bs[(0, 1)], bs[(0, 2)]
    lhs = (x @ y.conj().T).toarray()
    rhs = -(y.conj().T @ x).toarray()
    safe = rep.safe_states()
    np.testing.assert_allclose(lhs[:, safe], rhs[:, safe], atol=1e-14)


def test_unsafe_states_rejected():
    rep = jw.build_rep(1, 1, 3)
    pr = jw.JwParams.zero_c(0.0, 0.0, 1)
    with pytest.raises(ValidationError):
        jw.algebra_residual(jw.jw_map(rep, pr), pr, rep, states=np.array([2]))


def test_csv_header():
    text = jw.residual_grid([(0.0, 1.0)], relations=("R2",)).to_csv()
    assert text.splitlines()[0] == "lambda,mu,relation_id,i,alpha,j,beta,residual"
    assert text.splitlines()[1].startswith("0,1,R2,1,1,1,1,")
