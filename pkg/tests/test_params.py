import math

import numpy as np
import pytest
import tomli

from parainterp import INFINITE, Family, ValidationError, green_q, make_preset
from parainterp.params import DeformationSpec, anyon_q, from_config, to_config


def test_green_q_quon_and_para():
    s = make_preset("green", q=0.4, p=3, sites=2)
    assert green_q(s, 0, 1, 1, 1) == pytest.approx(0.4)
    assert green_q(s, 0, 1, 1, 2) == pytest.approx(-0.4)


def test_speicher_factor():
    s = make_preset("speicher", epsilon=-1, q=0.25, p=2, sites=2)
    assert green_q(s, 0, 1, 1, 1) == pytest.approx(-1.0)
    assert green_q(s, 0, 1, 1, 2) == pytest.approx(-0.25)


def test_infinite_order_normalizes():
    s = make_preset("green", q=0.3, p="inf", sites=2)
    assert s.order == 1
    assert s.nominal_order == INFINITE
    assert s.q[0, 1] == pytest.approx(-0.3)


def test_anyon_q_matrix():
    phi = np.array([[0, 0.5], [-0.5, 0]])
    q = anyon_q(0.25, phi)
    assert q[0, 0] == pytest.approx(math.cos(math.pi / 4))
    assert q[0, 1] == pytest.approx(np.exp(0.5j))
    assert q[1, 0] == pytest.approx(np.exp(-0.5j))


@pytest.mark.parametrize("bad", [
    dict(family="green", q=1.5, p=2),
    dict(family="para", epsilon=0, p=2),
    dict(family="green", q=0.1, p=0),
    dict(family="quon", q=0.1, p=2),
    dict(family="anyon", lam=2.0),
    dict(family="nope", q=0.1),
])
def test_invalid_presets(bad):
    fam = bad.pop("family")
    with pytest.raises(ValidationError):
        make_preset(fam, **bad)


def test_non_hermitian_rejected():
    with pytest.raises(ValidationError):
        DeformationSpec(2, 2, np.array([[0, 0.5], [0.2, 0]]), Family.MULTIPARAM)


def test_spec_is_immutable():
    s = make_preset("green", q=0.1, p=2)
    with pytest.raises(ValueError):
        s.q[0, 0] = 3


@pytest.mark.parametrize("spec", [
    make_preset("green", q=0.1 + 1e-17, p=3, sites=3),
    make_preset("para", epsilon=-1, p=2, sites=2),
    make_preset("quon", q=-0.7, sites=2),
    make_preset("multiparam", q=np.array([[0.1, 0.2 + 0.3j], [0.2 - 0.3j, -0.4]]), p=2),
    make_preset("anyon", lam=0.3, phi={(0, 1): 0.7}, p=2, sites=2),
    make_preset("speicher", epsilon=1, q=0.45, p=3, sites=2),
    make_preset("green", q=1 / 3, p="inf", sites=2),
])
def test_config_roundtrip(spec):
    back = from_config(tomli.loads(to_config(spec))["spec"])
    assert back.fingerprint() == spec.fingerprint()
    assert back.q.tobytes() == spec.q.tobytes()
    assert back.order == spec.order
