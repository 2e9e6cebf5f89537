import numpy as np
import pytest

from conftest import random_hermitian
from parainterp import ValidationError, build_gram, make_preset
from parainterp import report


@pytest.fixture
def gram(rng):
    return build_gram(make_preset("multiparam", q=random_hermitian(rng, 3, 0.9), p=3), (0, 2, 1))


def test_csv_roundtrip(gram):
    rep = report.GramReport.from_gram(gram)
    back = report.read_csv(report.to_csv(rep))
    assert back.same_as(rep)


def test_toml_roundtrip(gram):
    rep = report.GramReport.from_gram(gram)
    back = report.read_toml(report.to_toml(rep))
    assert back.same_as(rep)
    assert report.to_csv(back) == report.to_csv(rep)


def test_infinite_order_label():
    g = build_gram(make_preset("green", q=0.2, p="inf", sites=2), (0, 1))
    assert report.GramReport.from_gram(g).p == "inf"


def test_csv_layout(gram):
    lines = report.to_csv(report.GramReport.from_gram(gram)).splitlines()
    assert lines[0].startswith("# spec_hash=")
    assert lines[3] == "# basis=1 2 3;1 3 2;2 1 3;2 3 1;3 1 2;3 2 1"
    assert lines[4] == "row,col,re,im"
    assert len(lines) == 5 + 36


@pytest.mark.parametrize("text", [
    "# n=2\n# p=1\n# basis=1 2;2 1\nrow,col,re,im\n0,0,1,0\n",
    "[gram]\nn = 2\n",
    "# spec_hash=x\n# n=1\n# p=1\n# basis=1\nbad,header\n",
])
def test_malformed(text):
    with pytest.raises(ValidationError):
        report.loads(text)
