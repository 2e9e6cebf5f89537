"""Serialization of Gram matrices to CSV and TOML.

Both formats carry the same content: the spec fingerprint, n, p, the basis
tuples (1-based sites) and every entry as ``row, col, re, im`` with 0-based
matrix indices.  Floats are written with 17 significant digits so a
CSV -> TOML -> CSV round trip is byte-identical.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import tomli

from .errors import ValidationError
from .gram import GramMatrix
from .params import _fmt, _fmt_order

FORMATS = ("csv", "toml")


@dataclass(frozen=True, eq=False)
class GramReport:
    spec_hash: str
    n: int
    p: str
    basis: tuple[tuple[int, ...], ...]
    entries: np.ndarray

    @classmethod
    def from_gram(cls, g: GramMatrix) -> "GramReport":
        order = g.spec.nominal_order if g.spec.nominal_order is not None else g.spec.order
        return cls(g.spec.fingerprint(), g.n, _fmt_order(order).strip('"'),
                   g.basis.elements, np.asarray(g.entries))

    def same_as(self, other: "GramReport") -> bool:
        return (self.spec_hash == other.spec_hash and self.n == other.n and self.p == other.p
                and self.basis == other.basis
                and self.entries.tobytes() == other.entries.tobytes())


def _basis_text(el: tuple[int, ...]) -> str:
    return " ".join(str(s + 1) for s in el)


def to_csv(rep: GramReport) -> str:
    buf = io.StringIO()
    buf.write(f"# spec_hash={rep.spec_hash}\n# n={rep.n}\n# p={rep.p}\n")
    buf.write(f"# basis={';'.join(_basis_text(el) for el in rep.basis)}\n")
    buf.write("row,col,re,im\n")
    m = rep.entries
    for r in range(m.shape[0]):
        for c in range(m.shape[1]):
            z = m[r, c]
            buf.write(f"{r},{c},{z.real:.17g},{z.imag:.17g}\n")
    return buf.getvalue()


def to_toml(rep: GramReport) -> str:
    lines = ["[gram]", f'spec_hash = "{rep.spec_hash}"', f"n = {rep.n}", f'p = "{rep.p}"',
             "basis = ["]
    lines += [f"  [{', '.join(str(s + 1) for s in el)}]," for el in rep.basis]
    lines += ["]", "entries = ["]
    m = rep.entries
    for r in range(m.shape[0]):
        for c in range(m.shape[1]):
            z = m[r, c]
            lines.append(f"  [{r}, {c}, {_fmt(z.real)}, {_fmt(z.imag)}],")
    lines.append("]")
    return "\n".join(lines) + "\n"


def _assemble(meta: dict, basis, triples) -> GramReport:
    try:
        n = int(meta["n"])
        p = str(meta["p"])
        spec_hash = str(meta["spec_hash"])
    except KeyError as exc:
        raise ValidationError(f"missing metadata field {exc}") from None
    basis = tuple(tuple(int(s) - 1 for s in el) for el in basis)
    dim = len(basis)
    m = np.zeros((dim, dim), dtype=np.complex128)
    seen = np.zeros((dim, dim), dtype=bool)
    for r, c, re, im in triples:
        r, c = int(r), int(c)
        if not (0 <= r < dim and 0 <= c < dim):
            raise ValidationError(f"entry index ({r}, {c}) out of range")
        m[r, c] = complex(float(re), float(im))
        seen[r, c] = True
    if not seen.all():
        raise ValidationError("Gram report is missing entries")
    return GramReport(spec_hash, n, p, basis, m)


def read_csv(text: str) -> GramReport:
    meta, basis, triples = {}, [], []
    header_seen = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
            continue
        if not header_seen:
            if line != "row,col,re,im":
                raise ValidationError(f"unexpected CSV header {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValidationError(f"malformed CSV row {line!r}")
        triples.append(parts)
    if "basis" in meta:
        basis = [tuple(el.split()) for el in meta["basis"].split(";")]
    return _assemble(meta, basis, triples)


def read_toml(text: str) -> GramReport:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"invalid TOML: {exc}") from None
    if "gram" not in data:
        raise ValidationError("missing [gram] section")
    g = data["gram"]
    return _assemble(g, g.get("basis", []), g.get("entries", []))


def dumps(rep: GramReport, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(rep)
    if fmt == "toml":
        return to_toml(rep)
    raise ValidationError(f"format must be one of {FORMATS}")


def loads(text: str, fmt: str | None = None) -> GramReport:
    if fmt is None:
        fmt = "toml" if text.lstrip().startswith("[") else "csv"
    if fmt == "csv":
        return read_csv(text)
    if fmt == "toml":
        return read_toml(text)
    raise ValidationError(f"format must be one of {FORMATS}")
