"""Inner-product (Gram) matrices of multiparticle states.

For a base tuple of sites ``(i_1, ..., i_n)`` the basis consists of its
distinct orderings, sorted lexicographically.  The state of an ordering
``t`` is ``A+_{t_1} ... A+_{t_n}|0>`` and the Gram entry is

    G[row, col] = <0| A_{row_n} ... A_{row_1} A+_{col_1} ... A+_{col_n} |0>.

For pairwise-distinct sites the closed form is

    G = p^-n sum_alpha prod_{(a,b) in inv(sigma^-1 pi)} q[r_a, r_b] D[alpha_a, alpha_b]

with ``r`` the row tuple, ``D`` the spec's Green table and
``r_a = base[pi(a)]``.  Rows and columns with repeated sites are evaluated
by the normal-ordering oracle instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import ResourceLimitError, ValidationError
from .params import DeformationSpec

MAX_N = 7
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class Permutation:
    """Element of S_n stored as 1-based images ``(pi(1), ..., pi(n))``."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValidationError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_zero_based(cls, images: Iterable[int]) -> "Permutation":
        return cls(tuple(int(x) + 1 for x in images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, a: int) -> int:
        return self.images[a - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """``(self o other)(a) = self(other(a))``."""
        if other.degree != self.degree:
            raise ValidationError("degree mismatch")
        return Permutation(tuple(self(other(a)) for a in range(1, self.degree + 1)))

    __mul__ = compose

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for a, img in enumerate(self.images, start=1):
            inv[img - 1] = a
        return Permutation(tuple(inv))

    def inversions(self) -> frozenset[tuple[int, int]]:
        n = self.degree
        return frozenset(
            (a, b)
            for a in range(1, n + 1)
            for b in range(a + 1, n + 1)
            if self(a) > self(b)
        )

    def zero_based(self) -> tuple[int, ...]:
        return tuple(x - 1 for x in self.images)


@dataclass(frozen=True)
class InversionSet:
    pairs: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs


def inversion_pairs(pi: Permutation, sigma: Permutation) -> InversionSet:
    """Pairs ``a < b`` with ``(sigma^-1 pi)(a) > (sigma^-1 pi)(b)``."""
    if pi.degree != sigma.degree:
        raise ValidationError(f"degree mismatch: {pi.degree} vs {sigma.degree}")
    return InversionSet(sigma.inverse().compose(pi).inversions())


@dataclass(frozen=True)
class GramBasis:
    base_tuple: tuple[int, ...]
    elements: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, base_tuple: Sequence[int]) -> "GramBasis":
        base = tuple(int(x) for x in base_tuple)
        if not base:
            raise ValidationError("base tuple must be non-empty")
        elements = tuple(sorted(set(itertools.permutations(base))))
        return cls(base, elements)

    @property
    def n(self) -> int:
        return len(self.base_tuple)

    @property
    def distinct(self) -> bool:
        return len(set(self.base_tuple)) == len(self.base_tuple)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, element: Sequence[int]) -> int:
        return self.elements.index(tuple(element))

    def permutation(self, element: Sequence[int]) -> Permutation:
        """``pi`` with ``element[a] = base[pi(a)]``; requires distinct base sites."""
        if not self.distinct:
            raise ValidationError("permutation labels need pairwise-distinct base sites")
        pos = {s: k for k, s in enumerate(self.base_tuple)}
        return Permutation.from_zero_based(pos[s] for s in element)

    def element(self, pi: Permutation) -> tuple[int, ...]:
        return tuple(self.base_tuple[x] for x in pi.zero_based())


@dataclass(frozen=True, eq=False)
class GramMatrix:
    spec: DeformationSpec
    basis: GramBasis
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def dim(self) -> int:
        return len(self.basis)

    def entry(self, row: Sequence[int], col: Sequence[int]) -> complex:
        return complex(self.entries[self.basis.index(row), self.basis.index(col)])

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


def _check_sites(spec: DeformationSpec, sites: Iterable[int]) -> None:
    for s in sites:
        if not 0 <= s < spec.site_count:
            raise ValidationError(f"site {s} out of range for {spec.site_count} sites")


def _finite(spec: DeformationSpec) -> DeformationSpec:
    if not spec.is_finite:
        raise ValidationError("INFINITE order must be normalized (use make_preset) first")
    return spec


@lru_cache(maxsize=64)
def _green_sum_table(n: int, table_bytes: bytes, p: int) -> np.ndarray:
    table = np.frombuffer(table_bytes, dtype=np.complex128).reshape(p, p)
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    out = _kernels.green_sums(perms, table)
    out.setflags(write=False)
    return out


def green_sum_table(spec: DeformationSpec, n: int) -> np.ndarray:
    """Green-index sums for every ``tau`` in S_n, indexed by lexicographic rank."""
    table = np.ascontiguousarray(_finite(spec).green_table, dtype=np.complex128)
    return _green_sum_table(n, table.tobytes(), spec.order)


def gram_entry(
    spec: DeformationSpec, basis: GramBasis, row: Permutation, col: Permutation
) -> complex:
    """Closed-form matrix element for pairwise-distinct base sites."""
    _finite(spec)
    if not basis.distinct:
        raise ValidationError("repeated base sites: use the oracle path (build_gram)")
    n = basis.n
    if row.degree != n or col.degree != n:
        raise ValidationError("permutation degree does not match the basis")
    _check_sites(spec, basis.base_tuple)
    pairs = inversion_pairs(row, col)
    r = basis.element(row)
    qprod = complex(1.0)
    for a, b in pairs:
        qprod *= spec.q[r[a - 1], r[b - 1]]
    tau = col.inverse().compose(row)
    gsum = _kernels.green_sums(np.array([tau.zero_based()]), spec.green_table)[0]
    return complex(qprod * gsum)


def build_gram(
    spec: DeformationSpec, base_tuple: Sequence[int], *, max_n: int = MAX_N
) -> GramMatrix:
    """Full Hermitian Gram matrix over the distinct orderings of ``base_tuple``."""
    _finite(spec)
    basis = GramBasis.of(base_tuple)
    if basis.n > max_n:
        raise ResourceLimitError(f"n = {basis.n} exceeds the limit {max_n}")
    _check_sites(spec, basis.base_tuple)
    if basis.distinct:
        n = basis.n
        pos = {s: k for k, s in enumerate(basis.base_tuple)}
        perms = np.array([[pos[s] for s in el] for el in basis.elements], dtype=np.int64)
        idx = np.array(basis.base_tuple)
        qb = spec.q[np.ix_(idx, idx)]
        entries = _kernels.assemble(perms, qb, green_sum_table(spec, n))
    else:
        from .oracle import a_gram_matrix

        entries = a_gram_matrix(spec, basis.elements)
    entries = entries + 0.0  # drop signed zeros from conjugation
    entries.setflags(write=False)
    return GramMatrix(spec, basis, entries)
