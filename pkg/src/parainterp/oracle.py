"""Vacuum expectation values by normal-ordering rewriting.

This is the ground-truth engine.  Words are read right to left: the
rightmost letter acts first on ``|0>``.  A creation letter is prepended to
every creator string of the current ket; an annihilation letter ``b_x``
sitting in front of a creator string is moved right one step at a time with

    b_x b+_y = delta_xy + q_{x,y} b+_y b_x,      b_x |0> = 0,

where ``q_{x,y} = q[i, j] * D[alpha, beta]`` for ``x = (i, alpha)``,
``y = (j, beta)``.  No annihilator-annihilator relation is ever used, so the
singular points ``|q| = 1`` need no special treatment.

Composite letters ``A_i = p^-1/2 sum_alpha b_i^alpha`` act by linearity.
"""

from __future__ import annotations

import itertools
import re
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .params import DeformationSpec

MAX_LENGTH = 12
MAX_TERMS = 10**7


class Kind(str, Enum):
    ANNIHILATE = "annihilate"
    CREATE = "create"


class Op(str, Enum):
    A = "a"
    B = "b"


@dataclass(frozen=True)
class Letter:
    kind: Kind
    op: Op
    site: int
    green: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "op", Op(self.op))
        if self.site < 0:
            raise ValidationError(f"negative site {self.site}")
        if self.op is Op.B and (self.green is None or self.green < 1):
            raise ValidationError("B letters need a green index >= 1")
        if self.op is Op.A and self.green is not None:
            raise ValidationError("A letters carry no green index")

    def dagger(self) -> "Letter":
        kind = Kind.CREATE if self.kind is Kind.ANNIHILATE else Kind.ANNIHILATE
        return Letter(kind, self.op, self.site, self.green)

    def __str__(self) -> str:
        plus = "+" if self.kind is Kind.CREATE else ""
        inner = f"i{self.site + 1}" if self.op is Op.A else f"i{self.site + 1},g{self.green}"
        return f"{self.op.value}{plus}({inner})"


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...]
    coefficient: complex = 1.0

    def __post_init__(self) -> None:
        letters = tuple(self.letters)
        ops = {x.op for x in letters}
        if len(ops) > 1:
            raise ValidationError("mixed A/B words are not allowed; expand A letters first")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def op(self) -> Op | None:
        return self.letters[0].op if self.letters else None

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "Word") -> "Word":
        """Concatenation (operator product)."""
        return Word(self.letters + other.letters, self.coefficient * other.coefficient)

    def scaled(self, c: complex) -> "Word":
        return Word(self.letters, self.coefficient * c)

    def dagger(self) -> "Word":
        return Word(tuple(x.dagger() for x in reversed(self.letters)),
                    self.coefficient.conjugate())

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.letters)


@dataclass(frozen=True)
class VevResult:
    value: complex
    rewrite_count: int


# -- construction helpers ------------------------------------------------------

def ket_word(sites: Sequence[int], greens: Sequence[int] | None = None) -> Word:
    """Creators for the state ``X+_{t_1} ... X+_{t_n}|0>`` (A letters unless greens given)."""
    if greens is None:
        return Word(tuple(Letter(Kind.CREATE, Op.A, s) for s in sites))
    return Word(tuple(Letter(Kind.CREATE, Op.B, s, g) for s, g in zip(sites, greens)))


def bra_word(sites: Sequence[int], greens: Sequence[int] | None = None) -> Word:
    """Annihilators for the bra ``<0| X_{t_n} ... X_{t_1}`` of the same state."""
    return ket_word(sites, greens).dagger()


def a(site: int) -> Letter:
    return Letter(Kind.ANNIHILATE, Op.A, site)


def ad(site: int) -> Letter:
    return Letter(Kind.CREATE, Op.A, site)


def b(site: int, green: int) -> Letter:
    return Letter(Kind.ANNIHILATE, Op.B, site, green)


def bd(site: int, green: int) -> Letter:
    return Letter(Kind.CREATE, Op.B, site, green)


def word(*letters: Letter, coefficient: complex = 1.0) -> Word:
    return Word(tuple(letters), coefficient)


_TOKEN = re.compile(r"^([ab])(\+?)\(\s*i(\d+)\s*(?:,\s*g(\d+)\s*)?\)$")


def parse_word(text: str) -> Word:
    """Parse ``a(i2) a+(i1)`` / ``b(i1,g2) b+(i1,g2)`` (1-based labels)."""
    letters = []
    for token in text.split():
        m = _TOKEN.match(token)
        if not m:
            raise ValidationError(f"cannot parse letter {token!r}")
        op, plus, site, green = m.groups()
        if int(site) < 1:
            raise ValidationError(f"site labels start at i1: {token!r}")
        kind = Kind.CREATE if plus else Kind.ANNIHILATE
        if op == "a" and green is not None:
            raise ValidationError(f"a letters take no green index: {token!r}")
        if op == "b" and green is None:
            raise ValidationError(f"b letters need a green index: {token!r}")
        letters.append(Letter(kind, Op(op), int(site) - 1, None if green is None else int(green)))
    return Word(tuple(letters))


# -- engine --------------------------------------------------------------------

class _Engine:
    """Applies letters to kets stored as ``{creator string: coefficient}``.

    The memo maps ``(label, string)`` to the result of moving one annihilator
    through a creator string; it lives on the engine, so it is private to the
    call that created it.
    """

    def __init__(self, spec: DeformationSpec, *, cache: bool = True,
                 max_terms: int = MAX_TERMS) -> None:
        if not spec.is_finite:
            raise ValidationError("INFINITE order must be normalized first")
        self.spec = spec
        self.p = spec.order
        self.factors = spec.factor_matrix().tolist()
        self.memo: dict | None = {} if cache else None
        self.max_terms = max_terms
        self.terms = 0
        self.rewrites = 0

    def _labels(self, letter: Letter) -> list[tuple[int, float]]:
        if letter.site >= self.spec.site_count:
            raise ValidationError(
                f"site i{letter.site + 1} exceeds the spec's {self.spec.site_count} sites"
            )
        base = letter.site * self.p
        if letter.op is Op.B:
            if letter.green > self.p:
                raise ValidationError(f"green index g{letter.green} exceeds order {self.p}")
            return [(base + letter.green - 1, 1.0)]
        return [(base + g, 1.0) for g in range(self.p)]

    def annihilate(self, x: int, string: tuple[int, ...]) -> list[tuple[complex, tuple[int, ...]]]:
        if self.memo is not None:
            hit = self.memo.get((x, string))
            if hit is not None:
                return hit
        row = self.factors[x]
        out = []
        f = 1.0 + 0.0j
        for k, y in enumerate(string):
            if y == x:
                out.append((f, string[:k] + string[k + 1:]))
                self.rewrites += 1
            f *= row[y]
            self.rewrites += 1
            if f == 0:
                break
        if self.memo is not None:
            self.memo[(x, string)] = out
        return out

    def _count(self, n: int) -> None:
        self.terms += n
        if self.terms > self.max_terms:
            raise ResourceLimitError(f"expanded-term budget {self.max_terms} exceeded")

    def apply(self, letter: Letter, state: dict) -> dict:
        out: dict = defaultdict(complex)
        labels = self._labels(letter)
        if letter.kind is Kind.CREATE:
            for s, c in state.items():
                for x, w in labels:
                    out[(x,) + s] += c * w
        else:
            for s, c in state.items():
                for x, w in labels:
                    for f, sub in self.annihilate(x, s):
                        out[sub] += c * w * f
        self._count(len(out))
        return out

    def apply_word(self, w: Word, state: dict | None = None) -> dict:
        state = {(): 1.0 + 0.0j} if state is None else state
        for letter in reversed(w.letters):
            state = self.apply(letter, state)
        # A letters carry p^-1/2 each; applied once per word to limit rounding
        n_a = sum(1 for x in w.letters if x.op is Op.A)
        scale = w.coefficient * (self.p ** (-n_a / 2) if n_a else 1.0)
        if scale != 1:
            state = {s: c * scale for s, c in state.items()}
        return state

    def vev(self, w: Word) -> complex:
        return complex(self.apply_word(w).get((), 0.0))

    def sandwich(self, bra: Word, terms: Sequence[Word], ket: Word) -> complex:
        """``sum_t <bra| t |ket>`` reusing the ket state for all terms."""
        ket_state = self.apply_word(ket)
        total: dict = defaultdict(complex)
        for t in terms:
            for s, c in self.apply_word(t, ket_state).items():
                total[s] += c
        return complex(self.apply_word(bra, total).get((), 0.0))

    def string_inner(self, u: tuple[int, ...], v: tuple[int, ...]) -> complex:
        """``<u|v>`` for creator strings of b labels (u is the bra's ket string)."""
        if sorted(u) != sorted(v):
            return 0j
        state = {v: 1.0 + 0.0j}
        for x in u:
            nxt: dict = defaultdict(complex)
            for s, c in state.items():
                for f, sub in self.annihilate(x, s):
                    nxt[sub] += c * f
            state = nxt
        return complex(state.get((), 0.0))


def _check_length(w: Word, max_length: int) -> None:
    if len(w) > max_length:
        raise ResourceLimitError(f"word length {len(w)} exceeds the limit {max_length}")


def vev_b_word(spec: DeformationSpec, w: Word, *, cache: bool = True,
               max_length: int = MAX_LENGTH, max_terms: int = MAX_TERMS) -> VevResult:
    """``<0| w |0>`` for a word of Green-oscillator letters."""
    if w.op is Op.A:
        raise ValidationError("vev_b_word needs B letters")
    _check_length(w, max_length)
    eng = _Engine(spec, cache=cache, max_terms=max_terms)
    return VevResult(eng.vev(w), eng.rewrites)


def expand_a(spec: DeformationSpec, w: Word, *, max_terms: int = MAX_TERMS) -> list[Word]:
    """Expand every ``A`` letter into ``p^-1/2 sum_alpha b^alpha``."""
    if w.op is not Op.A:
        return [w]
    p = spec.order
    if p ** len(w) > max_terms:
        raise ResourceLimitError(f"expansion of {p}^{len(w)} words exceeds the budget")
    coef = w.coefficient * p ** (-len(w) / 2)
    return [
        Word(tuple(Letter(x.kind, Op.B, x.site, g) for x, g in zip(w.letters, greens)), coef)
        for greens in itertools.product(range(1, p + 1), repeat=len(w))
    ]


def vev_a_word(spec: DeformationSpec, w: Word, *, expand: bool = False, cache: bool = True,
               max_length: int = MAX_LENGTH, max_terms: int = MAX_TERMS) -> VevResult:
    """``<0| w |0>`` for a word of composite ``A`` letters.

    With ``expand=True`` the word is first expanded into ``p^len`` B-words
    whose values are summed; otherwise ``A`` letters act by linearity on the
    ket, which gives the same number with far fewer rewrites.
    """
    if w.op is Op.B:
        raise ValidationError("vev_a_word needs A letters")
    _check_length(w, max_length)
    eng = _Engine(spec, cache=cache, max_terms=max_terms)
    if not expand:
        return VevResult(eng.vev(w), eng.rewrites)
    total = 0j
    for bw in expand_a(spec, w, max_terms=max_terms):
        total += eng.vev(bw)
    return VevResult(total, eng.rewrites)


def a_inner(spec: DeformationSpec, row: Sequence[int], col: Sequence[int]) -> complex:
    """``<row|col>`` for composite states ``A+_{t_1}...A+_{t_n}|0>``."""
    if len(row) != len(col) or sorted(row) != sorted(col):
        return 0j
    return vev_a_word(spec, bra_word(row) + ket_word(col), max_length=10**6).value


def a_gram_matrix(spec: DeformationSpec, elements: Sequence[Sequence[int]]) -> np.ndarray:
    """Gram matrix over arbitrary composite-state tuples (oracle path)."""
    eng = _Engine(spec)
    m = len(elements)
    out = np.zeros((m, m), dtype=np.complex128)
    kets = [eng.apply_word(ket_word(t)) for t in elements]
    for r, row in enumerate(elements):
        bra = bra_word(row)
        for c in range(r, m):
            if sorted(row) != sorted(elements[c]):
                continue
            val = complex(eng.apply_word(bra, kets[c]).get((), 0.0))
            out[r, c] = val
            out[c, r] = val.conjugate() if c != r else val.real
    return out


# -- algebraic relation checks --------------------------------------------------

def _sign_of(spec: DeformationSpec, sign) -> int:
    if sign is None:
        q = spec.scalar_q
        if q is None or abs(abs(q) - 1) > 1e-12:
            raise ValidationError("trilinear relations need uniform q = +1 or -1 (or an explicit sign)")
        return 1 if q > 0 else -1
    if sign in ("+", 1, 1.0):
        return 1
    if sign in ("-", -1, -1.0):
        return -1
    raise ValidationError(f"sign must be '+' or '-', got {sign!r}")


def trilinear_terms(spec: DeformationSpec, k: int, l: int, m: int, sign) -> list[Word]:
    """Words of ``[A_k, [A+_l, A_m]_pm] - (2/p) delta_kl A_m``."""
    s = _sign_of(spec, sign)
    terms = [
        word(a(k), ad(l), a(m)),
        word(a(k), a(m), ad(l), coefficient=s),
        word(ad(l), a(m), a(k), coefficient=-1),
        word(a(m), ad(l), a(k), coefficient=-s),
    ]
    if k == l:
        terms.append(word(a(m), coefficient=-2.0 / spec.order))
    return terms


def trilinear_defect(spec: DeformationSpec, k: int, l: int, m: int, bra: Word, ket: Word,
                     sign=None) -> complex:
    """``<bra| [A_k, [A+_l, A_m]_pm] - (2/p) delta_kl A_m |ket>``.

    ``sign`` defaults to ``+`` for q = +1 (para-Bose) and ``-`` for q = -1
    (para-Fermi); other uniform q need an explicit sign.
    """
    if spec.scalar_q is None:
        raise ValidationError("trilinear check needs a uniform real q")
    for w in (bra, ket):
        if w.op is Op.B:
            raise ValidationError("bra and ket must be A-words")
    eng = _Engine(spec)
    return eng.sandwich(bra, trilinear_terms(spec, k, l, m, sign), ket)


def nonclosure_terms(spec: DeformationSpec, i: int, j: int) -> list[Word]:
    """B-words of ``A_i A+_j + q A+_j A_i - delta_ij - q K_ij``."""
    q = spec.scalar_q
    if q is None:
        raise ValidationError("non-closure identity needs a uniform real q")
    p = spec.order
    terms = expand_a(spec, word(a(i), ad(j)))
    terms += expand_a(spec, word(ad(j), a(i), coefficient=q))
    if i == j:
        terms.append(Word((), -1.0))
    terms += [word(bd(j, g), b(i, g), coefficient=-q * 2.0 / p) for g in range(1, p + 1)]
    return terms


def nonclosure_defect(spec: DeformationSpec, i: int, j: int, bra: Word, ket: Word) -> complex:
    """``<bra| A_i A+_j + q A+_j A_i - delta_ij - q K_ij |ket>`` with B-word bra/ket."""
    for w in (bra, ket):
        if w.op is Op.A:
            raise ValidationError("bra and ket must be B-words")
    eng = _Engine(spec)
    return eng.sandwich(bra, nonclosure_terms(spec, i, j), ket)


@dataclass(frozen=True)
class ScanResult:
    max_abs: float
    elements: int
    witness: tuple


def _tuples(sites: Sequence[int], n: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(sites, repeat=n)


def trilinear_scan(spec: DeformationSpec, sites: Sequence[int], max_particles: int = 3,
                   sign=None) -> ScanResult:
    """Largest trilinear defect over all ``k, l, m`` and states up to ``max_particles``."""
    eng = _Engine(spec)
    best, count, witness = 0.0, 0, ()
    for k, l, m in _tuples(sites, 3):
        terms = trilinear_terms(spec, k, l, m, sign)
        for n in range(1, max_particles + 1):
            for kt in _tuples(sites, n):
                ket_state = eng.apply_word(ket_word(kt))
                total: dict = defaultdict(complex)
                for t in terms:
                    for s, c in eng.apply_word(t, ket_state).items():
                        total[s] += c
                for bt in _tuples(sites, n - 1):
                    val = complex(eng.apply_word(bra_word(bt), total).get((), 0.0))
                    count += 1
                    if abs(val) > best:
                        best, witness = abs(val), (k, l, m, bt, kt, val)
    return ScanResult(best, count, witness)


def nonclosure_scan(spec: DeformationSpec, sites: Sequence[int], max_len: int = 3) -> ScanResult:
    """Largest non-closure defect over all ``i, j`` and B-words up to ``max_len``.

    Bras outside the multiset of a ket component give exactly zero, so only
    orderings of each component's labels are paired.
    """
    eng = _Engine(spec)
    p = spec.order
    labels = [s * p + g for s in sites for g in range(p)]
    inner: dict = {}
    best, count, witness = 0.0, 0, ()
    for i, j in _tuples(sites, 2):
        terms = nonclosure_terms(spec, i, j)
        for n in range(0, max_len + 1):
            for kt in itertools.product(labels, repeat=n):
                ket_state = {kt: 1.0 + 0.0j}
                total: dict = defaultdict(complex)
                for t in terms:
                    for s, c in eng.apply_word(t, ket_state).items():
                        total[s] += c
                acc: dict = defaultdict(complex)
                for w_str, c in total.items():
                    for u in set(itertools.permutations(w_str)):
                        key = (u, w_str)
                        if key not in inner:
                            inner[key] = eng.string_inner(u, w_str)
                        acc[u] += c * inner[key]
                count += len(labels) ** n
                for u, val in acc.items():
                    if abs(val) > best:
                        best, witness = abs(val), (i, j, u, kt, val)
    return ScanResult(best, count, witness)
