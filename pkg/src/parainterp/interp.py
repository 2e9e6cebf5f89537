"""Annihilator action and second-order coefficients of the interpolating algebra.

The Fock-like space of the operators ``a_i`` is defined by the composite
Gram matrices, so everything here reduces to inner products
``<s|t> = G(s, t)`` of states ``a+_{t_1}...a+_{t_n}|0>``:

* ``a_i`` acting on an n-particle state is the adjoint of ``a+_i``, giving
  coefficients ``Phi = G_{n-1}^-1 [G_n((i,)+r, t)]_r`` over the residual basis.
* ``<u| a_i a+_j |v> = G((i,)+u, (j,)+v)``.
* ``<u| a+_j a_i |v> = sum_s Phi^i_v(s) G(u, (j,)+s)``.
* ``<0| Y_ik |v> = G((k,i), v) - q_ki (2/p - 1) G((i,k), v)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import oracle
from .errors import ValidationError
from .gram import GramBasis, gram_entry
from .params import DeformationSpec, Family

SINGULAR_TOL = 1e-10
FIT_THRESHOLD = 1e-8


class FockMetric:
    """Memoized inner products of composite states for one spec.

    Pairwise-distinct tuples use the closed form; tuples with repeated sites
    go through the normal-ordering engine.
    """

    def __init__(self, spec: DeformationSpec) -> None:
        if not spec.is_finite:
            raise ValidationError("INFINITE order must be normalized first")
        self.spec = spec
        self._cache: dict[tuple, complex] = {}
        self._engine = oracle._Engine(spec)
        self._kets: dict[tuple, dict] = {}

    def inner(self, row: Sequence[int], col: Sequence[int]) -> complex:
        row, col = tuple(row), tuple(col)
        if len(row) != len(col) or sorted(row) != sorted(col):
            return 0j
        if not row:
            return 1.0 + 0j
        key = (row, col)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if len(set(col)) == len(col):
            basis = GramBasis(col, ())
            val = gram_entry(self.spec, basis, basis.permutation(row), basis.permutation(col))
        else:
            ket = self._kets.get(col)
            if ket is None:
                ket = self._kets[col] = self._engine.apply_word(oracle.ket_word(col))
            val = complex(self._engine.apply_word(oracle.bra_word(row), ket).get((), 0.0))
        self._cache[key] = val
        return val

    def matrix(self, rows: Sequence[Sequence[int]], cols: Sequence[Sequence[int]]) -> np.ndarray:
        return np.array([[self.inner(r, c) for c in cols] for r in rows], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class PhiTable:
    """Expansion of ``a_site a+_{t_1}...a+_{t_n}|0>`` over the residual basis."""

    n: int
    base_tuple: tuple[int, ...]
    site: int
    removed_positions: tuple[int, ...]
    residuals: tuple[tuple[int, ...], ...]
    coefficients: np.ndarray
    singular: bool = False

    def coefficient(self, residual: Sequence[int]) -> complex:
        try:
            return complex(self.coefficients[self.residuals.index(tuple(residual))])
        except ValueError:
            return 0j

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {r: complex(c) for r, c in zip(self.residuals, self.coefficients)}

    def reconstruct(self, metric: FockMetric, bra: Sequence[int]) -> complex:
        """``<bra| a_site |base>`` from the table and Gram entries."""
        return complex(sum(c * metric.inner(bra, r) for r, c in zip(self.residuals, self.coefficients)))


def _remove_one(base: tuple[int, ...], site: int) -> tuple[int, ...]:
    k = base.index(site)
    return base[:k] + base[k + 1:]


def phi_table(spec: DeformationSpec, base_tuple: Sequence[int], site: int, *,
              allow_pinv: bool = True, metric: FockMetric | None = None) -> PhiTable:
    """Coefficients of ``a_site`` acting on ``a+_{t_1}...a+_{t_n}|0>``.

    Solves ``G_{n-1} Phi = [G_n((site,)+r, t)]_r``.  At singular points the
    Moore-Penrose pseudo-inverse is used (``allow_pinv``); the result then
    reproduces inner products on the quotient by null states.
    """
    metric = metric or FockMetric(spec)
    base = tuple(int(s) for s in base_tuple)
    if not base:
        raise ValidationError("a_i annihilates the vacuum; base tuple must be non-empty")
    positions = tuple(k for k, s in enumerate(base) if s == site)
    if not positions:
        return PhiTable(len(base), base, site, (), (), np.zeros(0, dtype=np.complex128))
    rest = _remove_one(base, site)
    residuals = GramBasis.of(rest).elements if rest else ((),)
    gmat = metric.matrix(residuals, residuals)
    rhs = np.array([metric.inner((site,) + r, base) for r in residuals], dtype=np.complex128)
    eig = np.linalg.eigvalsh(0.5 * (gmat + gmat.conj().T))
    singular = bool(eig[0] <= SINGULAR_TOL * max(1.0, eig[-1]))
    if not singular:
        coeffs = np.linalg.solve(gmat, rhs)
    elif allow_pinv:
        coeffs = np.linalg.pinv(gmat, rcond=SINGULAR_TOL, hermitian=True) @ rhs
    else:
        raise ValidationError(f"Gram matrix of {rest} is singular (min eigenvalue {eig[0]:.3e})")
    coeffs.setflags(write=False)
    return PhiTable(len(base), base, site, positions, residuals, coeffs, singular)


def phi_oracle_deviation(spec: DeformationSpec, table: PhiTable,
                         metric: FockMetric | None = None) -> float:
    """Max ``|reconstructed - oracle|`` of ``<u| a_site |base>`` over residual-basis bras."""
    metric = metric or FockMetric(spec)
    if not table.residuals:
        return 0.0
    worst = 0.0
    for u in table.residuals:
        w = oracle.bra_word(u) + oracle.word(oracle.a(table.site)) + oracle.ket_word(table.base_tuple)
        ref = oracle.vev_a_word(spec, w, max_length=10**6).value
        worst = max(worst, abs(table.reconstruct(metric, u) - ref))
    return worst


# -- closed forms -------------------------------------------------------------

def scalar_coeff(p: int, q: float) -> float:
    """``8 p (p-1) q^3 / [p^2 - (p-2)^2 q^2]^2``; zero at p = 1."""
    if p == 1:
        return 0.0
    den = (p * p - (p - 2) ** 2 * q * q) ** 2
    if den == 0:
        raise ValidationError(f"vanishing denominator at p={p}, q={q}")
    return 8 * p * (p - 1) * q**3 / den


def para_limit_coeff(epsilon: int, p: int) -> float:
    """Coefficient at the parastatistics points: ``epsilon p / (2 (p-1))``."""
    if p < 2:
        raise ValidationError("parastatistics limit needs p >= 2")
    return epsilon * p / (2 * (p - 1))


CONVENTIONS = ("printed", "consistent")


def multiparam_coeff(p: int, qm: np.ndarray, i: int, j: int, k: int,
                     convention: str = "printed") -> complex:
    """``8 p (p-1) Q^{ji;k}`` for a Hermitian q matrix.

    ``printed`` uses the numerator ``q_ji q_jk q_ik``; ``consistent`` uses
    ``q_ij q_kj q_ik``, the form that agrees with the oscillator relation
    ``b_x b+_y = delta + q_xy b+_y b_x`` used by the oracle.  They coincide
    for real symmetric q.
    """
    if convention not in CONVENTIONS:
        raise ValidationError(f"convention must be one of {CONVENTIONS}")
    if p == 1:
        return 0j
    den = (p * p - (p - 2) ** 2 * abs(qm[k, j]) ** 2) * (p * p - (p - 2) ** 2 * abs(qm[k, i]) ** 2)
    if den == 0:
        raise ValidationError(f"vanishing denominator at p={p}")
    if convention == "printed":
        num = qm[j, i] * qm[j, k] * qm[i, k]
    else:
        num = qm[i, j] * qm[k, j] * qm[i, k]
    return complex(8 * p * (p - 1) * num / den)


def closed_form_coeff(spec: DeformationSpec, i: int, j: int, k: int,
                      convention: str = "printed") -> complex:
    """Closed-form coefficient of ``[Y_jk]+ [Y_ik]`` in ``a_i a+_j``."""
    if not spec.is_finite:
        raise ValidationError("INFINITE order must be normalized first")
    if spec.family is Family.SPEICHER:
        raise ValidationError("no closed form is available for the SPEICHER family")
    q = spec.scalar_q
    if q is not None and spec.family is Family.GREEN_QUON:
        return complex(scalar_coeff(spec.order, q))
    return multiparam_coeff(spec.order, spec.q, i, j, k, convention)


# -- least-squares extraction ---------------------------------------------------

@dataclass(frozen=True)
class CoeffReport:
    p: int
    q_label: str
    sites: tuple[int, ...]
    extracted: complex
    closed_form: complex
    residual_norm: float
    elements: int
    oracle_deviation: float = 0.0
    threshold: float = FIT_THRESHOLD

    @property
    def error(self) -> float:
        return abs(self.extracted - self.closed_form)

    @property
    def passed(self) -> bool:
        return (self.error < self.threshold and self.residual_norm < self.threshold
                and self.oracle_deviation < 1e-10)

    def to_text(self) -> str:
        """Structured-text (TOML) form."""
        from .params import _fmt

        return "\n".join([
            "[coefficient]",
            f"p = {self.p}",
            f'q = "{self.q_label}"',
            f"sites = [{', '.join(str(s + 1) for s in self.sites)}]",
            f"extracted_re = {_fmt(self.extracted.real)}",
            f"extracted_im = {_fmt(self.extracted.imag)}",
            f"closed_form_re = {_fmt(self.closed_form.real)}",
            f"closed_form_im = {_fmt(self.closed_form.imag)}",
            f"residual_norm = {_fmt(self.residual_norm)}",
            f"oracle_deviation = {_fmt(self.oracle_deviation)}",
            f"elements = {self.elements}",
        ]) + "\n"


def _q_label(spec: DeformationSpec) -> str:
    q = spec.scalar_q
    return f"{q:.17g}" if q is not None else spec.fingerprint()


def _states(sites: Sequence[int], n: int) -> list[tuple[int, ...]]:
    return list(itertools.product(sites, repeat=n))


def _check_fit_inputs(spec: DeformationSpec, i: int, j: int, sites: Sequence[int]) -> None:
    if not spec.is_finite:
        raise ValidationError("INFINITE order must be normalized first")
    if np.max(np.abs(spec.q)) >= 1 - 1e-12:
        raise ValidationError("coefficient extraction needs |q_ij| < 1 (nonsingular metrics)")
    if i not in sites or j not in sites:
        raise ValidationError("probe sites must contain i and j")
    for s in sites:
        if not 0 <= s < spec.site_count:
            raise ValidationError(f"probe site {s} out of range")


def extract_first_order(spec: DeformationSpec, i: int, j: int,
                        probe_sites: Sequence[int]) -> CoeffReport:
    """Fit ``c`` in ``a_i a+_j = delta_ij + c a+_j a_i`` on one-particle states."""
    _check_fit_inputs(spec, i, j, probe_sites)
    metric = FockMetric(spec)
    rows, ys = [], []
    for u in probe_sites:
        for v in probe_sites:
            ys.append(metric.inner((i, u), (j, v)) - (i == j) * (u == v))
            # a_i|v> = delta_iv |0>, so <u|a+_j a_i|v> = delta_iv delta_uj
            rows.append([float(v == i and u == j)])
    amat, y = np.array(rows, dtype=np.complex128), np.array(ys)
    coef, *_ = np.linalg.lstsq(amat, y, rcond=None)
    res = float(np.linalg.norm(amat @ coef - y))
    p = spec.order
    return CoeffReport(p, _q_label(spec), (i, j), complex(coef[0]),
                       complex(spec.q[i, j] * (2.0 / p - 1.0)), res, len(ys))


def _second_order_system(spec: DeformationSpec, metric: FockMetric, i: int, j: int,
                         sites: Sequence[int]):
    """Rows ``<u|D|v>`` over 0-, 1- and 2-particle states; one feature column per k."""
    p = spec.order
    f = 2.0 / p - 1.0
    c1 = spec.q[i, j] * f
    qm = spec.q
    feats, ys, labels = [], [], []
    for n in (0, 1, 2):
        basis = _states(sites, n)
        phis = {v: phi_table(spec, v, i, metric=metric) for v in basis} if n else {}
        for u in basis:
            for v in basis:
                lhs = metric.inner((i,) + u, (j,) + v) - (i == j) * metric.inner(u, v)
                if n:
                    tab = phis[v]
                    lhs -= c1 * sum(c * metric.inner(u, (j,) + s)
                                    for s, c in zip(tab.residuals, tab.coefficients))
                row = []
                for k in sites:
                    if n == 2:
                        y_iv = metric.inner((k, i), v) - qm[k, i] * f * metric.inner((i, k), v)
                        y_ju = metric.inner((k, j), u) - qm[k, j] * f * metric.inner((j, k), u)
                        row.append(np.conj(y_ju) * y_iv)
                    else:
                        row.append(0j)
                feats.append(row)
                ys.append(lhs)
                labels.append((u, v))
    return np.array(feats, dtype=np.complex128), np.array(ys, dtype=np.complex128), labels


def _spot_check(spec: DeformationSpec, metric: FockMetric, i: int, j: int,
                labels, count: int, seed: int) -> float:
    """Compare random Gram/Phi matrix elements with direct oracle evaluation."""
    rng = np.random.default_rng(seed)
    two = [lab for lab in labels if len(lab[0]) == 2]
    if not two or count <= 0:
        return 0.0
    picks = rng.choice(len(two), size=min(count, len(two)), replace=False)
    worst = 0.0
    for idx in sorted(picks):
        u, v = two[idx]
        w = oracle.bra_word(u) + oracle.word(oracle.a(i), oracle.ad(j)) + oracle.ket_word(v)
        ref = oracle.vev_a_word(spec, w, max_length=10**6).value
        worst = max(worst, abs(metric.inner((i,) + u, (j,) + v) - ref))
        tab = phi_table(spec, v, i, metric=metric)
        worst = max(worst, phi_oracle_deviation(spec, tab, metric))
    return worst


def extract_second_order(spec: DeformationSpec, i: int, j: int, probe_sites: Sequence[int], *,
                         spot_checks: int = 5, seed: int = 0,
                         threshold: float = FIT_THRESHOLD) -> CoeffReport:
    """Least-squares coefficient ``c`` of ``sum_k [Y_jk]+ [Y_ik]`` (one unknown).

    The defect ``a_i a+_j - delta_ij - q_ij (2/p - 1) a+_j a_i - c sum_k ...``
    is fitted over all matrix elements between 0-, 1- and 2-particle states on
    ``probe_sites``.  Terms with three or more annihilators vanish there, so
    the fit is exact when the two-term ansatz is right.
    """
    sites = tuple(sorted(set(probe_sites)))
    _check_fit_inputs(spec, i, j, sites)
    metric = FockMetric(spec)
    feats, y, labels = _second_order_system(spec, metric, i, j, sites)
    column = feats.sum(axis=1, keepdims=True)
    if np.linalg.matrix_rank(column) < 1:
        raise ValidationError("singular normal equations: no two-particle signal")
    coef, *_ = np.linalg.lstsq(column, y, rcond=None)
    res = float(np.linalg.norm(column @ coef - y))
    dev = _spot_check(spec, metric, i, j, labels, spot_checks, seed)
    closed = closed_form_coeff(spec, i, j, sites[0])
    return CoeffReport(spec.order, _q_label(spec), (i, j), complex(coef[0]), closed, res,
                       len(y), dev, threshold)


def extract_per_site(spec: DeformationSpec, i: int, j: int, probe_sites: Sequence[int], *,
                     convention: str = "printed", spot_checks: int = 5, seed: int = 0,
                     threshold: float = FIT_THRESHOLD) -> dict[int, CoeffReport]:
    """One least-squares unknown per ``k``, compared with ``8p(p-1) Q^{ji;k}``."""
    sites = tuple(sorted(set(probe_sites)))
    _check_fit_inputs(spec, i, j, sites)
    metric = FockMetric(spec)
    feats, y, labels = _second_order_system(spec, metric, i, j, sites)
    if np.linalg.matrix_rank(feats) < feats.shape[1]:
        raise ValidationError("singular normal equations for the per-site fit")
    coef, *_ = np.linalg.lstsq(feats, y, rcond=None)
    res = float(np.linalg.norm(feats @ coef - y))
    dev = _spot_check(spec, metric, i, j, labels, spot_checks, seed)
    return {
        k: CoeffReport(spec.order, _q_label(spec), (i, j, k), complex(c),
                       multiparam_coeff(spec.order, spec.q, i, j, k, convention),
                       res, len(y), dev, threshold)
        for k, c in zip(sites, coef)
    }
