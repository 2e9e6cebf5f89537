"""Jordan-Wigner-type realization of anyonic Green oscillators.

Each mode ``(i, alpha)`` carries an ordinary truncated boson ``B`` and the
deformed annihilator is

    b_i^alpha = exp(i sum_j c_ij N_j + i mu pi sum_{beta < alpha} N_beta)
                * B_i^alpha * sqrt([N_{i alpha}]_omega / N_{i alpha})

with ``[n]_omega = (omega^n - 1)/(omega - 1)`` and
``omega = -cos(lambda pi) cos(mu pi)``.  Sites are 0-based and Green indices
1-based; mode ``(i, alpha)`` has index ``i * p + alpha - 1``.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ResourceLimitError, ValidationError
from .params import anyon_q

MAX_DIM = 10_000


@dataclass(frozen=True, eq=False)
class TruncatedRep:
    sites: int
    green_order: int
    cutoff: int
    annihilators: tuple  # sparse B per mode
    numbers: tuple  # diagonal occupation arrays per mode
    occupations: np.ndarray  # (dim, modes) occupation table

    @property
    def modes(self) -> int:
        return self.sites * self.green_order

    @property
    def dim(self) -> int:
        return self.cutoff ** self.modes

    def mode(self, site: int, green: int) -> int:
        if not (0 <= site < self.sites and 1 <= green <= self.green_order):
            raise ValidationError(f"no mode (site {site}, green {green})")
        return site * self.green_order + green - 1

    def site_number(self, site: int) -> np.ndarray:
        p = self.green_order
        return self.occupations[:, site * p:(site + 1) * p].sum(axis=1)

    def green_number(self, green: int) -> np.ndarray:
        return self.occupations[:, green - 1::self.green_order].sum(axis=1)

    def safe_states(self) -> np.ndarray:
        """Indices of states with every occupation at most ``cutoff - 2``."""
        return np.nonzero(np.all(self.occupations <= self.cutoff - 2, axis=1))[0]


def build_rep(sites: int, p: int, cutoff: int, *, max_dim: int = MAX_DIM) -> TruncatedRep:
    """Truncated bosons with occupations ``0..cutoff-1`` on ``sites * p`` modes."""
    if sites < 1 or p < 1:
        raise ValidationError("need at least one site and p >= 1")
    if cutoff < 2:
        raise ValidationError("cutoff must be at least 2")
    modes = sites * p
    dim = cutoff**modes
    if dim > max_dim:
        raise ResourceLimitError(f"dimension {dim} exceeds the limit {max_dim}")
    local = sp.diags(np.sqrt(np.arange(1, cutoff, dtype=float)), 1, format="csr")
    eye = sp.identity(cutoff, format="csr")
    ops = []
    for m in range(modes):
        op = sp.identity(1, format="csr")
        for k in range(modes):
            op = sp.kron(op, local if k == m else eye, format="csr")
        ops.append(op.astype(np.complex128))
    # first mode is the most significant digit, matching kron order
    occ = np.array(list(itertools.product(range(cutoff), repeat=modes)), dtype=np.int64)
    numbers = tuple(occ[:, m].copy() for m in range(modes))
    return TruncatedRep(sites, p, cutoff, tuple(ops), numbers, occ)


@dataclass(frozen=True)
class JwParams:
    lam: float
    mu: float
    c: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not (0 <= self.lam <= 1 and 0 <= self.mu <= 1):
            raise ValidationError("lambda and mu must lie in [0, 1]")
        c = np.array(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError("c must be a square real matrix")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_phi(cls, lam: float, mu: float, phi) -> "JwParams":
        """Lower-triangular loading ``c_ij = phi_ij`` for ``i > j``."""
        phi = np.asarray(phi, dtype=float)
        if not np.allclose(phi, -phi.T, atol=1e-14):
            raise ValidationError("phi must be antisymmetric")
        return cls(lam, mu, np.tril(phi, -1))

    @classmethod
    def zero_c(cls, lam: float, mu: float, sites: int) -> "JwParams":
        return cls(lam, mu, np.zeros((sites, sites)))

    @property
    def omega(self) -> float:
        return -math.cos(self.lam * math.pi) * math.cos(self.mu * math.pi)

    @property
    def phi(self) -> np.ndarray:
        return self.c - self.c.T


def q_number(n: np.ndarray, omega: float) -> np.ndarray:
    """``[n]_omega``, with ``[n]_1 = n``."""
    n = np.asarray(n)
    if abs(omega - 1.0) < 1e-15:
        return n.astype(float)
    return (np.power(omega, n) - 1.0) / (omega - 1.0)


def jw_map(rep: TruncatedRep, params: JwParams) -> dict[tuple[int, int], sp.csr_matrix]:
    """Deformed annihilators keyed by ``(site, green)``."""
    if params.c.shape != (rep.sites, rep.sites):
        raise ValidationError("c must be sites x sites")
    p = rep.green_order
    site_n = [rep.site_number(j) for j in range(rep.sites)]
    green_n = [rep.green_number(b) for b in range(1, p + 1)]
    out = {}
    for i in range(rep.sites):
        for alpha in range(1, p + 1):
            m = rep.mode(i, alpha)
            angle = sum(params.c[i, j] * site_n[j] for j in range(rep.sites))
            angle = angle + params.mu * math.pi * sum(green_n[b - 1] for b in range(1, alpha))
            n = rep.numbers[m]
            ratio = np.ones(rep.dim)
            occupied = n > 0
            ratio[occupied] = q_number(n[occupied], params.omega) / n[occupied]
            if np.any(ratio < -1e-15):
                raise ValidationError("negative [n]_omega / n")
            g = np.sqrt(np.clip(ratio, 0.0, None))
            left = sp.diags(np.exp(1j * angle))
            out[(i, alpha)] = (left @ rep.annihilators[m] @ sp.diags(g)).tocsr()
    return out


# -- residuals -------------------------------------------------------------------

RELATIONS = ("R1", "R2", "R3", "R3_literal", "GREEN")


@dataclass(frozen=True)
class ResidualRow:
    lam: float
    mu: float
    relation: str
    i: int
    alpha: int
    j: int
    beta: int
    residual: float


@dataclass(frozen=True)
class ResidualReport:
    rows: tuple[ResidualRow, ...]

    def max(self, relation: str) -> float:
        vals = [r.residual for r in self.rows if r.relation == relation]
        return max(vals) if vals else 0.0

    def worst(self, relation: str) -> ResidualRow | None:
        vals = [r for r in self.rows if r.relation == relation]
        return max(vals, key=lambda r: r.residual) if vals else None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("lambda,mu,relation_id,i,alpha,j,beta,residual\n")
        for r in self.rows:
            buf.write(f"{r.lam:.17g},{r.mu:.17g},{r.relation},{r.i + 1},{r.alpha},"
                      f"{r.j + 1},{r.beta},{r.residual:.17g}\n")
        return buf.getvalue()


def _sgn(x: int) -> int:
    return (x > 0) - (x < 0)


def _restricted_norm(op: sp.spmatrix, cols: np.ndarray) -> float:
    """Largest column norm of ``op`` over the given basis states."""
    sub = op.tocsc()[:, cols]
    if sub.nnz == 0:
        return 0.0
    return float(np.sqrt(np.max(np.asarray(abs(sub).power(2).sum(axis=0)))))


def algebra_residual(bs: dict, params: JwParams, rep: TruncatedRep, *,
                     relations=RELATIONS, states: np.ndarray | None = None) -> ResidualReport:
    """Residuals of the anyonic Green algebra on safe basis states.

    R1: ``b_x b+_y - e^{i phi_ij} e^{i mu pi sgn(alpha-beta)} b+_y b_x`` for x != y.
    R2: ``b_x b+_x - omega b+_x b_x - 1``.
    R3: ``b_i^a b_j^b - e^{-i phi_ij} e^{-i mu pi sgn(a-b)} b_j^b b_i^a``.
    R3_literal: the same with ``b_i^b b_i^a`` on the right.
    GREEN: ``b_x b+_y - q_ij Delta_ab b+_y b_x - delta_xy`` with anyonic ``q_ij``.

    Because each relation is measured per basis state, the reported value for
    a state is the norm of the image vector.
    """
    safe = rep.safe_states()
    if states is None:
        states = safe
    elif not np.all(np.isin(states, safe)):
        raise ValidationError("residuals requested outside the safe subspace")
    unknown = set(relations) - set(RELATIONS)
    if unknown:
        raise ValidationError(f"unknown relations {sorted(unknown)}")
    phi = params.phi
    eye = sp.identity(rep.dim, format="csr", dtype=np.complex128)
    keys = sorted(bs)
    dag = {k: bs[k].conj().T.tocsr() for k in keys}
    qg = anyon_q(params.lam, phi) if "GREEN" in relations else None
    rows = []

    def add(rel, x, y, op):
        rows.append(ResidualRow(params.lam, params.mu, rel, x[0], x[1], y[0], y[1],
                                _restricted_norm(op, states)))

    for x, y in itertools.product(keys, repeat=2):
        (i, a), (j, b) = x, y
        if "R1" in relations and x != y:
            ph = np.exp(1j * phi[i, j]) * np.exp(1j * params.mu * math.pi * _sgn(a - b))
            add("R1", x, y, bs[x] @ dag[y] - ph * (dag[y] @ bs[x]))
        if "R2" in relations and x == y:
            add("R2", x, y, bs[x] @ dag[x] - params.omega * (dag[x] @ bs[x]) - eye)
        ph3 = np.exp(-1j * phi[i, j]) * np.exp(-1j * params.mu * math.pi * _sgn(a - b))
        if "R3" in relations and x != y:
            add("R3", x, y, bs[x] @ bs[y] - ph3 * (bs[y] @ bs[x]))
        if "R3_literal" in relations and x != y:
            z = (i, b)
            add("R3_literal", x, y, bs[x] @ bs[y] - ph3 * (bs[z] @ bs[x]))
        if "GREEN" in relations:
            qv = qg[i, j] * (1.0 if a == b else -1.0)
            add("GREEN", x, y, bs[x] @ dag[y] - qv * (dag[y] @ bs[x]) - (x == y) * eye)
    return ResidualReport(tuple(rows))


def residual_grid(points, *, sites: int = 2, p: int = 2, cutoff: int = 3, phi=None,
                  zero_c: bool = False, relations=("R1", "R2", "R3")) -> ResidualReport:
    """Concatenated residual reports over ``(lambda, mu)`` points."""
    rep = build_rep(sites, p, cutoff)
    phi = np.zeros((sites, sites)) if phi is None else np.asarray(phi, dtype=float)
    rows = []
    for lam, mu in points:
        params = JwParams.zero_c(lam, mu, sites) if zero_c else JwParams.from_phi(lam, mu, phi)
        rows.extend(algebra_residual(jw_map(rep, params), params, rep, relations=relations).rows)
    return ResidualReport(tuple(rows))
