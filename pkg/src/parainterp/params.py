"""Deformation parameters for the Green-oscillator algebras.

A :class:`DeformationSpec` fixes the order ``p`` of the Green ansatz, the
Hermitian site matrix ``q_ij`` and the ``p x p`` table of Green-index factors.
The pairwise factor between oscillator letters ``(i, alpha)`` and
``(j, beta)`` is always ``q[i, j] * green_table[alpha, beta]``:

* ``GREEN_QUON`` / ``MULTIPARAM`` / ``ANYON``: ``green_table = 2 I - 1``.
* ``SPEICHER``: ``q`` is the constant matrix ``epsilon`` and
  ``green_table = (1 - q) I + q``.

Infinite order is rewritten on construction to order 1 with ``q -> -q``:
for ``p -> oo`` every pair of Green indices is distinct with probability one,
so each factor ``2 delta - 1`` becomes ``-1``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

from .errors import ValidationError

INFINITE = math.inf
TOL = 1e-12


class Family(str, Enum):
    GREEN_QUON = "green_quon"
    MULTIPARAM = "multiparam"
    ANYON = "anyon"
    SPEICHER = "speicher"


PRESETS = ("quon", "para", "green", "multiparam", "anyon", "speicher")


def _check_order(order: Any) -> int | float:
    if isinstance(order, str):
        if order.strip().lower() in ("inf", "infinite", "infinity"):
            return INFINITE
        try:
            order = int(order)
        except ValueError as exc:
            raise ValidationError(f"invalid order {order!r}") from exc
    if order == INFINITE:
        return INFINITE
    if isinstance(order, (bool, np.bool_)) or not float(order).is_integer():
        raise ValidationError(f"order must be a positive integer or INFINITE, got {order!r}")
    if int(order) < 1:
        raise ValidationError(f"order must be >= 1, got {order!r}")
    return int(order)


@dataclass(frozen=True, eq=False)
class DeformationSpec:
    """Immutable deformation parameters.

    ``order`` is always finite after normalization; ``nominal_order`` keeps
    the value the user asked for (possibly :data:`INFINITE`).
    """

    order: int | float
    site_count: int
    q: np.ndarray
    family: Family
    family_args: tuple[tuple[str, Any], ...] = ()
    nominal_order: int | float | None = None
    green_table: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        order = _check_order(self.order)
        object.__setattr__(self, "order", order)
        if self.nominal_order is None:
            object.__setattr__(self, "nominal_order", order)
        if not isinstance(self.site_count, (int, np.integer)) or self.site_count < 1:
            raise ValidationError(f"site_count must be a positive integer, got {self.site_count!r}")
        object.__setattr__(self, "site_count", int(self.site_count))
        q = np.array(self.q, dtype=np.complex128)
        if q.shape != (self.site_count, self.site_count):
            raise ValidationError(
                f"q must be {self.site_count}x{self.site_count}, got shape {q.shape}"
            )
        if not np.all(np.isfinite(q)):
            raise ValidationError("q contains non-finite entries")
        herm = np.max(np.abs(q - q.conj().T))
        if herm > TOL:
            raise ValidationError(f"q is not Hermitian (max deviation {herm:.3e})")
        if np.max(np.abs(q)) > 1 + TOL:
            raise ValidationError(f"|q_ij| exceeds 1 (max {np.max(np.abs(q)):.17g})")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "family", Family(self.family))

        if order != INFINITE:
            table = self._default_table(order) if self.green_table is None else np.array(
                self.green_table, dtype=np.complex128
            )
            if table.shape != (order, order):
                raise ValidationError(f"green_table must be {order}x{order}")
            table.setflags(write=False)
            object.__setattr__(self, "green_table", table)
        if self.family is Family.ANYON:
            self._check_anyon()

    def _default_table(self, order: int) -> np.ndarray:
        if self.family is Family.SPEICHER:
            qs = self.args["q"]
            return (1 - qs) * np.eye(order) + qs * np.ones((order, order))
        return 2 * np.eye(order) - np.ones((order, order))

    def _check_anyon(self) -> None:
        lam = self.args["lambda"]
        sign = -1.0 if self.nominal_order == INFINITE and self.is_finite else 1.0
        off = ~np.eye(self.site_count, dtype=bool)
        if off.any() and np.max(np.abs(np.abs(self.q[off]) - 1)) > TOL:
            raise ValidationError("ANYON family requires |q_ij| = 1 for i != j")
        if np.max(np.abs(np.diag(self.q) - sign * math.cos(lam * math.pi))) > TOL:
            raise ValidationError("ANYON family requires q_ii = cos(lambda pi)")

    @property
    def args(self) -> dict[str, Any]:
        return dict(self.family_args)

    @property
    def is_finite(self) -> bool:
        return self.order != INFINITE

    @property
    def scalar_q(self) -> float | None:
        """The common value of all ``q_ij`` when they are equal and real, else ``None``."""
        first = self.q[0, 0]
        if np.all(np.abs(self.q - first) <= TOL) and abs(first.imag) <= TOL:
            return float(first.real)
        return None

    def normalized(self) -> "DeformationSpec":
        """Rewrite an INFINITE-order spec to the equivalent order-1 spec."""
        if self.is_finite:
            return self
        if self.family is Family.SPEICHER:
            raise ValidationError("SPEICHER family has no infinite-order limit")
        return DeformationSpec(
            order=1,
            site_count=self.site_count,
            q=-self.q,
            family=self.family,
            family_args=self.family_args,
            nominal_order=INFINITE,
        )

    def nominal_q(self) -> np.ndarray:
        """``q`` as supplied by the user (undoing the infinite-order sign flip)."""
        return -self.q if self.nominal_order == INFINITE and self.is_finite else self.q

    def factor_matrix(self) -> np.ndarray:
        """All pairwise factors as an ``(S*p) x (S*p)`` matrix.

        Letter ``(site, green)`` with 1-based ``green`` maps to row
        ``site * p + green - 1``.
        """
        self._require_finite()
        return np.kron(self.q, self.green_table)

    def _require_finite(self) -> None:
        if not self.is_finite:
            raise ValidationError("INFINITE order must be normalized before evaluation")

    def fingerprint(self) -> str:
        return hashlib.sha256(to_config(self).encode()).hexdigest()[:16]

    def __repr__(self) -> str:
        return (
            f"DeformationSpec(family={self.family.value}, order={self.order}, "
            f"nominal_order={self.nominal_order}, sites={self.site_count})"
        )


def green_q(spec: DeformationSpec, i: int, alpha: int, j: int, beta: int) -> complex:
    """Pairwise factor ``q_{i alpha, j beta}`` for 0-based sites and 1-based Green indices."""
    spec._require_finite()
    p = spec.order
    if not (1 <= alpha <= p and 1 <= beta <= p):
        raise ValidationError(f"green index out of range 1..{p}: ({alpha}, {beta})")
    if not (0 <= i < spec.site_count and 0 <= j < spec.site_count):
        raise ValidationError(f"site out of range 0..{spec.site_count - 1}: ({i}, {j})")
    return complex(spec.q[i, j] * spec.green_table[alpha - 1, beta - 1])


def _uniform(value: complex, sites: int) -> np.ndarray:
    return np.full((sites, sites), value, dtype=np.complex128)


def _check_scalar(name: str, value: Any, lo: float, hi: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a real number, got {value!r}") from exc
    if not (lo - TOL <= value <= hi + TOL):
        raise ValidationError(f"{name}={value!r} outside [{lo}, {hi}]")
    return value


def _check_eps(epsilon: Any) -> int:
    if epsilon not in (1, -1, 1.0, -1.0):
        raise ValidationError(f"epsilon must be +1 or -1, got {epsilon!r}")
    return int(epsilon)


def phi_matrix(sites: int, phi: Any = None) -> np.ndarray:
    """Antisymmetric phase matrix from a full matrix or ``{(i, j): value}`` with i != j."""
    out = np.zeros((sites, sites))
    if phi is None:
        return out
    if isinstance(phi, Mapping):
        for (i, j), val in phi.items():
            if i == j or not (0 <= i < sites and 0 <= j < sites):
                raise ValidationError(f"invalid phi index ({i}, {j})")
            out[i, j] = float(val)
            out[j, i] = -float(val)
        return out
    out = np.array(phi, dtype=float)
    if out.shape != (sites, sites):
        raise ValidationError(f"phi must be {sites}x{sites}")
    if np.max(np.abs(out + out.T)) > TOL:
        raise ValidationError("phi must be antisymmetric")
    return out


def make_preset(family: str | Family, **args: Any) -> DeformationSpec:
    """Build a validated spec.

    ``family`` is one of the names in :data:`PRESETS` or a :class:`Family`.
    Recognised keyword arguments: ``sites``, ``p`` (int or ``"inf"``), ``q``
    (scalar, or matrix for ``multiparam``), ``epsilon``, ``lam``, ``phi``.
    """
    name = family.value if isinstance(family, Family) else str(family).lower()
    sites = int(args.pop("sites", 2))
    if sites < 1:
        raise ValidationError("sites must be >= 1")
    p = _check_order(args.pop("p", 1))

    if name == "quon":
        if p != 1:
            raise ValidationError("quon preset has order 1")
        q = _check_scalar("q", args.pop("q"), -1, 1)
        spec = DeformationSpec(1, sites, _uniform(q, sites), Family.GREEN_QUON)
    elif name == "para":
        eps = _check_eps(args.pop("epsilon"))
        spec = DeformationSpec(p, sites, _uniform(eps, sites), Family.GREEN_QUON,
                               (("epsilon", eps),))
    elif name in ("green", Family.GREEN_QUON.value):
        q = _check_scalar("q", args.pop("q"), -1, 1)
        spec = DeformationSpec(p, sites, _uniform(q, sites), Family.GREEN_QUON)
    elif name == Family.MULTIPARAM.value:
        qm = np.array(args.pop("q"), dtype=np.complex128)
        if qm.ndim == 0:
            qm = _uniform(complex(qm), sites)
        spec = DeformationSpec(p, qm.shape[0], qm, Family.MULTIPARAM)
    elif name == Family.ANYON.value:
        lam = _check_scalar("lambda", args.pop("lam"), 0, 1)
        phi = phi_matrix(sites, args.pop("phi", None))
        spec = DeformationSpec(
            p, sites, anyon_q(lam, phi), Family.ANYON,
            (("lambda", lam), ("phi", tuple(map(tuple, phi.tolist())))),
        )
    elif name == Family.SPEICHER.value:
        if p == INFINITE:
            raise ValidationError("speicher preset requires finite order")
        eps = _check_eps(args.pop("epsilon"))
        qs = _check_scalar("q", args.pop("q"), -1, 1)
        spec = DeformationSpec(p, sites, _uniform(eps, sites), Family.SPEICHER,
                               (("epsilon", eps), ("q", qs)))
    else:
        raise ValidationError(f"unknown preset {family!r}; expected one of {PRESETS}")
    if args:
        raise ValidationError(f"unexpected arguments for {name}: {sorted(args)}")
    if p == INFINITE:
        return DeformationSpec(
            INFINITE, spec.site_count, spec.q, spec.family, spec.family_args
        ).normalized()
    return spec


# -- structured-text (TOML) serialization ------------------------------------

def _fmt(x: float) -> str:
    """Float literal that round-trips bit-exactly through TOML."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.17g}"
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _fmt_order(order: int | float) -> str:
    return '"inf"' if order == INFINITE else str(int(order))


def to_config(spec: DeformationSpec) -> str:
    """Serialize ``spec`` to the ``[spec]`` section of a TOML config.

    Site numbers in the file are 1-based, matching the ``iK`` word syntax.
    """
    lines = ["[spec]", f'family = "{spec.family.value}"',
             f"order = {_fmt_order(spec.nominal_order)}", f"sites = {spec.site_count}"]
    args = spec.args
    if "epsilon" in args:
        lines.append(f"epsilon = {int(args['epsilon'])}")
    if spec.family is Family.SPEICHER:
        lines.append(f"q_scalar = {_fmt(args['q'])}")
    if spec.family is Family.ANYON:
        lines.append(f"lambda = {_fmt(args['lambda'])}")
        phi = np.array(args["phi"])
        ents = [f"[{i + 1}, {j + 1}, {_fmt(phi[i, j])}]"
                for i in range(spec.site_count) for j in range(i + 1, spec.site_count)]
        lines.append(f"phi = [{', '.join(ents)}]")
    if spec.family in (Family.GREEN_QUON, Family.MULTIPARAM):
        qn = spec.nominal_q()
        ents = [f"[{i + 1}, {j + 1}, {_fmt(qn[i, j].real)}, {_fmt(qn[i, j].imag)}]"
                for i in range(spec.site_count) for j in range(i, spec.site_count)]
        lines.append(f"q = [{', '.join(ents)}]")
    return "\n".join(lines) + "\n"


def q_from_entries(sites: int, entries: Any) -> np.ndarray:
    """Hermitian matrix from ``[i, j, re, im]`` rows (1-based); missing mirrors are conjugated."""
    qm = np.zeros((sites, sites), dtype=np.complex128)
    seen: set[tuple[int, int]] = set()
    for row in entries:
        if len(row) != 4:
            raise ValidationError(f"q entry must be [i, j, re, im], got {row!r}")
        i, j = int(row[0]) - 1, int(row[1]) - 1
        if not (0 <= i < sites and 0 <= j < sites):
            raise ValidationError(f"q entry site out of range: {row!r}")
        qm[i, j] = complex(float(row[2]), float(row[3]))
        seen.add((i, j))
    for i, j in list(seen):
        if (j, i) not in seen:
            qm[j, i] = qm[i, j].conjugate()
    return qm


def from_config(data: Mapping[str, Any]) -> DeformationSpec:
    """Inverse of :func:`to_config`; accepts the parsed ``[spec]`` table."""
    try:
        family = str(data["family"])
        sites = int(data["sites"])
        order = data.get("order", 1)
    except KeyError as exc:
        raise ValidationError(f"spec config missing key {exc}") from None
    fam = family.lower()
    if fam in (Family.GREEN_QUON.value, Family.MULTIPARAM.value, "quon", "green"):
        if "q" in data:
            qm = q_from_entries(sites, data["q"])
        elif "q_scalar" in data:
            qm = _uniform(float(data["q_scalar"]), sites)
        else:
            raise ValidationError("spec config needs q entries")
        if fam in (Family.GREEN_QUON.value, "quon", "green"):
            if not np.all(qm == qm[0, 0]) or qm[0, 0].imag != 0:
                raise ValidationError("green_quon family needs a uniform real q")
            eps = data.get("epsilon")
            if eps is not None:
                return make_preset("para", epsilon=eps, p=order, sites=sites)
            return make_preset("green", q=qm[0, 0].real, p=order, sites=sites)
        return make_preset("multiparam", q=qm, p=order)
    if fam == Family.ANYON.value:
        phi = {(int(i) - 1, int(j) - 1): float(v) for i, j, v in data.get("phi", [])}
        return make_preset("anyon", lam=data["lambda"], phi=phi, p=order, sites=sites)
    if fam == Family.SPEICHER.value:
        return make_preset("speicher", epsilon=data["epsilon"], q=data["q_scalar"],
                           p=order, sites=sites)
    raise ValidationError(f"unknown family {family!r}")


def anyon_q(lam: float, phi: np.ndarray) -> np.ndarray:
    """``q_ij = exp(i phi_ij)`` off the diagonal and ``cos(lambda pi)`` on it."""
    qm = np.exp(1j * np.asarray(phi, dtype=float))
    np.fill_diagonal(qm, math.cos(lam * math.pi))
    return qm
