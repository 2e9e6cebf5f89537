"""Spectrum, positivity and numerical rank of Gram matrices."""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ParaInterpError, ValidationError
from .gram import GramMatrix, build_gram
from .params import DeformationSpec, make_preset

HERMITIAN_TOL = 1e-10
RANK_EPS = 1e-12


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    min_eig: float
    rank: int
    tolerance: float

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)


def default_tolerance(eigenvalues: np.ndarray) -> float:
    if len(eigenvalues) == 0:
        return 0.0
    return len(eigenvalues) * float(np.max(np.abs(eigenvalues))) * RANK_EPS


def spectrum(g: GramMatrix | np.ndarray, tol: float | None = None) -> SpectrumReport:
    """Eigenvalues (ascending) and numerical rank of a Hermitian matrix.

    The rank counts eigenvalues above ``tol``; the default is
    ``dim * max|eig| * 1e-12``.
    """
    m = np.asarray(g.entries if isinstance(g, GramMatrix) else g, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    defect = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if defect > HERMITIAN_TOL:
        raise ValidationError(f"matrix is not Hermitian (max deviation {defect:.3e})")
    m = 0.5 * (m + m.conj().T)
    try:
        eig = np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:
        raise ParaInterpError(f"eigen-solver failed: {exc}") from exc
    if tol is None:
        tol = default_tolerance(eig)
    eig.setflags(write=False)
    return SpectrumReport(eig, float(eig[0]), int(np.sum(eig > tol)), float(tol))


@dataclass(frozen=True)
class ScanReport:
    params: np.ndarray
    min_eigs: np.ndarray
    ranks: np.ndarray
    dimension: int
    violation_tol: float = 1e-9
    label: str = "param"
    notes: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.params) > 1 and np.any(np.diff(self.params) <= 0):
            raise ValidationError("scan grid must be strictly increasing")

    @property
    def violations(self) -> np.ndarray:
        """Grid values with ``min_eig < -violation_tol``."""
        return self.params[self.min_eigs < -self.violation_tol]

    @property
    def singular_points(self) -> np.ndarray:
        return self.params[self.ranks < self.dimension]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("param,min_eig,rank\n")
        for x, e, r in zip(self.params, self.min_eigs, self.ranks):
            buf.write(f"{x:.17g},{e:.17g},{int(r)}\n")
        return buf.getvalue()


def _scan(points: Sequence[float], build: Callable[[float], GramMatrix], tol, workers: int,
          violation_tol: float, label: str) -> ScanReport:
    grid = np.asarray(points, dtype=float)

    def one(x: float) -> tuple[float, int, int]:
        rep = spectrum(build(float(x)), tol)
        return rep.min_eig, rep.rank, rep.dimension

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(x) for x in grid]
    dims = {d for _, _, d in results}
    return ScanReport(
        grid,
        np.array([e for e, _, _ in results]),
        np.array([r for _, r, _ in results], dtype=int),
        dims.pop() if len(dims) == 1 else -1,
        violation_tol,
        label,
    )


def positivity_scan(
    family: Callable[[float], DeformationSpec],
    base_tuple: Sequence[int],
    grid: Sequence[float],
    *,
    tol: float | None = None,
    workers: int = 1,
    violation_tol: float = 1e-9,
) -> ScanReport:
    """Minimum eigenvalue and rank of the Gram matrix along a scalar-q grid.

    ``family`` maps a grid value to a spec, e.g.
    ``lambda q: make_preset("green", q=q, p=2, sites=3)``.
    """
    g = np.asarray(grid, dtype=float)
    if g.size and (g.min() < -1 - 1e-12 or g.max() > 1 + 1e-12):
        raise ValidationError("scalar-q grid must lie in [-1, 1]")
    return _scan(g, lambda x: build_gram(family(x), base_tuple), tol, workers,
                 violation_tol, "q")


def rank_scan_anyon(
    lambdas: Sequence[float],
    phi,
    p: int | str,
    base_tuple: Sequence[int],
    *,
    sites: int | None = None,
    tol: float | None = None,
    workers: int = 1,
) -> ScanReport:
    """Rank and minimum eigenvalue versus the anyonic parameter lambda."""
    sites = sites if sites is not None else max(base_tuple) + 1

    def build(lam: float) -> GramMatrix:
        return build_gram(make_preset("anyon", lam=lam, phi=phi, p=p, sites=sites), base_tuple)

    return _scan(lambdas, build, tol, workers, 1e-9, "lambda")
