"""Perron roots and vectors, Wilkinson perturbations and condition numbers."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigs, eigsh

from .core import SparsityPattern, is_irreducible
from .errors import ConvergenceError, DataError, NumericalError

log = logging.getLogger(__name__)

DEGENERATE_OVERLAP = 1e-14


@dataclass(frozen=True, eq=False)
class PerronTriple:
    """Perron root ``rho`` with unit-norm positive right/left vectors."""

    rho: float
    x: np.ndarray
    y: np.ndarray
    residual_right: float
    residual_left: float
    iterations: int

    @property
    def overlap(self) -> float:
        """``y^T x``."""
        return float(self.y @ self.x)


def _as_operator(m):
    if sp.issparse(m):
        return sp.csr_matrix(m, dtype=np.float64)
    return np.asarray(m, dtype=np.float64)


def _is_symmetric(a) -> bool:
    if sp.issparse(a):
        d = a - a.T
        return d.nnz == 0 or np.abs(d.data).max() == 0
    return np.array_equal(a, a.T)


def _frobenius(a) -> float:
    if sp.issparse(a):
        return float(np.sqrt((a.data**2).sum()))
    return float(np.linalg.norm(a))


def _positive_unit(v: np.ndarray) -> np.ndarray:
    v = np.real(v)
    if v.sum() < 0:
        v = -v
    v = np.abs(v)
    return v / np.linalg.norm(v)


def _power(a, v: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Shifted power iteration; the shift makes an irreducible matrix primitive."""
    n = a.shape[0]
    shift = max(float(np.abs(a).sum(axis=1).max()) / 2, 1.0) if n else 1.0
    scale = _frobenius(a) or 1.0
    v = v / np.linalg.norm(v)
    for it in range(1, max_iter + 1):
        w = a @ v
        rho = float(v @ w)
        # headroom: the caller re-checks with the two-sided quotient
        if np.linalg.norm(w - rho * v) <= 0.5 * tol * scale:
            return v, it
        w = w + shift * v
        v = w / np.linalg.norm(w)
    return v, max_iter


def _dominant(a, tol: float, max_iter: int, symmetric: bool) -> tuple[np.ndarray, int]:
    n = a.shape[0]
    v0 = np.ones(n) / np.sqrt(n)
    if n >= 3:
        try:
            if symmetric:
                _, vec = eigsh(a, k=1, which="LA", v0=v0, tol=0, maxiter=max_iter)
            else:
                _, vec = eigs(a, k=1, which="LR", v0=v0, tol=0, maxiter=max_iter)
            return _positive_unit(vec[:, 0]), 0
        except (ArpackNoConvergence, ArpackError) as exc:
            log.debug("ARPACK failed (%s); falling back to power iteration", exc)
    v, it = _power(a, v0, tol, max_iter)
    return _positive_unit(v), it


def _residuals(a, rho, x, y) -> tuple[float, float]:
    return (
        float(np.linalg.norm(a @ x - rho * x)),
        float(np.linalg.norm(a.T @ y - rho * y)),
    )


def perron(m, tol: float = 1e-12, max_iter: int = 100_000) -> PerronTriple:
    """Perron root and unit-norm positive right and left vectors of ``m``.

    The right and left problems are solved separately with implicitly
    restarted Arnoldi (Lanczos for symmetric input) from the normalized
    all-ones vector; tiny matrices, or runs that miss the residual target,
    use a shifted power iteration instead.  The root is the two-sided
    Rayleigh quotient ``y^T m x / y^T x``.

    Raises
    ------
    DataError
        If ``m`` is not square or has negative entries.
    ConvergenceError
        If the residuals exceed ``tol * ||m||_F`` after ``max_iter`` steps.
    """
    a = _as_operator(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DataError(f"matrix must be square, got shape {a.shape}")
    values = a.data if sp.issparse(a) else a
    if values.size and values.min() < 0:
        raise DataError("matrix has negative entries")
    if not is_irreducible(a):
        warnings.warn("matrix is reducible; Perron vectors may not be positive", RuntimeWarning, stacklevel=2)

    symmetric = _is_symmetric(a)
    at = a.T.tocsr() if sp.issparse(a) else a.T
    x, it_r = _dominant(a, tol, max_iter, symmetric)
    if symmetric:
        y, it_l = x.copy(), 0
    else:
        y, it_l = _dominant(at, tol, max_iter, False)

    def triple(x, y, iters):
        overlap = float(y @ x)
        rho = float(y @ (a @ x)) / overlap if overlap > 0 else float(x @ (a @ x))
        rr, rl = _residuals(a, rho, x, y)
        return PerronTriple(rho, x, y, rr, rl, iters)

    t = triple(x, y, it_r + it_l)
    scale = _frobenius(a) or 1.0
    if max(t.residual_right, t.residual_left) > tol * scale:
        x, it_r = _power(a, x, tol, max_iter)
        y, it_l = (x, 0) if symmetric else _power(at, y, tol, max_iter)
        t = triple(_positive_unit(x), _positive_unit(y), t.iterations + it_r + it_l)
        if max(t.residual_right, t.residual_left) > tol * scale:
            raise ConvergenceError(
                f"Perron iteration did not reach {tol:g} relative residual",
                max(t.residual_right, t.residual_left) / scale,
            )
    return t


@dataclass(frozen=True, eq=False)
class WilkinsonMatrix:
    """Rank-one matrix ``y x^T``; entries are produced on demand."""

    x: np.ndarray
    y: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.y.size, self.x.size)

    def entries(self, rows, cols) -> np.ndarray:
        return self.y[np.asarray(rows)] * self.x[np.asarray(cols)]

    def toarray(self) -> np.ndarray:
        return np.outer(self.y, self.x)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.x) * np.linalg.norm(self.y))

    def total(self) -> float:
        """``1^T W 1 = ||x||_1 ||y||_1``."""
        return float(self.x.sum() * self.y.sum())

    def project(self, s: SparsityPattern) -> sp.csr_matrix:
        """Projection onto the cone of ``s`` as a sparse matrix."""
        _check_shape(self.shape, s)
        return sp.csr_matrix((self.entries(s.rows, s.cols), (s.rows, s.cols)), shape=s.shape)

    def projected_norm(self, s: SparsityPattern) -> float:
        _check_shape(self.shape, s)
        return float(np.sqrt(np.sum(self.entries(s.rows, s.cols) ** 2)))

    def projected_total(self, s: SparsityPattern) -> float:
        _check_shape(self.shape, s)
        return float(np.sum(self.entries(s.rows, s.cols)))


def _check_shape(shape, s: SparsityPattern) -> None:
    if tuple(shape) != tuple(s.shape):
        raise DataError(f"dimension mismatch: {shape} vs pattern {s.shape}")


def wilkinson(t: PerronTriple) -> WilkinsonMatrix:
    return WilkinsonMatrix(t.x, t.y)


def condition_number(t: PerronTriple) -> float:
    """``kappa(rho) = 1 / y^T x``."""
    overlap = t.overlap
    if overlap <= DEGENERATE_OVERLAP:
        raise NumericalError(f"y^T x = {overlap:.3e} is too small for a meaningful condition number")
    return 1.0 / overlap


def structured_condition_number(t: PerronTriple, s: SparsityPattern) -> float:
    """``||W|_S||_F / y^T x``: worst first-order growth within the cone of ``s``."""
    return condition_number(t) * wilkinson(t).projected_norm(s)


def rho_perturbation_estimate(t: PerronTriple, e, eps: float) -> float:
    """First-order shift ``eps * y^T e x / y^T x`` of the Perron root."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    e = e if sp.issparse(e) else np.asarray(e, dtype=np.float64)
    if e.shape != (t.y.size, t.x.size):
        raise DataError(f"dimension mismatch: perturbation {e.shape} vs vectors {(t.y.size, t.x.size)}")
    return float(eps * (t.y @ (e @ t.x)) / t.overlap)
