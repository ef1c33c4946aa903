"""Efficiency matrices, global K-efficiency and harmonic centralities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .tropical import PathLengthMatrix


@dataclass(frozen=True, eq=False)
class EfficiencyMatrix:
    """Reciprocal path lengths ``1/p^K_ij`` with zero diagonal (``1/inf = 0``)."""

    k: int
    matrix: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.matrix.shape[0]


def efficiency_matrix(p: PathLengthMatrix) -> EfficiencyMatrix:
    with np.errstate(divide="ignore"):
        q = 1.0 / p.lengths
    np.fill_diagonal(q, 0.0)
    return EfficiencyMatrix(p.k, q)


def global_k_efficiency(q: EfficiencyMatrix) -> float:
    """Mean of the efficiency matrix over the ``N(N-1)`` ordered pairs."""
    n = q.n_vertices
    if n < 2:
        raise DataError("global efficiency needs at least two vertices")
    return float(q.matrix.sum() / (n * (n - 1)))


def harmonic_centralities(q: EfficiencyMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Harmonic ``(in, out)`` centralities: column and row sums."""
    return q.matrix.sum(axis=0), q.matrix.sum(axis=1)


@dataclass
class EfficiencyCertificate:
    """Checks relating efficiency, harmonic centralities and the Perron root.

    Slacks are ``bound - value``; a negative slack is a violation.
    """

    k: int
    efficiency: float
    rho: float
    total_in: float
    total_out: float
    scaled_efficiency: float
    max_in: float
    max_out: float
    identity_error: float
    harmonic_slack: float
    efficiency_slack: float
    rel_tol: float = 1e-12
    bound_tol: float = 1e-10

    @property
    def passed(self) -> bool:
        # bounds can hold with equality (regular graphs), so the Perron root's
        # own solver error needs a little room
        scale = max(1.0, abs(self.scaled_efficiency))
        room = self.bound_tol * max(1.0, self.rho)
        return (
            self.identity_error <= self.rel_tol * scale
            and self.harmonic_slack >= -room
            and self.efficiency_slack >= -room
        )


def efficiency_certificates(q: EfficiencyMatrix, rho_k: float, rel_tol: float = 1e-12) -> EfficiencyCertificate:
    """Evaluate the harmonic identity and both Perron-root bounds for ``q``.

    ``rho_k`` is the Perron root of ``q.matrix``.
    """
    n = q.n_vertices
    e = global_k_efficiency(q)
    h_in, h_out = harmonic_centralities(q)
    scaled = n * (n - 1) * e
    t_in, t_out = float(np.abs(h_in).sum()), float(np.abs(h_out).sum())
    return EfficiencyCertificate(
        k=q.k,
        efficiency=e,
        rho=float(rho_k),
        total_in=t_in,
        total_out=t_out,
        scaled_efficiency=scaled,
        max_in=float(h_in.max()),
        max_out=float(h_out.max()),
        identity_error=max(abs(t_in - scaled), abs(t_out - scaled)),
        harmonic_slack=float(min(h_in.max(), h_out.max()) - rho_k),
        efficiency_slack=float(scaled - rho_k),
        rel_tol=rel_tol,
    )
