"""Brute-force reference computations for tests and diagnostics.

These are deliberately simple and slow; each one guards its input size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import MultiplexTensor, validate_gamma
from .errors import DataError

MAX_PATH_VERTICES = 64
MAX_EXP_SIZE = 1000
MAX_EIG_SIZE = 500


@dataclass(frozen=True)
class LayerStateDistance:
    """Exact walk costs over ``(source, target, last layer)`` states.

    Index ``L`` of the last axis is the "no edge taken yet" state, which
    is only reachable at ``target == source`` with cost 0.
    """

    k: int
    d: np.ndarray

    def lengths(self) -> np.ndarray:
        return self.d.min(axis=2)


def layer_state_distances(t: MultiplexTensor, gamma: float, k: int) -> LayerStateDistance:
    """Dynamic program over (vertex, last-layer) states with ``k`` rounds."""
    gamma = validate_gamma(gamma)
    n, n_layers = t.n_vertices, t.n_layers
    if n > MAX_PATH_VERTICES:
        raise DataError(f"oracle limited to {MAX_PATH_VERTICES} vertices, got {n}")
    if k < 1:
        raise DataError("k must be at least 1")
    switch = 1.0 / gamma
    start = n_layers
    d = np.full((n, n, n_layers + 1), np.inf)
    d[np.arange(n), np.arange(n), start] = 0.0
    edges = list(zip(t.layers.tolist(), t.sources.tolist(), t.targets.tolist(), (1.0 / t.weights).tolist()))
    for _ in range(k):
        nxt = d.copy()
        for lay, h, j, cost in edges:
            for prev in range(n_layers + 1):
                extra = 0.0 if prev in (start, lay) else switch
                cand = d[:, h, prev] + cost + extra
                np.minimum(nxt[:, j, lay], cand, out=nxt[:, j, lay])
        d = nxt
    return LayerStateDistance(k, d)


def exact_k_path_lengths(t: MultiplexTensor, gamma: float, k: int) -> np.ndarray:
    """Minimum cost over all layer-assigned walks with at most ``k`` edges."""
    lengths = layer_state_distances(t, gamma, k).lengths()
    np.fill_diagonal(lengths, 0.0)
    return lengths


def _taylor_expm(a: np.ndarray) -> np.ndarray:
    norm = np.abs(a).sum(axis=0).max() if a.size else 0.0
    s = 0
    while norm / 2**s > 0.25:
        s += 1
    x = a / 2**s
    term = np.eye(a.shape[0])
    out = term.copy()
    for q in range(1, 40):
        term = term @ x / q
        out += term
        if np.abs(term).max() <= 1e-18 * np.abs(out).max():
            break
    for _ in range(s):
        out = out @ out
    return out


def dense_exp_quadratic_form(b) -> float:
    """``1^T exp(b) 1 - n`` via Taylor scaling and squaring."""
    a = b.toarray() if sp.issparse(b) else np.asarray(b, dtype=np.float64)
    n = a.shape[0]
    if n > MAX_EXP_SIZE:
        raise DataError(f"oracle limited to size {MAX_EXP_SIZE}, got {n}")
    return float(_taylor_expm(a).sum() - n)


@dataclass(frozen=True)
class DensePerron:
    rho: float
    x: np.ndarray
    y: np.ndarray
    second_modulus: float

    @property
    def gap_ratio(self) -> float:
        return self.rho / self.second_modulus if self.second_modulus > 0 else np.inf


def dense_perron(m) -> DensePerron:
    """Perron root and unit positive vectors from a full eigendecomposition."""
    a = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=np.float64)
    n = a.shape[0]
    if n > MAX_EIG_SIZE:
        raise DataError(f"oracle limited to size {MAX_EIG_SIZE}, got {n}")
    vals, right = np.linalg.eig(a)
    k = int(np.argmax(vals.real))
    rho = float(vals[k].real)
    lvals, left = np.linalg.eig(a.T)
    kl = int(np.argmax(lvals.real))

    def unit(v):
        v = v.real
        v = v * np.sign(v.sum())
        return v / np.linalg.norm(v)

    others = np.delete(np.abs(vals), k)
    second = float(others.max()) if others.size else 0.0
    return DensePerron(rho, unit(right[:, k]), unit(left[:, kl]), second)
