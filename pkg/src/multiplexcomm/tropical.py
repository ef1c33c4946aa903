"""Min-plus kernels and multiplex K-path length matrices.

Path lengths are sums of reciprocal edge weights.  A walk that changes
layer before an intra-layer edge pays an extra ``1/gamma``.  The
recursion only keeps, for every pair ``(i, h)``, the shortest known
length and the set of layers in which those shortest walks end; the
switch cost of an extension ``h -> j`` in layer ``l`` is waived when ``l``
is one of those layers or when the walk starts at ``h``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import MultiplexTensor, validate_gamma
from .errors import DataError

INF = np.inf


@dataclass(frozen=True, eq=False)
class ReciprocalLengthTensor:
    """Per-layer reciprocal edge lengths ``p^(l)_ij = 1/a^(l)_ij``.

    Only the finite off-diagonal entries are stored; :meth:`dense` gives
    the full ``L x N x N`` array with zero diagonal and ``inf`` elsewhere.
    """

    n_vertices: int
    n_layers: int
    layers: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    costs: np.ndarray

    @classmethod
    def from_tensor(cls, t: MultiplexTensor) -> "ReciprocalLengthTensor":
        return cls(t.n_vertices, t.n_layers, t.layers, t.sources, t.targets, 1.0 / t.weights)

    def dense(self) -> np.ndarray:
        n = self.n_vertices
        out = np.full((self.n_layers, n, n), INF)
        out[:, np.arange(n), np.arange(n)] = 0.0
        out[self.layers, self.sources, self.targets] = self.costs
        return out

    def in_edges(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """For each target ``j``: arrays ``(h, layer, cost)`` of edges into ``j``."""
        order = np.argsort(self.targets, kind="stable")
        tgt = self.targets[order]
        bounds = np.searchsorted(tgt, np.arange(self.n_vertices + 1))
        out = []
        for j in range(self.n_vertices):
            sel = order[bounds[j] : bounds[j + 1]]
            out.append((self.sources[sel], self.layers[sel], self.costs[sel]))
        return out


@dataclass(frozen=True, eq=False)
class PathLengthMatrix:
    """Shortest lengths over walks with at most ``k`` intra-layer edges.

    ``last_layers[i, j, l]`` is True when some shortest known walk from
    ``i`` to ``j`` ends with an edge in layer ``l``.  ``stable_k`` is set
    by :func:`path_length_matrix` to the smallest budget whose lengths
    already equal the returned ones.
    """

    k: int
    lengths: np.ndarray
    last_layers: np.ndarray
    gamma: float
    stable_k: int | None = None

    @property
    def n_vertices(self) -> int:
        return self.lengths.shape[0]

    def layer_set(self, i: int, j: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.last_layers[i, j]).tolist())

    def same_state(self, other: "PathLengthMatrix") -> bool:
        return bool(
            np.array_equal(self.lengths, other.lengths)
            and np.array_equal(self.last_layers, other.last_layers)
        )


def one_path_matrix(t: MultiplexTensor, gamma: float = 1.0) -> PathLengthMatrix:
    """``P^1``: entrywise minimum over layers of the reciprocal lengths."""
    gamma = validate_gamma(gamma)
    n, n_layers = t.n_vertices, t.n_layers
    lengths = np.full((n, n), INF)
    np.fill_diagonal(lengths, 0.0)
    costs = 1.0 / t.weights
    np.minimum.at(lengths, (t.sources, t.targets), costs)
    last = np.zeros((n, n, n_layers), dtype=bool)
    hit = costs == lengths[t.sources, t.targets]
    last[t.sources[hit], t.targets[hit], t.layers[hit]] = True
    return PathLengthMatrix(1, lengths, last, gamma)


def minplus_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tropical product ``c_ij = min_h (a_ih + b_hj)``; ``inf`` absorbs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} and {b.shape}")
    c = np.full((a.shape[0], b.shape[1]), INF)
    for h in range(a.shape[1]):
        np.minimum(c, a[:, h, None] + b[None, h, :], out=c)
    return c


def minplus_power(a: np.ndarray, k: int) -> np.ndarray:
    """``a`` multiplied by itself ``k - 1`` times in the min-plus algebra."""
    out = np.asarray(a, dtype=np.float64)
    for _ in range(k - 1):
        out = minplus_multiply(out, a)
    return out


def _extend_columns(
    cols: range,
    prev_len: np.ndarray,
    prev_last: np.ndarray,
    in_edges,
    switch: float,
    new_len: np.ndarray,
    new_last: np.ndarray,
) -> None:
    n = prev_len.shape[0]
    rows = np.arange(n)
    for j in cols:
        h, lay, cost = in_edges[j]
        carry = prev_len[:, j]
        if h.size == 0:
            new_len[:, j] = carry
            new_last[:, j] = prev_last[:, j]
            continue
        prefix = prev_len[:, h]
        same_layer = prev_last[:, h, lay]
        waived = same_layer | (rows[:, None] == h[None, :])
        cand = (prefix + cost[None, :]) + np.where(waived, 0.0, switch)
        best = cand.min(axis=1)
        length = np.minimum(carry, best)
        length[j] = 0.0
        new_len[:, j] = length

        last = np.zeros((n, prev_last.shape[2]), dtype=bool)
        tie = (cand == length[:, None]) & np.isfinite(cand)
        tie[j] = False
        ri, ci = np.nonzero(tie)
        last[ri, lay[ci]] = True
        keep = carry == length
        keep[j] = False
        last[keep] |= prev_last[keep, j]
        new_last[:, j] = last


def extend_path_matrix(
    p: PathLengthMatrix,
    rt: ReciprocalLengthTensor,
    gamma: float,
    workers: int | None = None,
    _in_edges=None,
) -> PathLengthMatrix:
    """Compute ``P^K`` from ``P^(K-1)`` by appending one intra-layer edge.

    Parameters
    ----------
    p : PathLengthMatrix
        The ``K-1`` state.
    rt : ReciprocalLengthTensor
        Edge lengths of the multiplex.
    gamma : float
        Coupling; must equal ``p.gamma``.
    workers : int, optional
        Threads used over blocks of target columns.  Results do not depend
        on it.
    """
    gamma = validate_gamma(gamma)
    if gamma != p.gamma:
        raise DataError(f"gamma mismatch: path matrix built with {p.gamma}, got {gamma}")
    n = p.n_vertices
    if rt.n_vertices != n or rt.n_layers != p.last_layers.shape[2]:
        raise DataError("path matrix and length tensor have different dimensions")
    in_edges = _in_edges if _in_edges is not None else rt.in_edges()
    switch = 1.0 / gamma
    new_len = np.empty_like(p.lengths)
    new_last = np.empty_like(p.last_layers)

    if workers is None or workers <= 1 or n < 64:
        _extend_columns(range(n), p.lengths, p.last_layers, in_edges, switch, new_len, new_last)
    else:
        step = -(-n // workers)
        blocks = [range(s, min(s + step, n)) for s in range(0, n, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _extend_columns, b, p.lengths, p.last_layers, in_edges, switch, new_len, new_last
                )
                for b in blocks
            ]
            for f in futures:
                f.result()
    return PathLengthMatrix(p.k + 1, new_len, new_last, gamma)


def iter_path_matrices(
    t: MultiplexTensor,
    gamma: float,
    k_max: int | str = "full",
    workers: int | None = None,
) -> Iterator[PathLengthMatrix]:
    """Yield ``P^1, P^2, ...`` up to ``min(k_max, N-1)`` or the fixed point.

    The last state yielded is the first one that does not change under a
    further extension (or the budget limit).
    """
    gamma = validate_gamma(gamma)
    limit = _budget(t.n_vertices, k_max)
    rt = ReciprocalLengthTensor.from_tensor(t)
    in_edges = rt.in_edges()
    p = one_path_matrix(t, gamma)
    yield p
    while p.k < limit:
        nxt = extend_path_matrix(p, rt, gamma, workers, _in_edges=in_edges)
        if nxt.same_state(p):
            return
        p = nxt
        yield p


def _budget(n: int, k_max: int | str) -> int:
    if k_max == "full" or k_max is None:
        return max(n - 1, 1)
    k = int(k_max)
    if k < 1:
        raise DataError(f"k_max must be at least 1, got {k_max!r}")
    return min(k, max(n - 1, 1))


def path_length_matrix(
    t: MultiplexTensor,
    gamma: float,
    k_max: int | str = "full",
    workers: int | None = None,
) -> PathLengthMatrix:
    """``P^K`` for ``K = min(k_max, N-1)``, stopping early at a fixed point.

    The result carries ``stable_k``: the smallest ``K`` whose lengths equal
    the returned lengths.
    """
    history: list[np.ndarray] = []
    last = None
    for p in iter_path_matrices(t, gamma, k_max, workers):
        history.append(p.lengths)
        last = p
    stable = last.k
    for k in range(len(history) - 1, 0, -1):
        if np.array_equal(history[k - 1], last.lengths):
            stable = k
        else:
            break
    return PathLengthMatrix(last.k, last.lengths, last.last_layers, last.gamma, stable_k=stable)
