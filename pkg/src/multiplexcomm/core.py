"""Multiplex data model, edge-list ingestion and supra-adjacency assembly.

A multiplex with ``N`` vertices and ``L`` layers is stored as a list of
weighted intra-layer entries ``(layer, source, target, weight)``.  All
indices are 0-based internally; the original file identifiers are kept as
labels and are what reports show.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import IO, Iterable, Literal

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DataError

EdgeListFormat = Literal["multiplex", "single"]

_FORMAT_ALIASES = {
    "multiplex": "multiplex",
    "extended-edge-list": "multiplex",
    "single": "single",
    "single-layer-edge-list": "single",
}


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MultiplexTensor:
    """Third-order adjacency tensor of a multiplex network.

    Entries are kept in canonical ``(layer, source, target)`` order.  Use
    :meth:`from_entries` rather than the raw constructor unless the arrays
    are already canonical.
    """

    n_vertices: int
    n_layers: int
    layers: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    weights: np.ndarray
    directed: bool = True
    vertex_labels: tuple[str, ...] = ()
    layer_labels: tuple[str, ...] = ()

    def __post_init__(self):
        n, n_layers = int(self.n_vertices), int(self.n_layers)
        if n < 1 or n_layers < 1:
            raise DataError("a multiplex needs at least one vertex and one layer")
        lay = np.asarray(self.layers, dtype=np.int64)
        src = np.asarray(self.sources, dtype=np.int64)
        dst = np.asarray(self.targets, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        if not (lay.shape == src.shape == dst.shape == w.shape) or lay.ndim != 1:
            raise DataError("entry arrays must be one-dimensional and of equal length")
        if lay.size:
            if lay.min() < 0 or lay.max() >= n_layers:
                raise DataError("layer index out of range")
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n:
                raise DataError("vertex index out of range")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise DataError("all weights must be positive and finite")
        if np.any(src == dst):
            raise DataError("self-loops are not allowed")

        order = np.lexsort((dst, src, lay))
        lay, src, dst, w = lay[order], src[order], dst[order], w[order]
        if lay.size > 1:
            same = (np.diff(lay) == 0) & (np.diff(src) == 0) & (np.diff(dst) == 0)
            if np.any(same):
                k = int(np.flatnonzero(same)[0])
                raise DataError(
                    f"duplicate entry (layer {lay[k]}, {src[k]}, {dst[k]})"
                )
        if not self.directed:
            keys = _entry_keys(lay, src, dst, n)
            rev = _entry_keys(lay, dst, src, n)
            pos = np.searchsorted(keys, rev)
            pos = np.minimum(pos, keys.size - 1)
            if keys.size and (np.any(keys[pos] != rev) or np.any(w[pos] != w)):
                raise DataError("undirected multiplex must store both orientations with equal weight")

        vlabels = tuple(self.vertex_labels) or tuple(str(i + 1) for i in range(n))
        llabels = tuple(self.layer_labels) or tuple(str(i + 1) for i in range(n_layers))
        if len(vlabels) != n or len(llabels) != n_layers:
            raise DataError("label count does not match the tensor dimensions")

        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "n_layers", n_layers)
        object.__setattr__(self, "layers", _frozen(lay))
        object.__setattr__(self, "sources", _frozen(src))
        object.__setattr__(self, "targets", _frozen(dst))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "directed", bool(self.directed))
        object.__setattr__(self, "vertex_labels", vlabels)
        object.__setattr__(self, "layer_labels", llabels)

    @classmethod
    def from_entries(
        cls,
        entries: Iterable[tuple[int, int, int, float]],
        n_vertices: int,
        n_layers: int,
        directed: bool = True,
        vertex_labels: Iterable[str] = (),
        layer_labels: Iterable[str] = (),
    ) -> "MultiplexTensor":
        """Build a tensor from 0-based ``(layer, i, j, weight)`` tuples.

        For undirected tensors the reverse orientation is added; repeated
        entries with equal weight collapse, conflicting ones raise.
        """
        merged: dict[tuple[int, int, int], float] = {}
        for layer, i, j, w in entries:
            keys = [(int(layer), int(i), int(j))]
            if not directed:
                keys.append((int(layer), int(j), int(i)))
            for key in keys:
                old = merged.get(key)
                if old is not None and old != w:
                    raise DataError(
                        f"conflicting weights {old} and {w} for entry {key}"
                    )
                merged[key] = float(w)
        if merged:
            arr = np.array(list(merged.keys()), dtype=np.int64)
            w = np.array(list(merged.values()), dtype=np.float64)
        else:
            arr = np.zeros((0, 3), dtype=np.int64)
            w = np.zeros(0)
        return cls(
            n_vertices,
            n_layers,
            arr[:, 0],
            arr[:, 1],
            arr[:, 2],
            w,
            directed=directed,
            vertex_labels=tuple(vertex_labels),
            layer_labels=tuple(layer_labels),
        )

    @property
    def n_entries(self) -> int:
        return int(self.weights.size)

    @property
    def supra_size(self) -> int:
        return self.n_vertices * self.n_layers

    def entries(self) -> list[tuple[int, int, int, float]]:
        return list(
            zip(
                self.layers.tolist(),
                self.sources.tolist(),
                self.targets.tolist(),
                self.weights.tolist(),
            )
        )

    def weight(self, layer: int, i: int, j: int) -> float:
        """Weight of entry ``(layer, i, j)``, or 0.0 when absent."""
        k = self.find(layer, i, j)
        return 0.0 if k is None else float(self.weights[k])

    def find(self, layer: int, i: int, j: int) -> int | None:
        keys = _entry_keys(self.layers, self.sources, self.targets, self.n_vertices)
        key = (layer * self.n_vertices + i) * self.n_vertices + j
        k = int(np.searchsorted(keys, key))
        if k < keys.size and keys[k] == key:
            return k
        return None

    def layer_matrix(self, layer: int) -> sp.csr_matrix:
        mask = self.layers == layer
        n = self.n_vertices
        return sp.csr_matrix(
            (self.weights[mask], (self.sources[mask], self.targets[mask])), shape=(n, n)
        )

    def layers_of(self, i: int, j: int) -> tuple[int, ...]:
        """Layers in which the edge ``i -> j`` exists."""
        mask = (self.sources == i) & (self.targets == j)
        return tuple(sorted(self.layers[mask].tolist()))

    def with_weights(self, weights: np.ndarray) -> "MultiplexTensor":
        """Copy of the tensor with the same entries and new weights."""
        return MultiplexTensor(
            self.n_vertices,
            self.n_layers,
            self.layers,
            self.sources,
            self.targets,
            np.asarray(weights, dtype=np.float64),
            directed=self.directed,
            vertex_labels=self.vertex_labels,
            layer_labels=self.layer_labels,
        )

    def vertex_index(self, label: str | int) -> int:
        try:
            return self.vertex_labels.index(str(label))
        except ValueError:
            raise DataError(f"unknown vertex {label!r}") from None

    def layer_index(self, label: str | int) -> int:
        try:
            return self.layer_labels.index(str(label))
        except ValueError:
            raise DataError(f"unknown layer {label!r}") from None

    def relabel(self, perm: np.ndarray) -> "MultiplexTensor":
        """Tensor with vertex ``i`` renamed to ``perm[i]`` (labels follow)."""
        perm = np.asarray(perm, dtype=np.int64)
        labels = [""] * self.n_vertices
        for old, new in enumerate(perm.tolist()):
            labels[new] = self.vertex_labels[old]
        return MultiplexTensor(
            self.n_vertices,
            self.n_layers,
            self.layers,
            perm[self.sources],
            perm[self.targets],
            self.weights,
            directed=self.directed,
            vertex_labels=tuple(labels),
            layer_labels=self.layer_labels,
        )


def _entry_keys(lay, src, dst, n) -> np.ndarray:
    return (np.asarray(lay) * n + np.asarray(src)) * n + np.asarray(dst)


def validate_gamma(gamma: float) -> float:
    """Return ``gamma`` as a float, rejecting non-positive or non-finite values."""
    g = float(gamma)
    if not np.isfinite(g) or g <= 0:
        raise DataError(f"coupling gamma must be positive and finite, got {gamma!r}")
    return g


# ---------------------------------------------------------------------------
# ingestion


def _sort_labels(labels: Iterable[int]) -> list[int]:
    return sorted(set(labels))


def load_multiplex(
    path: str | os.PathLike | IO[str],
    format: str = "multiplex",
    directed: bool = True,
) -> MultiplexTensor:
    """Read an edge-list file into a :class:`MultiplexTensor`.

    Parameters
    ----------
    path : path or text stream
        ``multiplex`` files hold ``<layer> <src> <dst> [weight]`` per line,
        ``single`` files hold ``<src> <dst> [weight]``.  ``#`` starts a
        comment; the weight defaults to 1.
    format : {"multiplex", "single"}
        Also accepts ``extended-edge-list`` / ``single-layer-edge-list``.
    directed : bool
        When False, every line also adds the reverse orientation.

    Raises
    ------
    DataError
        On malformed lines (with line number), non-positive weights,
        self-loops, conflicting duplicates or an empty file.
    """
    try:
        fmt = _FORMAT_ALIASES[format]
    except KeyError:
        raise DataError(f"unknown edge-list format {format!r}") from None

    if isinstance(path, (str, os.PathLike)):
        name = os.fspath(path)
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    else:
        name = getattr(path, "name", None)
        text = path.read()

    ncols = 3 if fmt == "multiplex" else 2
    raw: list[tuple[int, int, int, float, int]] = []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if len(tok) not in (ncols, ncols + 1):
            raise DataError(f"expected {ncols} or {ncols + 1} fields, got {len(tok)}", lineno, name)
        try:
            ids = [int(t) for t in tok[:ncols]]
        except ValueError:
            raise DataError(f"non-integer identifier in {line!r}", lineno, name) from None
        try:
            w = float(tok[ncols]) if len(tok) > ncols else 1.0
        except ValueError:
            raise DataError(f"bad weight {tok[ncols]!r}", lineno, name) from None
        if not np.isfinite(w) or w <= 0:
            raise DataError(f"weight must be positive, got {tok[ncols]}", lineno, name)
        if fmt == "single":
            ids = [1] + ids
        layer, i, j = ids
        if i == j:
            raise DataError(f"self-loop on vertex {i}", lineno, name)
        raw.append((layer, i, j, w, lineno))

    if not raw:
        raise DataError("no entries", path=name)

    vlabels = _sort_labels([r[1] for r in raw] + [r[2] for r in raw])
    llabels = _sort_labels(r[0] for r in raw)
    vmap = {v: k for k, v in enumerate(vlabels)}
    lmap = {v: k for k, v in enumerate(llabels)}

    merged: dict[tuple[int, int, int], tuple[float, int]] = {}
    for layer, i, j, w, lineno in raw:
        keys = [(lmap[layer], vmap[i], vmap[j])]
        if not directed:
            keys.append((lmap[layer], vmap[j], vmap[i]))
        for key in keys:
            old = merged.get(key)
            if old is not None and old[0] != w:
                raise DataError(
                    f"conflicting weight {w} for edge {i}->{j} in layer {layer} "
                    f"(line {old[1]} has {old[0]})",
                    lineno,
                    name,
                )
            merged[key] = (w, lineno)

    entries = [(l, i, j, w) for (l, i, j), (w, _) in merged.items()]
    return MultiplexTensor.from_entries(
        entries,
        len(vlabels),
        len(llabels),
        directed=directed,
        vertex_labels=[str(v) for v in vlabels],
        layer_labels=[str(v) for v in llabels],
    )


def write_multiplex(t: MultiplexTensor, stream: IO[str], format: str = "multiplex") -> None:
    """Write ``t`` as an edge list in canonical order, using original labels.

    Undirected tensors are written with both orientations, which
    :func:`load_multiplex` collapses again.
    """
    fmt = _FORMAT_ALIASES.get(format)
    if fmt is None:
        raise DataError(f"unknown edge-list format {format!r}")
    if fmt == "single" and t.n_layers != 1:
        raise DataError("single-layer format needs exactly one layer")
    for layer, i, j, w in t.entries():
        head = "" if fmt == "single" else f"{t.layer_labels[layer]} "
        stream.write(f"{head}{t.vertex_labels[i]} {t.vertex_labels[j]} {w!r}\n")


# ---------------------------------------------------------------------------
# matrices derived from the tensor


def aggregate(t: MultiplexTensor) -> sp.csr_matrix:
    """Sum of the layer adjacency matrices, ``A+ = sum_l A^(l)``."""
    n = t.n_vertices
    m = sp.csr_matrix((t.weights, (t.sources, t.targets)), shape=(n, n))
    m.sum_duplicates()
    return m


@dataclass(frozen=True, eq=False)
class SupraAdjacency:
    """Supra-adjacency matrix ``B(gamma)`` of a multiplex.

    ``matrix`` is ``blkdiag(A^(1), ..., A^(L)) + gamma * (1 1^T kron I - I)``
    in CSR form; ``intra`` is the block-diagonal part alone.
    """

    matrix: sp.csr_matrix
    intra: sp.csr_matrix
    gamma: float
    n_vertices: int
    n_layers: int

    @property
    def size(self) -> int:
        return self.n_vertices * self.n_layers

    def block(self, l1: int, l2: int) -> sp.csr_matrix:
        n = self.n_vertices
        return self.matrix[l1 * n : (l1 + 1) * n, l2 * n : (l2 + 1) * n].tocsr()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build_supra(t: MultiplexTensor, gamma: float) -> SupraAdjacency:
    """Assemble ``B(gamma)`` with layer blocks in layer order."""
    gamma = validate_gamma(gamma)
    n, n_layers = t.n_vertices, t.n_layers
    size = n * n_layers
    rows = t.layers * n + t.sources
    cols = t.layers * n + t.targets
    intra = sp.csr_matrix((t.weights, (rows, cols)), shape=(size, size))

    coupling = sp.kron(
        sp.csr_matrix(np.ones((n_layers, n_layers)) - np.eye(n_layers)),
        sp.identity(n, format="csr"),
        format="csr",
    )
    matrix = (intra + gamma * coupling).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return SupraAdjacency(matrix, intra, gamma, n, n_layers)


@dataclass(frozen=True, eq=False)
class SparsityPattern:
    """Set of matrix positions, stored as sorted unique row/column arrays."""

    shape: tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have equal length")
        nr, nc = (int(s) for s in self.shape)
        if rows.size and (rows.min() < 0 or rows.max() >= nr or cols.min() < 0 or cols.max() >= nc):
            raise ValueError("pattern position out of bounds")
        keys = np.unique(rows * nc + cols)
        object.__setattr__(self, "shape", (nr, nc))
        object.__setattr__(self, "rows", _frozen(keys // nc if nc else keys))
        object.__setattr__(self, "cols", _frozen(keys % nc if nc else keys))

    @classmethod
    def from_positions(cls, shape, positions: Iterable[tuple[int, int]]) -> "SparsityPattern":
        pos = np.array(list(positions), dtype=np.int64).reshape(-1, 2)
        return cls(tuple(shape), pos[:, 0], pos[:, 1])

    @classmethod
    def full(cls, shape) -> "SparsityPattern":
        nr, nc = shape
        r, c = np.divmod(np.arange(nr * nc), nc)
        return cls((nr, nc), r, c)

    def __len__(self) -> int:
        return int(self.rows.size)

    def __contains__(self, pos) -> bool:
        i, j = pos
        key = i * self.shape[1] + j
        keys = self.rows * self.shape[1] + self.cols
        k = np.searchsorted(keys, key)
        return bool(k < keys.size and keys[k] == key)

    @property
    def positions(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[self.rows, self.cols] = True
        return m


def pattern_of(m) -> SparsityPattern:
    """Positions of the strictly positive entries of ``m`` (dense or sparse)."""
    if sp.issparse(m):
        c = sp.coo_matrix(m)
        keep = c.data > 0
        return SparsityPattern(c.shape, c.row[keep], c.col[keep])
    a = np.asarray(m)
    r, c = np.nonzero(a > 0)
    return SparsityPattern(a.shape, r, c)


def project_onto_cone(m, s: SparsityPattern):
    """Zero every entry of ``m`` outside ``s``.

    This is the Frobenius-nearest point of the cone of nonnegative matrices
    supported on ``s``.  Dense input gives a dense result, sparse input a
    CSR matrix.
    """
    if tuple(m.shape) != tuple(s.shape):
        raise ValueError(f"dimension mismatch: matrix {m.shape} vs pattern {s.shape}")
    if sp.issparse(m):
        m = sp.csr_matrix(m)
        vals = np.asarray(m[s.rows, s.cols]).ravel()
        out = sp.csr_matrix((vals, (s.rows, s.cols)), shape=s.shape)
        out.eliminate_zeros()
        return out
    a = np.asarray(m, dtype=np.float64)
    out = np.zeros_like(a)
    out[s.rows, s.cols] = a[s.rows, s.cols]
    return out


def is_irreducible(m) -> bool:
    """True iff the directed graph of the positive entries is strongly connected."""
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if m.shape[0] == 1:
        return True
    g = sp.csr_matrix(m) if sp.issparse(m) else sp.csr_matrix(np.asarray(m) > 0)
    if sp.issparse(m):
        g = g.copy()
        g.data = (g.data > 0).astype(np.float64)
        g.eliminate_zeros()
    ncomp, _ = connected_components(g, directed=True, connection="strong")
    return ncomp == 1
