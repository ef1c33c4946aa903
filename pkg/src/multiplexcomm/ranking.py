"""Edge recommendations under the efficiency and popularity approaches.

Both approaches score existing intra-layer edges by an entry of a
Wilkinson perturbation restricted to the edge pattern:

* efficiency: ``y_K[i] x_K[j]`` for the Perron vectors of the
  K-efficiency matrix, over the pattern of the aggregate ``A+``;
* popularity: ``a^(l)_ij y[lN+i] x[lN+j]`` for the Perron vectors of
  ``B(gamma)``, over the pattern of the intra-layer blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np

from .communicability import total_communicability_log
from .core import MultiplexTensor, aggregate, build_supra, validate_gamma
from .efficiency import (
    EfficiencyCertificate,
    efficiency_certificates,
    efficiency_matrix,
    global_k_efficiency,
)
from .errors import DataError
from .spectral import PerronTriple, perron
from .tropical import PathLengthMatrix, iter_path_matrices, path_length_matrix

Approach = Literal["efficiency", "popularity"]


@dataclass(frozen=True)
class EdgeRecommendation:
    """One ranked edge.

    ``pair`` uses 0-based vertex indices; for undirected tensors it is the
    orientation with ``i < j`` and stands for both.  ``layers`` holds
    every layer carrying the edge (efficiency) or the single scored layer
    (popularity).  ``source`` names the matrix whose entry gave ``score``.
    """

    approach: Approach
    pair: tuple[int, int]
    layers: tuple[int, ...]
    score: float
    rank: int
    source: str
    k: int | None = None
    undirected: bool = False

    def labelled(self, t: MultiplexTensor) -> dict:
        i, j = self.pair
        return {
            "rank": self.rank,
            "approach": self.approach,
            "source": t.vertex_labels[i],
            "target": t.vertex_labels[j],
            "layers": [t.layer_labels[l] for l in self.layers],
            "score": self.score,
            "undirected": self.undirected,
            "k": self.k,
        }


def _check_top(top: int) -> int:
    top = int(top)
    if top < 1:
        raise DataError(f"top must be at least 1, got {top}")
    return top


def _rank(cands: list[tuple[float, int, int, tuple[int, ...]]], top: int, **common) -> list[EdgeRecommendation]:
    cands.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))
    return [
        EdgeRecommendation(pair=(i, j), layers=layers, score=score, rank=r, **common)
        for r, (score, i, j, layers) in enumerate(cands[:top], start=1)
    ]


def efficiency_scores(t: MultiplexTensor, triple: PerronTriple) -> list[tuple[float, int, int, tuple[int, ...]]]:
    """Projected Wilkinson entries ``y_i x_j`` on the aggregate pattern.

    Layers are left empty here; callers fill them for the edges they keep.
    """
    agg = aggregate(t).tocoo()
    keep = agg.data > 0
    rows, cols = agg.row[keep], agg.col[keep]
    scores = triple.y[rows] * triple.x[cols]
    best: dict[tuple[int, int], float] = {}
    for i, j, s in zip(rows.tolist(), cols.tolist(), scores.tolist()):
        key = (i, j) if t.directed else (min(i, j), max(i, j))
        if s > best.get(key, -math.inf):
            best[key] = s
    return [(s, i, j, ()) for (i, j), s in best.items()]


def _efficiency_recs(t, p: PathLengthMatrix, top: int) -> tuple[list[EdgeRecommendation], PerronTriple, float]:
    q = efficiency_matrix(p)
    triple = perron(q.matrix)
    recs = _rank(
        efficiency_scores(t, triple),
        top,
        approach="efficiency",
        source=f"wilkinson(P^{p.k}_-1)|pattern(A+)",
        k=p.k,
        undirected=not t.directed,
    )
    recs = [replace(r, layers=t.layers_of(*r.pair)) for r in recs]
    return recs, triple, global_k_efficiency(q)


def rank_edges_efficiency(
    t: MultiplexTensor,
    gamma: float = 1.0,
    k: int | str = "full",
    top: int = 1,
    workers: int | None = None,
) -> list[EdgeRecommendation]:
    """Top edges by the Wilkinson matrix of the K-efficiency matrix."""
    top = _check_top(top)
    p = path_length_matrix(t, gamma, k, workers)
    recs, _, _ = _efficiency_recs(t, p, top)
    return recs


@dataclass
class EfficiencyRow:
    k: int
    efficiency: float
    rho: float
    recommendations: list[EdgeRecommendation]
    certificate: EfficiencyCertificate


@dataclass
class EfficiencyTable:
    rows: list[EfficiencyRow]
    stable_k: int
    final_k: int
    violations: list[str] = field(default_factory=list)

    @property
    def efficiency(self) -> float:
        return self.rows[-1].efficiency


def efficiency_table(
    t: MultiplexTensor,
    gamma: float = 1.0,
    k_max: int | str = "full",
    top: int = 1,
    workers: int | None = None,
) -> EfficiencyTable:
    """Global K-efficiency, Perron root and top edges for ``K = 1, 2, ...``.

    Runs until the path recursion reaches its fixed point or ``k_max``.
    ``stable_k`` is the first budget whose lengths equal the final ones.
    The monotone chains ``e^K <= e^(K+1)`` and ``rho_K <= rho_(K+1)`` are
    checked; failures are listed in ``violations``.
    """
    top = _check_top(top)
    rows: list[EfficiencyRow] = []
    prev = None
    stable = 1
    for p in iter_path_matrices(t, gamma, k_max, workers):
        recs, triple, e = _efficiency_recs(t, p, top)
        cert = efficiency_certificates(efficiency_matrix(p), triple.rho)
        rows.append(EfficiencyRow(p.k, e, triple.rho, recs, cert))
        if prev is not None and not np.array_equal(prev, p.lengths):
            stable = p.k
        prev = p.lengths
    violations = []
    for a, b in zip(rows, rows[1:]):
        if b.efficiency < a.efficiency:
            violations.append(f"e^{a.k} <= e^{b.k}")
        if b.rho < a.rho - 1e-10 * max(1.0, b.rho):
            violations.append(f"rho_{a.k} <= rho_{b.k}")
    for r in rows:
        if not r.certificate.passed:
            violations.append(f"certificate K={r.k}")
    return EfficiencyTable(rows, stable, rows[-1].k, violations)


def popularity_scores(
    t: MultiplexTensor, triple: PerronTriple, weighted: bool = True
) -> list[tuple[float, int, int, tuple[int, ...]]]:
    n = t.n_vertices
    rows = t.layers * n + t.sources
    cols = t.layers * n + t.targets
    scores = triple.y[rows] * triple.x[cols]
    if weighted:
        scores = scores * t.weights
    best: dict[tuple[int, int, int], float] = {}
    for l, i, j, s in zip(t.layers.tolist(), t.sources.tolist(), t.targets.tolist(), scores.tolist()):
        key = (l, i, j) if t.directed else (l, min(i, j), max(i, j))
        if s > best.get(key, -math.inf):
            best[key] = s
    return [(s, i, j, (l,)) for (l, i, j), s in best.items()]


def rank_edges_popularity(
    t: MultiplexTensor,
    gamma: float = 1.0,
    top: int = 1,
    weighted: bool = True,
    triple: PerronTriple | None = None,
) -> list[EdgeRecommendation]:
    """Top intra-layer edges by the importance vector of ``B(gamma)``.

    With ``weighted=False`` the edge weight factor is dropped and edges are
    ranked by the projected Wilkinson entries alone.
    """
    top = _check_top(top)
    if triple is None:
        triple = perron(build_supra(t, gamma).matrix)
    source = "weights*wilkinson(B)|pattern(B_d)" if weighted else "wilkinson(B)|pattern(B_d)"
    return _rank(
        popularity_scores(t, triple, weighted),
        top,
        approach="popularity",
        source=source,
        undirected=not t.directed,
    )


def apply_perturbation(
    t: MultiplexTensor,
    targets: Iterable[tuple[int, int, int]],
    add: float | None = None,
    scale: float | None = None,
) -> MultiplexTensor:
    """Strengthen existing entries ``(layer, i, j)`` by ``+add`` or ``*scale``.

    For undirected tensors the reverse orientation is updated too.  Each
    target is updated once even if listed twice.
    """
    if (add is None) == (scale is None):
        raise DataError("give exactly one of add or scale")
    idx: set[int] = set()
    for layer, i, j in targets:
        k = t.find(layer, i, j)
        if k is None:
            raise DataError(f"no edge {i}->{j} in layer {layer} to perturb")
        idx.add(k)
        if not t.directed:
            idx.add(t.find(layer, j, i))
    w = t.weights.copy()
    sel = np.array(sorted(idx), dtype=np.int64)
    if add is not None:
        w[sel] = w[sel] + add
    else:
        w[sel] = w[sel] * scale
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DataError("perturbation would make a weight non-positive")
    return t.with_weights(w)


@dataclass
class Measures:
    efficiency: float
    tc: float
    log_tc: float
    rho_supra: float
    rho_efficiency: float
    stable_k: int


@dataclass
class Comparison:
    before: Measures
    after: Measures
    delta: dict[str, float]
    warnings: list[str] = field(default_factory=list)


def measures(t: MultiplexTensor, gamma: float, k: int | str = "full", workers: int | None = None) -> Measures:
    gamma = validate_gamma(gamma)
    p = path_length_matrix(t, gamma, k, workers)
    q = efficiency_matrix(p)
    b = build_supra(t, gamma)
    log_tc = total_communicability_log(b)
    return Measures(
        efficiency=global_k_efficiency(q),
        tc=math.exp(log_tc) if log_tc < 709 else math.inf,
        log_tc=log_tc,
        rho_supra=perron(b.matrix).rho,
        rho_efficiency=perron(q.matrix).rho,
        stable_k=p.stable_k,
    )


def compare_measures(
    before: MultiplexTensor,
    after: MultiplexTensor,
    gamma: float = 1.0,
    k: int | str = "full",
    workers: int | None = None,
) -> Comparison:
    """Efficiency, tc and Perron roots before and after a perturbation."""
    if (before.n_vertices, before.n_layers) != (after.n_vertices, after.n_layers):
        raise DataError("tensors differ in size")
    mb = measures(before, gamma, k, workers)
    ma = measures(after, gamma, k, workers)
    delta = {
        "efficiency": ma.efficiency - mb.efficiency,
        "tc": ma.tc - mb.tc,
        "log_tc": ma.log_tc - mb.log_tc,
        "rho_supra": ma.rho_supra - mb.rho_supra,
        "rho_efficiency": ma.rho_efficiency - mb.rho_efficiency,
    }
    notes = []
    if _dominates(after, before) and delta["rho_supra"] < -1e-10 * max(1.0, mb.rho_supra):
        notes.append("Perron root of B decreased although no weight decreased")
    return Comparison(mb, ma, delta, notes)


def _dominates(a: MultiplexTensor, b: MultiplexTensor) -> bool:
    wa = {(l, i, j): w for l, i, j, w in a.entries()}
    return all(wa.get((l, i, j), 0.0) >= w for l, i, j, w in b.entries())


def parse_targets(t: MultiplexTensor, specs: Sequence[str]) -> list[tuple[int, int, int]]:
    """Turn ``LAYER:SRC:DST`` label strings into 0-based entry keys."""
    out = []
    for spec in specs:
        parts = spec.replace(",", ":").split(":")
        if len(parts) != 3:
            raise DataError(f"edge spec must look like LAYER:SRC:DST, got {spec!r}")
        out.append((t.layer_index(parts[0]), t.vertex_index(parts[1]), t.vertex_index(parts[2])))
    return out
