import itertools
import math

import numpy as np
import pytest

from multiplexcomm.core import MultiplexTensor

_CRITERIA: dict[str, tuple[str, str]] = {}


def record_criterion(name: str, ok: bool | None, detail: str = "") -> None:
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    _CRITERIA[name] = (status, detail)


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda s: (len(s.split()[0]), s)):
        status, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{status:4}  {name}  {detail}")


def random_multiplex(
    rng: np.random.Generator,
    n_max: int = 6,
    l_max: int = 3,
    weights=(0.5, 2.0),
    directed: bool | None = None,
    connected: bool = True,
    n_min: int = 2,
) -> MultiplexTensor:
    """Random multiplex; with ``connected`` the aggregate holds a directed cycle."""
    n = int(rng.integers(n_min, n_max + 1))
    n_layers = int(rng.integers(1, l_max + 1))
    if directed is None:
        directed = bool(rng.random() < 0.5)
    density = rng.uniform(0.15, 0.5)
    entries = {}
    for layer in range(n_layers):
        for i in range(n):
            for j in range(n):
                if i != j and (directed or i < j) and rng.random() < density:
                    entries[(layer, i, j)] = rng.uniform(*weights)
    if connected:
        order = rng.permutation(n)
        for a, b in zip(order, np.roll(order, -1)):
            if a == b:
                continue
            i, j = (int(a), int(b)) if directed else (int(min(a, b)), int(max(a, b)))
            layer = int(rng.integers(n_layers))
            entries.setdefault((layer, i, j), rng.uniform(*weights))
    return MultiplexTensor.from_entries(
        [(l, i, j, w) for (l, i, j), w in entries.items()], n, n_layers, directed=directed
    )


def brute_force_lengths(t: MultiplexTensor, gamma: float, k: int) -> np.ndarray:
    """Enumerate every sequence of at most ``k`` intra-layer edges.

    Independent of both the tropical recursion and the layer-state oracle:
    it walks all edge sequences explicitly and prices each one.
    """
    n = t.n_vertices
    out = np.full((n, n), math.inf)
    np.fill_diagonal(out, 0.0)
    by_source: dict[int, list[tuple[int, int, float]]] = {}
    for layer, i, j, w in t.entries():
        by_source.setdefault(i, []).append((layer, j, 1.0 / w))

    def walk(start, v, last_layer, cost, depth):
        if depth == k:
            return
        for layer, j, c in by_source.get(v, []):
            extra = 0.0 if last_layer is None or last_layer == layer else 1.0 / gamma
            total = cost + c + extra
            if j != start and total < out[start, j]:
                out[start, j] = total
            walk(start, j, layer, total, depth + 1)

    for s in range(n):
        walk(s, s, None, 0.0, 0)
    return out


def two_layer_chain(same_layer: bool = False) -> MultiplexTensor:
    """v1 -> v2 in layer 1, v2 -> v3 in layer 2 (or layer 1), unit weights."""
    second = 0 if same_layer else 1
    return MultiplexTensor.from_entries([(0, 0, 1, 1.0), (second, 1, 2, 1.0)], 3, 2)


def edge_toy() -> MultiplexTensor:
    """Two vertices, one layer, one undirected unweighted edge."""
    return MultiplexTensor.from_entries([(0, 0, 1, 1.0)], 2, 1, directed=False)


def all_pairs(n):
    return itertools.product(range(n), range(n))
