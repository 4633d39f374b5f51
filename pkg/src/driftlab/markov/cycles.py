"""Fundamental cycle basis of a rate network.

A spanning tree is grown by breadth-first search; every non-tree edge
(chord) closes exactly one fundamental cycle. The basis spans the cycle
space of the undirected edge graph, so a vanishing affinity on every
fundamental cycle is equivalent to the Kolmogorov detailed-balance
criterion on all cycles.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .rate_matrix import RateMatrix


@dataclass(frozen=True)
class Cycle:
    """Closed directed loop: the chord first, then the tree path back."""

    chord: tuple[int, int]
    edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class CycleBasis:
    root: int
    parent: tuple[int, ...]
    cycles: tuple[Cycle, ...]


def _bfs_tree(
    rm: RateMatrix, root: int, rng: np.random.Generator | None
) -> list[int]:
    n = rm.n_states
    adjacency = [np.flatnonzero(rm.rates[i] > 0) for i in range(n)]
    parent = [-1] * n
    seen = [False] * n
    seen[root] = True
    queue = deque([root])
    while queue:
        node = queue.popleft()
        neighbors = adjacency[node]
        if rng is not None:
            neighbors = rng.permutation(neighbors)
        for nxt in neighbors:
            nxt = int(nxt)
            if not seen[nxt]:
                seen[nxt] = True
                parent[nxt] = node
                queue.append(nxt)
    return parent


def _path_to_root(parent: list[int] | tuple[int, ...], node: int) -> list[int]:
    path = [node]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return path


def cycle_basis(rm: RateMatrix, rng: np.random.Generator | None = None) -> CycleBasis:
    """Fundamental cycles from a BFS spanning tree.

    With `rng` given, the root and neighbor visit order are randomized,
    producing a different (but equally valid) spanning tree.
    """
    n = rm.n_states
    root = 0 if rng is None else int(rng.integers(n))
    parent = _bfs_tree(rm, root, rng)
    tree_edges = {frozenset((i, parent[i])) for i in range(n) if parent[i] != -1}
    cycles = []
    for u, v in rm.edges():
        if frozenset((u, v)) in tree_edges:
            continue
        pu = _path_to_root(parent, u)
        pv = _path_to_root(parent, v)
        common = set(pu) & set(pv)
        lca = next(x for x in pu if x in common)
        down_v = pv[: pv.index(lca) + 1]  # v ... lca
        down_u = pu[: pu.index(lca) + 1]  # u ... lca
        edges = [(u, v)]
        edges += list(zip(down_v[:-1], down_v[1:]))  # v -> lca
        edges += list(zip(down_u[1:], down_u[:-1]))[::-1]  # lca -> u
        cycles.append(Cycle(chord=(u, v), edges=tuple(edges)))
    return CycleBasis(root=root, parent=tuple(parent), cycles=tuple(cycles))


def cycle_affinity(rm: RateMatrix, cycle: Cycle) -> float:
    """Log ratio of forward to backward rate products around the loop."""
    total = 0.0
    for a, b in cycle.edges:
        total += np.log(rm.rates[a, b]) - np.log(rm.rates[b, a])
    return float(total)
