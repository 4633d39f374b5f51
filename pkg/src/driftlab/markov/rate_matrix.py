"""Continuous-time Markov rate networks.

A rate network is a square nonnegative matrix of off-diagonal transition
rates k_ij. Edges must come in reversible pairs (k_ij > 0 iff k_ji > 0) and
the positive-rate digraph must be strongly connected, which guarantees a
unique strictly positive stationary distribution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import ConfigError, NotStronglyConnectedError


@dataclass(frozen=True)
class RateMatrix:
    """Validated rate network. Build through :func:`rate_matrix`."""

    rates: np.ndarray

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges (i, j) with i < j and positive rates."""
        i_idx, j_idx = np.nonzero(np.triu(self.rates, k=1))
        return list(zip(i_idx.tolist(), j_idx.tolist()))

    def exit_rates(self) -> np.ndarray:
        return self.rates.sum(axis=1)


def rate_matrix(rates: np.ndarray) -> RateMatrix:
    rates = np.asarray(rates, dtype=float)
    if rates.ndim != 2 or rates.shape[0] != rates.shape[1]:
        raise ConfigError(f"rate matrix must be square, got shape {rates.shape}")
    n = rates.shape[0]
    if n < 2:
        raise ConfigError("rate network needs at least 2 states")
    off = rates.copy()
    np.fill_diagonal(off, 0.0)
    if np.any(off < 0) or not np.all(np.isfinite(off)):
        bad = np.argwhere((off < 0) | ~np.isfinite(off))[0]
        raise ConfigError(
            f"rates must be finite and nonnegative; offending entry "
            f"({bad[0]}, {bad[1]}) = {rates[bad[0], bad[1]]}"
        )
    fwd = off > 0
    asym = fwd != fwd.T
    if np.any(asym):
        i, j = np.argwhere(asym)[0]
        raise ConfigError(
            f"edge ({i}, {j}) is not reversible: k[{i},{j}]={off[i, j]} but "
            f"k[{j},{i}]={off[j, i]}; every edge needs positive rates both ways"
        )
    n_comp, labels = connected_components(
        csr_matrix(fwd.astype(np.int8)), directed=True, connection="strong"
    )
    if n_comp > 1:
        groups = [np.flatnonzero(labels == c).tolist() for c in range(n_comp)]
        raise NotStronglyConnectedError(groups)
    return RateMatrix(rates=off)


def potential_rates(potential: np.ndarray, edges: list[tuple[int, int]]) -> RateMatrix:
    """Rates k_ij = exp(V_i - V_j) on an undirected edge set.

    Detailed balance holds by construction: around any cycle the forward and
    backward rate products telescope to the same value.
    """
    potential = np.asarray(potential, dtype=float)
    n = potential.size
    rates = np.zeros((n, n))
    for i, j in edges:
        rates[i, j] = np.exp(potential[i] - potential[j])
        rates[j, i] = np.exp(potential[j] - potential[i])
    return rate_matrix(rates)


def load_edge_list(path: str) -> RateMatrix:
    """Read a rate network from an edge list.

    Format: one directed edge per line, ``i j k_ij`` with whitespace
    separation; ``#`` starts a comment; blank lines ignored. States are
    0-based and the matrix size is one plus the largest index seen.
    """
    entries: list[tuple[int, int, float]] = []
    with open(path, "r") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigError(
                    f"{path}:{lineno}: expected 'i j rate', got {raw.strip()!r}"
                )
            try:
                i, j, k = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
            if i < 0 or j < 0:
                raise ConfigError(f"{path}:{lineno}: negative state index")
            if i == j:
                raise ConfigError(f"{path}:{lineno}: self-loop on state {i}")
            entries.append((i, j, k))
    if not entries:
        raise ConfigError(f"{path}: no edges found")
    n = 1 + max(max(i, j) for i, j, _ in entries)
    rates = np.zeros((n, n))
    for i, j, k in entries:
        if rates[i, j] != 0.0:
            raise ConfigError(f"{path}: duplicate edge ({i}, {j})")
        rates[i, j] = k
    return rate_matrix(rates)


def dump_edge_list(rm: RateMatrix, path: str) -> None:
    from ..io_utils import atomic_write_text, fmt_value

    lines = ["# i j k_ij"]
    for i in range(rm.n_states):
        for j in range(rm.n_states):
            if rm.rates[i, j] > 0:
                lines.append(f"{i} {j} {fmt_value(float(rm.rates[i, j]))}")
    atomic_write_text(path, "\n".join(lines) + "\n")
