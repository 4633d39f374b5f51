"""Deterministic random-stream derivation.

Every stochastic unit of work (a chain, a trial batch, a bootstrap pass)
draws from its own generator derived from the master seed, a module label,
and a unit index, so results do not depend on scheduling order and repeat
runs are reproducible.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _label_tag(label: str) -> int:
    # stable across processes and platforms, unlike hash()
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def child_seed_sequence(
    master_seed: int, label: str, index: int = 0
) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=[int(master_seed), _label_tag(label), int(index)]
    )


def child_rng(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Generator for unit `index` of the work stream named `label`."""
    return np.random.default_rng(child_seed_sequence(master_seed, label, index))


def chain_rngs(
    master_seed: int, label: str, n_chains: int
) -> list[np.random.Generator]:
    return [child_rng(master_seed, label, i) for i in range(n_chains)]
