"""Per-stage seed derivation.

Every random stage draws from its own PCG64 generator.  The stage seed is
the first 64-bit word of ``SeedSequence(root, spawn_key=(stage_number,))``,
so stages never share a stream and adding a stage does not perturb the
others.
"""

from __future__ import annotations

import os

import numpy as np

SEED_ENV = "CONTAGIONLAB_SEED"

STAGES = {
    "baseline": 1,
    "graph": 2,
    "dispositions": 3,
    "beta": 4,
    "timeline": 5,
    "emotions": 6,
    "text": 7,
}


def stage_seed(root: int, stage: str) -> int:
    seq = np.random.SeedSequence(int(root), spawn_key=(STAGES[stage],))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def stage_rng(root: int, stage: str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(stage_seed(root, stage)))


def resolve_seed(explicit: int | None, default: int = 0) -> int:
    """Explicit seed, else ``$CONTAGIONLAB_SEED``, else ``default``."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        return int(env)
    return default
