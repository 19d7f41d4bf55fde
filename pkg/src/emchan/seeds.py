"""Deterministic seed derivation for Monte Carlo realizations.

Realization ``i`` of a study always draws from
``default_rng(SeedSequence([master_seed, study_id, i]))`` so results are
independent of evaluation order and of how work is split across processes.
"""

from __future__ import annotations

import numpy as np

STUDY_IDS = {
    "densely-spaced": 1,
    "near-field": 2,
    "tri-pol": 3,
    "em-core-validation": 4,
}


def realization_rng(master_seed: int, study_id: int, index: int) -> np.random.Generator:
    """RNG for one realization, a pure function of (seed, study, index)."""
    seq = np.random.SeedSequence([int(master_seed), int(study_id), int(index)])
    return np.random.default_rng(seq)


def study_rng(master_seed: int, study_id: int) -> np.random.Generator:
    """RNG for one-off draws that are not tied to a realization index."""
    return realization_rng(master_seed, study_id, 2**31 - 1)
