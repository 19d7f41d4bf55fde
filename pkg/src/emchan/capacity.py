"""MIMO capacity with equal-power and water-filling input covariances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .seeds import realization_rng


@dataclass(frozen=True)
class CapacityResult:
    """Capacity in bits/s/Hz plus the eigenmode allocation that achieved it.

    ``eigenvalues`` are those of G^H G sorted descending; ``allocation`` is
    aligned with them and sums to the power budget (zero for a zero channel).
    """

    capacity: float
    allocation: np.ndarray
    eigenvalues: np.ndarray


def _channel_eigenvalues(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2:
        raise DomainError("channel matrix must be 2-D")
    if not np.all(np.isfinite(g)):
        raise DomainError("channel matrix entries must be finite")
    k = g.shape[1]
    sv = np.linalg.svd(g, compute_uv=False)
    lam = np.zeros(k)
    lam[: sv.size] = sv**2
    return np.sort(lam)[::-1]


def capacity_equal_power(g: np.ndarray, power: float, noise_power: float) -> CapacityResult:
    """log2 det(I + P/(K sigma^2) G G^H) with K transmit streams."""
    if noise_power <= 0.0:
        raise DomainError("noise power must be positive")
    lam = _channel_eigenvalues(g)
    k = lam.size
    coef = power / (k * noise_power)
    cap = float(np.sum(np.log2(1.0 + coef * lam)))
    return CapacityResult(capacity=cap, allocation=np.full(k, power / k), eigenvalues=lam)


def capacity_waterfilling(g: np.ndarray, power: float, noise_power: float) -> CapacityResult:
    """Optimal power split across eigenmodes by the exact active-set rule."""
    if noise_power <= 0.0 or power <= 0.0:
        raise DomainError("power and noise power must be positive")
    lam = _channel_eigenvalues(g)
    positive = lam[lam > 0.0]
    alloc = np.zeros_like(lam)
    if positive.size == 0:
        return CapacityResult(capacity=0.0, allocation=alloc, eigenvalues=lam)
    # with eigenvalues sorted descending, the active set is a prefix:
    # drop the weakest mode while its allocation would come out negative
    inv = noise_power / positive
    active = positive.size
    level = (power + inv.sum()) / active
    while active > 1 and level <= inv[active - 1]:
        active -= 1
        level = (power + inv[:active].sum()) / active
    alloc[:active] = level - inv[:active]
    cap = float(np.sum(np.log2(1.0 + alloc[:active] * positive[:active] / noise_power)))
    return CapacityResult(capacity=cap, allocation=alloc, eigenvalues=lam)


@dataclass(frozen=True)
class EnsembleStats:
    """Monte Carlo capacity ensemble with its empirical CDF."""

    capacities: np.ndarray
    mean: float
    cdf_levels: np.ndarray
    cdf_probs: np.ndarray


def empirical_cdf(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    levels = np.sort(np.asarray(samples, dtype=float))
    probs = np.arange(1, levels.size + 1) / levels.size
    return levels, probs


def ergodic_capacity(generator: Callable[[np.random.Generator], np.ndarray],
                     realizations: int, power: float, noise_power: float,
                     allocation: str = "equal", master_seed: int = 0,
                     study_id: int = 0) -> EnsembleStats:
    """Mean/CDF of capacity over seeded channel draws.

    Realization i draws from an RNG derived from (master_seed, study_id, i),
    so results do not depend on evaluation order.
    """
    if realizations < 1:
        raise DomainError("need at least one realization")
    if allocation == "equal":
        evaluate = capacity_equal_power
    elif allocation == "waterfilling":
        evaluate = capacity_waterfilling
    else:
        raise DomainError("allocation must be 'equal' or 'waterfilling'")
    caps = np.empty(realizations)
    for i in range(realizations):
        rng = realization_rng(master_seed, study_id, i)
        try:
            g = generator(rng)
        except Exception as exc:
            raise RuntimeError(f"channel generator failed at realization {i}") from exc
        caps[i] = evaluate(g, power, noise_power).capacity
    levels, probs = empirical_cdf(caps)
    return EnsembleStats(capacities=caps, mean=float(caps.mean()),
                         cdf_levels=levels, cdf_probs=probs)
