"""Seeded synthetic GDP level panels with known correlation structure.

Growth rates follow a linear factor model,
``g = mean + scale * (sum_k L_k f_k + sqrt(1 - sum_k L_k^2) e)``, and levels
are built so that year-over-year growth recovers ``g`` exactly.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .ingest import QuarterlySeries, parse_quarter
from .rng import standard_normal

EU8_LABELS = ("FR", "DE", "IT", "BE", "NL", "ES", "UK", "US")


def factor_growth(loadings, seed: int, mean: float = 2.0, scale: float = 1.5) -> np.ndarray:
    """Growth panel (percent); ``loadings[i, k, t]`` is series i's weight on factor k at time t."""
    lam = np.asarray(loadings, dtype=float)
    if lam.ndim != 3:
        raise ValueError("loadings must have shape (N, K, T)")
    n, k, t = lam.shape
    common = np.sum(lam * lam, axis=1)
    if np.any(common > 1.0):
        raise ValueError("squared loadings of a series must sum to at most 1")
    shocks = standard_normal(seed, (k + n, t))
    factors, idio = shocks[:k], shocks[k:]
    signal = np.einsum("ikt,kt->it", lam, factors) + np.sqrt(1.0 - common) * idio
    return mean + scale * signal


def levels_from_growth(
    growth: np.ndarray, labels: Sequence[str], start: str = "1980Q1", base: float = 100.0, lag: int = 4
) -> list[QuarterlySeries]:
    """Level series whose ``lag``-quarter percent change is ``growth``."""
    growth = np.asarray(growth, dtype=float)
    n, t = growth.shape
    if np.any(growth <= -100.0):
        raise ValueError("growth below -100% gives non-positive levels")
    levels = np.empty((n, t + lag))
    levels[:, :lag] = base
    for j in range(t):
        levels[:, j + lag] = levels[:, j] * (1.0 + growth[:, j] / 100.0)
    first = parse_quarter(start)
    return [QuarterlySeries(label, first, row) for label, row in zip(labels, levels)]


def convergence_ramp(
    n: int = 8,
    quarters: int = 240,
    rho_start: float = 0.2,
    rho_end: float = 0.9,
    seed: int = 0,
    start: str = "1980Q1",
) -> list[QuarterlySeries]:
    """One common factor whose pairwise correlation rises linearly over time."""
    rho = np.linspace(rho_start, rho_end, quarters)
    lam = np.broadcast_to(np.sqrt(rho), (n, 1, quarters))
    labels = [f"C{i + 1}" for i in range(n)]
    return levels_from_growth(factor_growth(lam, seed), labels, start)


def independent(n: int = 8, quarters: int = 109, seed: int = 0, start: str = "1980Q1") -> list[QuarterlySeries]:
    lam = np.zeros((n, 1, quarters))
    labels = [f"C{i + 1}" for i in range(n)]
    return levels_from_growth(factor_growth(lam, seed), labels, start)


def eu8_like(seed: int = 0, quarters: int = 109, start: str = "1980Q1") -> list[QuarterlySeries]:
    """Eight economies: a tight continental block (FR/BE tightest) and a
    looser UK/US block, all sharing one global factor."""
    # factors: global, continental, anglo, FR-BE pair
    table = {
        "FR": (0.75, 0.45, 0.0, 0.35),
        "DE": (0.70, 0.45, 0.0, 0.0),
        "IT": (0.72, 0.45, 0.0, 0.0),
        "BE": (0.75, 0.45, 0.0, 0.35),
        "NL": (0.72, 0.45, 0.0, 0.0),
        "ES": (0.70, 0.45, 0.0, 0.0),
        "UK": (0.45, 0.0, 0.70, 0.0),
        "US": (0.40, 0.0, 0.72, 0.0),
    }
    lam = np.array([table[x] for x in EU8_LABELS])
    lam = np.broadcast_to(lam[:, :, None], lam.shape + (quarters,))
    return levels_from_growth(factor_growth(lam, seed), EU8_LABELS, start)


KINDS = {"eu8": eu8_like, "ramp": convergence_ramp, "independent": independent}
