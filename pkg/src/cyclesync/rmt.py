"""Correlation matrices, their spectra, and the Marchenko-Pastur noise band."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError
from .ingest import Panel
from .linalg import jacobi_eigh

NEGATIVE_CLAMP = 1e-10
NORM_TOL = 1e-8


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        c = _frozen(self.entries)
        n = len(self.labels)
        if c.shape != (n, n):
            raise DataError(f"correlation matrix shape {c.shape} does not match {n} labels")
        if np.abs(c - c.T).max() >= 1e-12:
            raise DataError("correlation matrix is not symmetric")
        if np.abs(np.diag(c) - 1.0).max() >= 1e-10:
            raise DataError("correlation matrix diagonal is not 1")
        if np.abs(c).max() > 1.0 + 1e-10:
            raise DataError("correlation entries outside [-1, 1]")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "entries", c)

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending; ``eigenvectors[:, k]`` pairs with ``eigenvalues[k]``."""

    labels: tuple[str, ...]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    trace: float

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]


@dataclass(frozen=True)
class MPBand:
    q: float
    sigma2: float
    lambda_minus: float
    lambda_plus: float

    def contains(self, value: float) -> bool:
        return self.lambda_minus <= value <= self.lambda_plus


class ModeClasses(NamedTuple):
    below: tuple[int, ...]
    noise: tuple[int, ...]
    above: tuple[int, ...]


def correlation(panel: Panel) -> CorrelationMatrix:
    """C = M M^T / T over the standardized rows of ``panel``."""
    if not panel.standardized:
        raise DataError("correlation() needs a standardized panel")
    m = panel.data
    c = m @ m.T / panel.t
    c = 0.5 * (c + c.T)
    return CorrelationMatrix(panel.labels, c)


def _sign_fix(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude component is non-negative."""
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[lead, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    return vectors * signs


def eigensystem(matrix: np.ndarray, labels: Sequence[str]) -> EigenSystem:
    """Sorted, sign-normalised spectral decomposition of a symmetric PSD matrix."""
    matrix = np.asarray(matrix, dtype=float)
    values, vectors, _ = jacobi_eigh(matrix)
    order = np.argsort(-values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    if values[-1] < -NEGATIVE_CLAMP:
        raise DataError(f"matrix is not positive semi-definite (eigenvalue {values[-1]:.3e})")
    values = np.where(values < 0.0, 0.0, values)
    return EigenSystem(
        tuple(labels), _frozen(values), _frozen(_sign_fix(vectors)), float(np.trace(matrix))
    )


def eigen(corr: CorrelationMatrix) -> EigenSystem:
    return eigensystem(corr.entries, corr.labels)


def mp_band(n: int, t: int, sigma2: float = 1.0) -> MPBand:
    """Noise band edges sigma2 (1 -+ 1/sqrt(Q))^2 with Q = t / n."""
    if n < 1 or t < 1:
        raise DataError(f"need n >= 1 and t >= 1, got n={n}, t={t}")
    if t < n:
        raise DataError(f"t={t} < n={n}: Q = t/n < 1 is outside the supported regime")
    if not sigma2 > 0:
        raise DataError("sigma2 must be positive")
    q = t / n
    root = 1.0 / math.sqrt(q)
    return MPBand(q, float(sigma2), sigma2 * (1.0 - root) ** 2, sigma2 * (1.0 + root) ** 2)


def mp_density(lam, band: MPBand):
    """Marchenko-Pastur eigenvalue density; zero outside the open band.

    Accepts a scalar or an array.
    """
    x = np.asarray(lam, dtype=float)
    lo, hi = band.lambda_minus, band.lambda_plus
    inside = (x > lo) & (x < hi)
    xs = np.where(inside, x, 0.5 * (lo + hi))
    value = band.q / (2.0 * math.pi * band.sigma2) * np.sqrt((hi - xs) * (xs - lo)) / xs
    out = np.where(inside, value, 0.0)
    return float(out) if out.ndim == 0 else out


def mp_cdf(x, band: MPBand, nodes: int = 64):
    """Cumulative Marchenko-Pastur distribution.

    Integrates the density under lambda = mid - half * cos(theta), which
    removes the square-root edge behaviour (and the 1/lambda pole at
    Q = 1), then applies Gauss-Legendre on [0, theta(x)].
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = band.lambda_minus, band.lambda_plus
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    const = band.q / (2.0 * math.pi * band.sigma2)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        if xi <= lo:
            out[i] = 0.0
            continue
        if xi >= hi:
            out[i] = 1.0
            continue
        top = math.acos((mid - xi) / half)
        theta = 0.5 * top * (gx + 1.0)
        integrand = const * half * half * np.sin(theta) ** 2 / (mid - half * np.cos(theta))
        out[i] = min(1.0, 0.5 * top * float(gw @ integrand))
    return float(out[0]) if scalar else out


def classify_modes(eig: EigenSystem, band: MPBand) -> ModeClasses:
    """Split mode indices by position relative to the band; edges count as noise."""
    below, noise, above = [], [], []
    for k, value in enumerate(eig.eigenvalues):
        if value > band.lambda_plus:
            above.append(k)
        elif value < band.lambda_minus:
            below.append(k)
        else:
            noise.append(k)
    return ModeClasses(tuple(below), tuple(noise), tuple(above))


def _unit(vector) -> np.ndarray:
    v = np.asarray(vector, dtype=float)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > NORM_TOL:
        raise DataError(f"vector norm {norm!r} is not 1")
    return v


def ipr(vector) -> float:
    """Inverse participation ratio: sum of fourth powers of a unit vector."""
    v = _unit(vector)
    return float(np.sum(v**4))


def participation_ratio(vector) -> float:
    """Effective number of contributing components, 1 / IPR."""
    return 1.0 / ipr(vector)


def market_fraction(eig: EigenSystem) -> float:
    """Share of the trace carried by the largest eigenvalue, lambda_max / N."""
    return eig.lambda_max / eig.n
