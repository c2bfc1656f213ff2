"""Two-sample KS test, smoothed periodogram, and a Monte Carlo check of the
Marchenko-Pastur law."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError
from .ingest import standardize_rows
from .linalg import tridiagonal_eigvals
from .rmt import MPBand, mp_band, mp_cdf, mp_density
from .rng import standard_normal

# ---------------------------------------------------------------- KS test


@dataclass(frozen=True)
class KSResult:
    d_statistic: float
    p_value: float
    n1: int
    n2: int


def kolmogorov_sf(x: float, tol: float = 1e-12) -> float:
    """P(K > x) for the limiting Kolmogorov distribution.

    Uses 2 sum (-1)^(k-1) exp(-2 k^2 x^2) for x >= 1, where it converges
    in a few terms, and the equivalent theta-function form of the CDF
    below that.
    """
    if x <= 0.0:
        return 1.0
    if x < 1.0:
        c = math.pi**2 / (8.0 * x * x)
        cdf, k = 0.0, 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * c)
            cdf += term
            if term < tol:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / x * cdf))
    total, k = 0.0, 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> KSResult:
    """Two-sided two-sample Kolmogorov-Smirnov test (asymptotic p-value)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DataError("KS test needs two non-empty samples")
    points = np.concatenate([a, b])
    fa = np.searchsorted(a, points, side="right") / a.size
    fb = np.searchsorted(b, points, side="right") / b.size
    d = float(np.abs(fa - fb).max())
    ne = a.size * b.size / (a.size + b.size)
    return KSResult(d, kolmogorov_sf(d * math.sqrt(ne)), int(a.size), int(b.size))


# ------------------------------------------------------------ periodogram


@dataclass(frozen=True)
class SpectrumEstimate:
    """One-sided spectrum at Fourier frequencies k/T (cycles per observation).

    ``raw_power`` is the unsmoothed periodogram, ``power`` the smoothed one.
    ``dominant_period_range`` is a heuristic: the contiguous run of
    frequencies around the peak whose smoothed power is at least half the
    peak, converted to periods in years.
    """

    frequencies: np.ndarray
    power: np.ndarray
    raw_power: np.ndarray
    smoothing: str
    dominant_period_range: tuple[float, float]
    n_obs: int
    taper_scale: float = 1.0

    def total_power(self, raw: bool = True) -> float:
        """Integral of the spectrum over (-pi, pi] in angular frequency."""
        p = self.raw_power if raw else self.power
        weights = np.full(p.size, 2.0)
        if self.n_obs % 2 == 0:
            weights[-1] = 1.0  # Nyquist bin has no mirror image
        return float(np.sum(weights * p) * 2.0 * math.pi / self.n_obs)


def modified_daniell(span: int) -> np.ndarray:
    """Weights of a modified Daniell filter: flat with half-weight ends."""
    if span < 3 or span % 2 == 0:
        raise DataError(f"modified Daniell spans must be odd and >= 3, got {span}")
    m = span // 2
    w = np.full(span, 1.0 / (2 * m))
    w[0] = w[-1] = 1.0 / (4 * m)
    return w


def smoothing_kernel(spans: Sequence[int]) -> np.ndarray:
    kernel = np.array([1.0])
    for span in spans:
        kernel = np.convolve(kernel, modified_daniell(int(span)))
    return kernel


def _split_cosine_bell(t: int, proportion: float) -> np.ndarray:
    w = np.ones(t)
    m = int(math.floor(t * proportion))
    if m > 0:
        k = np.arange(1, 2 * m, 2)
        ramp = 0.5 * (1.0 - np.cos(math.pi * k / (2 * m)))
        w[:m] = ramp
        w[-m:] = ramp[::-1]
    return w


def periodogram(
    series: Sequence[float],
    detrend: bool = True,
    spans: Sequence[int] = (3, 3),
    taper: float = 0.0,
    per_year: int = 4,
) -> SpectrumEstimate:
    """Periodogram |DFT|^2 / (2 pi T scale), optionally smoothed.

    ``spans`` are applied as iterated modified Daniell filters, circularly
    over the full set of Fourier frequencies, with the zero-frequency
    ordinate replaced by the mean of its neighbours. ``taper`` is the
    split-cosine-bell proportion at each end; ``scale`` is the taper's mean
    squared weight (1 without tapering).
    """
    x = np.asarray(series, dtype=float)
    t = x.size
    if t < 16:
        raise DataError(f"periodogram needs at least 16 observations, got {t}")
    if not 0.0 <= taper <= 0.5:
        raise DataError("taper proportion must be in [0, 0.5]")
    kernel = smoothing_kernel(spans)
    if kernel.size > t:
        raise DataError("smoothing kernel is wider than the series")

    if detrend:
        time = np.arange(t, dtype=float)
        time -= time.mean()
        x = x - x.mean() - (time @ x) / (time @ time) * time
    else:
        x = x - x.mean()
    w = _split_cosine_bell(t, taper)
    scale = float(np.mean(w * w))
    full = np.abs(np.fft.fft(x * w)) ** 2 / (2.0 * math.pi * t * scale)

    smoothed = full.copy()
    smoothed[0] = 0.5 * (full[1] + full[-1])
    if kernel.size > 1:
        half = kernel.size // 2
        acc = np.zeros(t)
        for offset, weight in zip(range(-half, half + 1), kernel):
            acc += weight * np.roll(smoothed, -offset)
        smoothed = acc

    k = np.arange(1, t // 2 + 1)
    freqs = k / t
    power = smoothed[k]
    label = "raw" if kernel.size == 1 else "modified Daniell " + ",".join(str(int(s)) for s in spans)
    return SpectrumEstimate(
        frequencies=freqs,
        power=power,
        raw_power=full[k],
        smoothing=label,
        dominant_period_range=_dominant_periods(freqs, power, per_year),
        n_obs=t,
        taper_scale=scale,
    )


def _dominant_periods(freqs: np.ndarray, power: np.ndarray, per_year: int) -> tuple[float, float]:
    peak = int(np.argmax(power))
    threshold = 0.5 * power[peak]
    lo = peak
    while lo > 0 and power[lo - 1] >= threshold:
        lo -= 1
    hi = peak
    while hi < power.size - 1 and power[hi + 1] >= threshold:
        hi += 1
    return (1.0 / (freqs[hi] * per_year), 1.0 / (freqs[lo] * per_year))


# ----------------------------------------------------- MP Monte Carlo check


@dataclass(frozen=True)
class MonteCarloResult:
    n: int
    t: int
    trials: int
    seed: int
    band: MPBand
    eigenvalues: np.ndarray = field(repr=False)
    outside_fraction: float
    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    cdf_discrepancy: float

    def density_table(self) -> list[dict]:
        """Histogram density next to the theoretical density at bin centres."""
        widths = np.diff(self.bin_edges)
        empirical = self.counts / (self.eigenvalues.size * widths)
        centres = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        theory = mp_density(centres, self.band)
        return [
            {
                "lo": float(lo),
                "hi": float(hi),
                "count": int(c),
                "empirical_density": float(e),
                "mp_density": float(th),
            }
            for lo, hi, c, e, th in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts, empirical, theory)
        ]


def random_correlation_eigvals(n: int, t: int, seed: int) -> np.ndarray:
    """Eigenvalues of the correlation matrix of an n x t standard-normal draw."""
    x = standard_normal(seed, (n, t))
    z = standardize_rows(x)
    c = z @ z.T / t
    return tridiagonal_eigvals(0.5 * (c + c.T))


def mp_monte_carlo(
    n: int, t: int, trials: int, seed: int, bins: int = 50, workers: int | None = None
) -> MonteCarloResult:
    """Pool spectra of random correlation matrices and compare with the MP law.

    Trial ``k`` uses seed ``seed + k``. ``cdf_discrepancy`` is the largest
    gap between the pooled empirical CDF and the MP CDF over the histogram
    edges, which span the band.
    """
    if trials < 1:
        raise DataError("trials must be >= 1")
    if n < 2 or t < n:
        raise DataError(f"need t >= n >= 2, got n={n}, t={t}")
    band = mp_band(n, t)

    def one(k: int) -> np.ndarray:
        return random_correlation_eigvals(n, t, seed + k)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(one, range(trials)))
    else:
        spectra = [one(k) for k in range(trials)]
    values = np.sort(np.concatenate(spectra))
    outside = float(np.mean((values < band.lambda_minus) | (values > band.lambda_plus)))

    edges = np.linspace(band.lambda_minus, band.lambda_plus, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    empirical = np.searchsorted(values, edges, side="right") / values.size
    theory = mp_cdf(edges, band)
    gap = float(np.abs(empirical - theory).max())
    values.setflags(write=False)
    return MonteCarloResult(n, t, trials, seed, band, values, outside, edges, counts, gap)
