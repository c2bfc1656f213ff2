"""Sliding-window eigen-analysis of a growth panel."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DataError
from .ingest import Panel, format_quarter, standardize_rows
from .rmt import correlation, eigen, eigensystem, ipr

SCOPES = ("window", "whole-sample")


@dataclass(frozen=True)
class WindowResult:
    start: int
    end: int
    lambda_max: float
    fraction: float
    ipr_top: float
    participation_top: float
    n: int
    t: int

    @property
    def percent(self) -> float:
        return 100.0 * self.fraction

    def as_row(self) -> dict:
        return {
            "start": format_quarter(self.start),
            "end": format_quarter(self.end),
            "lambda_max": self.lambda_max,
            "fraction": self.fraction,
            "percent": self.percent,
            "ipr_top": self.ipr_top,
            "participation_top": self.participation_top,
            "n": self.n,
            "t": self.t,
        }


class FractionSummary(NamedTuple):
    min: float
    mean: float
    max: float


def _window_result(panel: Panel, offset: int, window: int, scope: str) -> WindowResult:
    block = panel.data[:, offset : offset + window]
    if scope == "window":
        z = standardize_rows(block, panel.labels)
        eig = eigen(correlation(Panel(panel.labels, panel.start + offset, z, True)))
        fraction = eig.lambda_max / eig.n
    else:
        # rows already standardized over the full sample; the window matrix
        # has no unit diagonal, so the top share is taken against its trace
        eig = eigensystem(block @ block.T / window, panel.labels)
        fraction = eig.lambda_max / eig.trace
    top = eig.vector(0)
    top_ipr = ipr(top)
    return WindowResult(
        start=panel.start + offset,
        end=panel.start + offset + window - 1,
        lambda_max=eig.lambda_max,
        fraction=float(fraction),
        ipr_top=top_ipr,
        participation_top=1.0 / top_ipr,
        n=panel.n,
        t=window,
    )


def rolling_analysis(
    panel: Panel,
    window_quarters: int = 32,
    subset: Sequence[str] | None = None,
    scope: str = "window",
    workers: int | None = None,
) -> list[WindowResult]:
    """Top-eigenmode statistics for every window, stepping one quarter.

    With ``scope="window"`` (default) each window's rows are re-standardized
    on that window alone, so a window's result depends only on its own
    data. ``scope="whole-sample"`` standardizes once over the full panel.
    ``workers > 1`` evaluates windows on a thread pool; output order is
    always chronological.
    """
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    panel = panel.select(subset)
    window = int(window_quarters)
    if window < panel.n + 1:
        raise DataError(
            f"window of {window} quarters is too short for {panel.n} series (need at least {panel.n + 1})"
        )
    if window > panel.t:
        raise DataError(f"window of {window} quarters is longer than the sample ({panel.t})")
    if scope == "whole-sample":
        panel = Panel(panel.labels, panel.start, standardize_rows(panel.data, panel.labels), True)

    offsets = range(panel.t - window + 1)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda k: _window_result(panel, k, window, scope), offsets))
    return [_window_result(panel, k, window, scope) for k in offsets]


def summarize_fractions(results: Sequence[WindowResult]) -> FractionSummary:
    if not results:
        raise DataError("no window results to summarize")
    f = np.array([r.fraction for r in results])
    return FractionSummary(float(f.min()), float(f.mean()), float(f.max()))
