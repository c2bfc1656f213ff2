"""Side-by-side report of published EU8 figures against a recomputation.

The published values come from an older data vintage with locally estimated
Italian quarters, so exact agreement is not expected; only the qualitative
checks at the end are pass/fail.
"""

from __future__ import annotations

from typing import Sequence

from .cluster import agglomerate, dissimilarity_rows, merge_order
from .errors import DataError
from .ingest import build_panel, format_quarter, read_growth_csv
from .rmt import correlation, eigen, mp_band, participation_ratio
from .rolling import rolling_analysis, summarize_fractions
from .stats import ks_two_sample, periodogram

PUBLISHED = {
    "eigenvalue_range": (0.19, 4.33),
    "noise_band": (0.53, 1.61),
    "top_participation": 7.15,
    "component_us": 0.23,
    "component_uk": 0.27,
    "component_others": (0.32, 0.40),
    "window_count": 77,
    "summary_all": (0.38, 0.60, 0.77),
    "summary_ex_us": (0.43, 0.65, 0.81),
    "summary_ex_us_uk": (0.44, 0.70, 0.85),
    "ks_p_us": 0.00,
    "ks_p_uk": 0.00,
    "period_years_us": (4.0, 9.0),
    "period_years_uk": (7.0, 12.0),
    "period_years_de": (6.0, 12.0),
}


def _fmt(value) -> str:
    if isinstance(value, (tuple, list)):
        return " / ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def _dominates(x, y) -> bool:
    return all(a > b for a, b in zip(x, y))


def reproduce(
    config,
    us: str = "US",
    uk: str = "UK",
    germany: str = "DE",
    first_pair: Sequence[str] | None = ("FR", "BE"),
) -> dict:
    """Recompute every published number for the eight-country panel.

    ``config`` needs ``input``, ``countries``, ``growth``, ``window`` and
    ``standardize`` attributes (a cli.RunConfig).
    """
    growth = read_growth_csv(config.input, config.growth)
    labels = config.countries or [s.label for s in growth]
    for name in (us, uk):
        if name not in labels:
            raise DataError(f"label {name!r} not among {', '.join(labels)}")
    ex_us = [x for x in labels if x != us]
    ex_us_uk = [x for x in ex_us if x != uk]

    panel = build_panel(growth, labels)
    eig = eigen(correlation(panel))
    band = mp_band(panel.n, panel.t)
    top = dict(zip(panel.labels, eig.vector(0)))
    others = [v for k, v in top.items() if k not in (us, uk)]

    raw = build_panel(growth, labels, standardize=False)
    runs = {}
    for key, subset in (("all", labels), ("ex_us", ex_us), ("ex_us_uk", ex_us_uk)):
        runs[key] = rolling_analysis(raw, config.window, subset=subset, scope=config.standardize)
    summaries = {k: tuple(summarize_fractions(v)) for k, v in runs.items()}
    ks_us = ks_two_sample([r.fraction for r in runs["all"]], [r.fraction for r in runs["ex_us"]])
    ks_uk = ks_two_sample([r.fraction for r in runs["ex_us"]], [r.fraction for r in runs["ex_us_uk"]])

    dend = agglomerate(dissimilarity_rows(correlation(panel)), panel.labels)
    order = merge_order(dend)
    last = dend.merges[-1]
    last_children = [sorted(dend.leaves[i] for i in dend.members(c)) for c in (last.left, last.right)]

    periods = {}
    for key, name in (("us", us), ("uk", uk), ("de", germany)):
        if name in panel.labels:
            row = raw.data[raw.labels.index(name)]
            periods[key] = periodogram(row).dominant_period_range

    rows = [
        ("eigenvalue range", PUBLISHED["eigenvalue_range"], (float(eig.eigenvalues[-1]), eig.lambda_max), ""),
        ("noise band", PUBLISHED["noise_band"], (band.lambda_minus, band.lambda_plus), f"Q = {band.q:.3f}"),
        ("top-mode participation ratio", PUBLISHED["top_participation"], participation_ratio(eig.vector(0)),
         "published under the name IPR; matches 1/IPR"),
        ("top-mode component, US", PUBLISHED["component_us"], float(top[us]), ""),
        ("top-mode component, UK", PUBLISHED["component_uk"], float(top[uk]), ""),
        ("top-mode components, others", PUBLISHED["component_others"], (float(min(others)), float(max(others))), ""),
        ("window count", PUBLISHED["window_count"], len(runs["all"]),
         "published count is one short of its own first/last windows"),
        ("fraction min/mean/max, all", PUBLISHED["summary_all"], summaries["all"], ""),
        ("fraction min/mean/max, ex US", PUBLISHED["summary_ex_us"], summaries["ex_us"], ""),
        ("fraction min/mean/max, ex US and UK", PUBLISHED["summary_ex_us_uk"], summaries["ex_us_uk"], ""),
        ("KS p, all vs ex US", PUBLISHED["ks_p_us"], ks_us.p_value, f"D = {ks_us.d_statistic:.3f}"),
        ("KS p, ex US vs ex US and UK", PUBLISHED["ks_p_uk"], ks_uk.p_value, f"D = {ks_uk.d_statistic:.3f}"),
        ("first merge", "France, Belgium", ", ".join(sorted(order[0][0])), f"height {order[0][1]:.3f}"),
        ("last merge", "US and UK cluster joins last", " | ".join(",".join(c) for c in last_children), ""),
    ]
    for key, label in (("us", "US"), ("uk", "UK"), ("de", "Germany")):
        if key in periods:
            rows.append((f"dominant period (years), {label}", PUBLISHED[f"period_years_{key}"], periods[key],
                         "half-peak band of the smoothed periodogram (heuristic)"))

    smallest_two = sorted(top, key=lambda k: top[k])[:2]
    checks = [
        ("US and UK carry the two smallest top-mode components", set(smallest_two) == {us, uk},
         f"smallest: {', '.join(smallest_two)}"),
        ("ex-UK summary dominates with-UK summary", _dominates(summaries["ex_us_uk"], summaries["ex_us"]),
         f"{_fmt(summaries['ex_us_uk'])} vs {_fmt(summaries['ex_us'])}"),
        ("ex-US summary dominates with-US summary", _dominates(summaries["ex_us"], summaries["all"]),
         f"{_fmt(summaries['ex_us'])} vs {_fmt(summaries['all'])}"),
        ("KS all vs ex US: p < 0.05", ks_us.p_value < 0.05, f"p = {ks_us.p_value:.3g}"),
        ("KS ex US vs ex US and UK: p < 0.05", ks_uk.p_value < 0.05, f"p = {ks_uk.p_value:.3g}"),
    ]
    if first_pair:
        checks.append(("first merge is the expected pair", order[0][0] == frozenset(first_pair),
                       ", ".join(sorted(order[0][0]))))
    return {
        "command": "reproduce",
        "labels": list(panel.labels),
        "sample": [format_quarter(panel.start), format_quarter(panel.end)],
        "rows": [
            {
                "quantity": q,
                "published": _fmt(p),
                "recomputed": _fmt(r),
                "note": note,
            }
            for q, p, r, note in rows
        ],
        "checks": [{"check": c, "pass": bool(ok), "detail": d} for c, ok, d in checks],
    }
