"""Batch command-line interface.

Every command reads a quarterly-levels CSV, runs one analysis and writes
plot-ready CSV or JSON (Newick is also available for trees). Exit codes:
0 success, 1 a check reported failure, 2 input error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import synthetic
from .cluster import agglomerate, correlation_distance, dissimilarity_rows
from .errors import ConvergenceError, DataError
from .ingest import GROWTH_METHODS, QuarterlySeries, build_panel, format_quarter, read_growth_csv, to_csv
from .rmt import classify_modes, correlation, eigen, ipr, market_fraction, mp_band
from .rolling import SCOPES, rolling_analysis, summarize_fractions
from .reproduce import reproduce
from .stats import ks_two_sample, mp_monte_carlo

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_CONVERGENCE = 3

METRICS = ("rows-euclidean", "correlation-distance")
FORMATS = ("csv", "json")
MPCHECK_THRESHOLDS = {"outside_fraction": 0.02, "cdf_discrepancy": 0.03}


@dataclass
class RunConfig:
    input: Path | None = None
    countries: list[str] | None = None
    window: int = 32
    growth: str = "yoy-percent"
    standardize: str = "window"
    metric: str = "rows-euclidean"
    format: str = "json"
    seed: int = 0
    output: Path | None = None

    def __post_init__(self):
        if self.growth not in GROWTH_METHODS:
            raise DataError(f"unknown growth method {self.growth!r}")
        if self.standardize not in SCOPES:
            raise DataError(f"unknown standardization scope {self.standardize!r}")
        if self.metric not in METRICS:
            raise DataError(f"unknown metric {self.metric!r}")
        if self.countries is not None and self.window < len(self.countries) + 1:
            raise DataError(
                f"window {self.window} must be at least the number of countries + 1 ({len(self.countries) + 1})"
            )


def load_growth(config: RunConfig) -> list[QuarterlySeries]:
    if config.input is None:
        raise DataError("--input is required")
    return read_growth_csv(config.input, config.growth)


def _panel(config: RunConfig, countries=None, standardize=True):
    return build_panel(load_growth(config), countries or config.countries, standardize=standardize)


def _band_dict(band) -> dict:
    return {
        "q": band.q,
        "sigma2": band.sigma2,
        "lambda_minus": band.lambda_minus,
        "lambda_plus": band.lambda_plus,
    }


# ------------------------------------------------------------------ commands


def cmd_spectrum(config: RunConfig) -> dict:
    panel = _panel(config)
    eig = eigen(correlation(panel))
    band = mp_band(panel.n, panel.t)
    classes = classify_modes(eig, band)
    kind = {k: name for name, idx in classes._asdict().items() for k in idx}
    modes = []
    for k, value in enumerate(eig.eigenvalues):
        vec = eig.vector(k)
        i = ipr(vec)
        modes.append(
            {
                "mode": k,
                "eigenvalue": float(value),
                "class": kind[k],
                "fraction": float(value) / panel.n,
                "percent": 100.0 * float(value) / panel.n,
                "ipr": i,
                "participation_ratio": 1.0 / i,
                "components": dict(zip(panel.labels, map(float, vec))),
            }
        )
    fraction = market_fraction(eig)
    return {
        "command": "spectrum",
        "labels": list(panel.labels),
        "n": panel.n,
        "t": panel.t,
        "start": format_quarter(panel.start),
        "end": format_quarter(panel.end),
        "growth": config.growth,
        "trace": eig.trace,
        "eigenvalues": [float(x) for x in eig.eigenvalues],
        "band": _band_dict(band),
        "above_band": len(classes.above),
        "below_band": len(classes.below),
        "market_fraction": fraction,
        "market_percent": 100.0 * fraction,
        "modes": modes,
    }


def _rolling(config: RunConfig, countries=None) -> tuple[list, object]:
    panel = _panel(config, countries, standardize=False)
    results = rolling_analysis(panel, config.window, scope=config.standardize)
    return results, panel


def cmd_rolling(config: RunConfig) -> dict:
    results, panel = _rolling(config)
    summary = summarize_fractions(results)
    return {
        "command": "rolling",
        "labels": list(panel.labels),
        "window": config.window,
        "standardize": config.standardize,
        "growth": config.growth,
        "count": len(results),
        "windows": [r.as_row() for r in results],
        "summary": {
            "min": summary.min,
            "mean": summary.mean,
            "max": summary.max,
            "min_percent": 100.0 * summary.min,
            "mean_percent": 100.0 * summary.mean,
            "max_percent": 100.0 * summary.max,
        },
    }


def cmd_cluster(config: RunConfig) -> dict:
    panel = _panel(config)
    corr = correlation(panel)
    d = dissimilarity_rows(corr) if config.metric == "rows-euclidean" else correlation_distance(corr)
    dend = agglomerate(d, panel.labels)
    return {
        "command": "cluster",
        "labels": list(panel.labels),
        "metric": config.metric,
        "linkage": "average",
        "dendrogram": dend.to_dict(),
    }


def cmd_compare(config: RunConfig, subset_a: Sequence[str] | None, subset_b: Sequence[str] | None) -> dict:
    out = {"command": "compare", "window": config.window, "standardize": config.standardize}
    series = {}
    for key, subset in (("a", subset_a), ("b", subset_b)):
        results, panel = _rolling(config, subset)
        s = summarize_fractions(results)
        series[key] = [r.fraction for r in results]
        out[key] = {
            "labels": list(panel.labels),
            "count": len(results),
            "summary": {"min": s.min, "mean": s.mean, "max": s.max},
            "fractions": series[key],
        }
    ks = ks_two_sample(series["a"], series["b"])
    out["ks"] = {"d_statistic": ks.d_statistic, "p_value": ks.p_value, "n1": ks.n1, "n2": ks.n2}
    out["note"] = "overlapping windows are serially dependent; the KS p-value treats them as independent draws"
    return out


def cmd_mpcheck(config: RunConfig, n: int, t: int, trials: int, bins: int = 50) -> dict:
    if trials < 1:
        raise DataError("--trials must be >= 1")
    if t < n:
        raise DataError(f"--t ({t}) must be >= --n ({n})")
    result = mp_monte_carlo(n, t, trials, config.seed, bins=bins)
    passed = (
        result.outside_fraction < MPCHECK_THRESHOLDS["outside_fraction"]
        and result.cdf_discrepancy < MPCHECK_THRESHOLDS["cdf_discrepancy"]
    )
    return {
        "command": "mpcheck",
        "n": n,
        "t": t,
        "trials": trials,
        "seed": config.seed,
        "band": _band_dict(result.band),
        "outside_fraction": result.outside_fraction,
        "cdf_discrepancy": result.cdf_discrepancy,
        "thresholds": dict(MPCHECK_THRESHOLDS),
        "pass": bool(passed),
        "histogram": result.density_table(),
    }


# ------------------------------------------------------------------- writers


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    command = report["command"]
    if command == "spectrum":
        labels = report["labels"]
        band = report["band"]
        header = ["mode", "eigenvalue", "class", "fraction", "percent", "ipr", "participation_ratio",
                  "lambda_minus", "lambda_plus"] + labels
        rows = [
            [m["mode"], m["eigenvalue"], m["class"], m["fraction"], m["percent"], m["ipr"],
             m["participation_ratio"], band["lambda_minus"], band["lambda_plus"]]
            + [m["components"][x] for x in labels]
            for m in report["modes"]
        ]
        return _csv_text(header, rows)
    if command == "rolling":
        header = list(report["windows"][0].keys())
        return _csv_text(header, [list(w.values()) for w in report["windows"]])
    if command == "cluster":
        header = ["node", "left", "right", "height", "size", "members"]
        rows = [
            [m["node"], m["left"], m["right"], m["height"], m["size"], ";".join(m["members"])]
            for m in report["dendrogram"]["merges"]
        ]
        return _csv_text(header, rows)
    if command == "compare":
        a, b, ks = report["a"], report["b"], report["ks"]
        header = ["subset_a", "subset_b", "n1", "n2", "d_statistic", "p_value",
                  "a_min", "a_mean", "a_max", "b_min", "b_mean", "b_max"]
        row = [";".join(a["labels"]), ";".join(b["labels"]), ks["n1"], ks["n2"], ks["d_statistic"],
               ks["p_value"], a["summary"]["min"], a["summary"]["mean"], a["summary"]["max"],
               b["summary"]["min"], b["summary"]["mean"], b["summary"]["max"]]
        return _csv_text(header, [row])
    if command == "mpcheck":
        table = report["histogram"]
        return _csv_text(list(table[0].keys()), [list(r.values()) for r in table])
    if command == "reproduce":
        rows = [[r["quantity"], r["published"], r["recomputed"], r["note"]] for r in report["rows"]]
        rows += [[c["check"], "", "pass" if c["pass"] else "fail", c["detail"]] for c in report["checks"]]
        return _csv_text(["quantity", "published", "recomputed", "note"], rows)
    raise ValueError(f"no CSV layout for {command!r}")


def _summary_line(report: dict) -> str | None:
    command = report["command"]
    if command == "rolling":
        s = report["summary"]
        return f"{report['count']} windows; fraction min {s['min']:.4f} mean {s['mean']:.4f} max {s['max']:.4f}"
    if command == "mpcheck":
        return (
            f"outside-band fraction {report['outside_fraction']:.5f}, "
            f"CDF discrepancy {report['cdf_discrepancy']:.5f}: {'PASS' if report['pass'] else 'FAIL'}"
        )
    if command == "compare":
        ks = report["ks"]
        return f"KS D = {ks['d_statistic']:.4f}, p = {ks['p_value']:.4g}"
    if command == "spectrum":
        return (
            f"{report['above_band']} mode(s) above the noise band; "
            f"market fraction {report['market_fraction']:.4f}"
        )
    return None


def _write(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------- argv


def _labels(text: str | None) -> list[str] | None:
    if text is None:
        return None
    labels = [x.strip() for x in text.split(",") if x.strip()]
    return labels or None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, help="CSV of quarterly levels (first column YYYYQn)")
    common.add_argument("--countries", help="comma-separated labels (default: all columns)")
    common.add_argument("--window", type=int, default=32, help="rolling window in quarters (default 32)")
    common.add_argument("--growth", choices=sorted(GROWTH_METHODS), default="yoy-percent")
    common.add_argument("--standardize", choices=SCOPES, default="window",
                        help="rolling standardization scope (default: each window separately)")
    common.add_argument("--metric", choices=METRICS, default="rows-euclidean")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", type=Path, help="output file (default stdout)")

    parser = argparse.ArgumentParser(
        prog="cyclesync", description="Random-matrix analysis of business-cycle synchronisation."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="full-sample eigen report")
    sub.add_parser("rolling", parents=[common], help="rolling-window top-eigenvalue series")
    p = sub.add_parser("cluster", parents=[common], help="average-linkage dendrogram")
    p.add_argument("--newick", action="store_true", help="write only the Newick string")
    p = sub.add_parser("compare", parents=[common], help="KS test between two subsets' rolling fractions")
    p.add_argument("--against", required=True, help="comma-separated labels of the second subset")
    p = sub.add_parser("mpcheck", parents=[common], help="Monte Carlo check of the Marchenko-Pastur law")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--t", type=int, default=1000)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--bins", type=int, default=50)
    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic levels CSV")
    p.add_argument("--kind", choices=sorted(synthetic.KINDS), default="eu8")
    p = sub.add_parser("reproduce", parents=[common],
                       help="recompute the published EU8 numbers from a user-supplied levels CSV")
    p.add_argument("--us", default="US", help="label of the United States column")
    p.add_argument("--uk", default="UK", help="label of the United Kingdom column")
    p.add_argument("--germany", default="DE", help="label of the German column")
    p.add_argument("--first-pair", default="FR,BE", help="labels expected to merge first")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        input=args.input,
        countries=_labels(args.countries),
        window=args.window,
        growth=args.growth,
        standardize=args.standardize,
        metric=args.metric,
        format=args.format,
        seed=args.seed,
        output=args.output,
    )
    status = EXIT_OK
    if args.command == "synth":
        _write(to_csv(synthetic.KINDS[args.kind](seed=args.seed)), config.output)
        return EXIT_OK
    if args.command == "spectrum":
        report = cmd_spectrum(config)
    elif args.command == "rolling":
        report = cmd_rolling(config)
    elif args.command == "cluster":
        report = cmd_cluster(config)
        if args.newick:
            _write(report["dendrogram"]["newick"] + "\n", config.output)
            return EXIT_OK
    elif args.command == "compare":
        report = cmd_compare(config, config.countries, _labels(args.against))
    elif args.command == "mpcheck":
        report = cmd_mpcheck(config, args.n, args.t, args.trials, args.bins)
        status = EXIT_OK if report["pass"] else EXIT_CHECK_FAILED
    elif args.command == "reproduce":
        report = reproduce(config, us=args.us, uk=args.uk, germany=args.germany,
                           first_pair=_labels(args.first_pair))
        status = EXIT_OK if all(c["pass"] for c in report["checks"]) else EXIT_CHECK_FAILED
    else:  # pragma: no cover - argparse restricts choices
        raise AssertionError(args.command)

    _write(render(report, config.format), config.output)
    line = _summary_line(report)
    if line:
        print(line, file=sys.stderr)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    try:
        return run(argv)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
