"""Assemble the analysis report and write its data and plot-script files.

Everything written here is a pure function of the input series and the
configuration: no timestamps, no absolute paths, floats rendered with
``repr`` and keys in a fixed order, so identical runs give identical
bytes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

from . import __version__
from .boxcox import BoxCoxParams, LambdaSearchConfig, OptimalLambda, optimize_lambda, transform_series
from .model_fit import (
    DEFAULT_BINS,
    GaussianFit,
    Histogram,
    build_histogram,
    fit_gaussian_least_squares,
    fit_gaussian_moments,
)
from .stats_core import MomentSummary, Series, moment_summary, pearson

__all__ = [
    "SCHEMA_VERSION",
    "REPORT_NAME",
    "ColumnAnalysis",
    "AnalysisReport",
    "analyze_column",
    "build_report",
    "emit_plot_scripts",
    "write_outputs",
]

SCHEMA_VERSION = "1.0"
REPORT_NAME = "report.json"


@dataclass(frozen=True)
class ColumnAnalysis:
    name: str
    raw: Series
    transformed: Series
    summary_raw: MomentSummary
    summary_transformed: MomentSummary
    optimum: OptimalLambda
    hist_raw: Histogram
    hist_transformed: Histogram
    fit_moments: GaussianFit
    fit_least_squares: GaussianFit

    def as_dict(self, files: Mapping[str, str]) -> dict:
        return {
            "n": self.summary_raw.n,
            "moment_summary_raw": self.summary_raw.as_dict(),
            "optimal_lambda": self.optimum.as_dict(),
            "moment_summary_transformed": self.summary_transformed.as_dict(),
            "gaussian_fits": {
                "bins": int(self.hist_transformed.counts.size),
                "moments": self.fit_moments.as_dict(),
                "least_squares": self.fit_least_squares.as_dict(),
            },
            "files": dict(files),
        }


@dataclass(frozen=True)
class AnalysisReport:
    columns: dict[str, ColumnAnalysis]
    config: LambdaSearchConfig
    bins: int
    provenance: dict[str, Any]
    pearson_raw: float | None = None
    pearson_transformed: float | None = None
    pair: tuple[str, str] | None = None
    files: dict[str, dict[str, str]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "columns": {
                name: col.as_dict(self.files.get(name, {})) for name, col in self.columns.items()
            },
            "pairwise": None,
            "provenance": {
                **self.provenance,
                "config": {**self.config.as_dict(), "bins": self.bins},
                "tool_version": __version__,
            },
            "artifacts": sorted({p for group in self.files.values() for p in group.values()}),
        }
        if self.pair is not None:
            out["pairwise"] = {
                "x": self.pair[0],
                "y": self.pair[1],
                "pearson_raw": self.pearson_raw,
                "pearson_transformed": self.pearson_transformed,
                "files": dict(self.files.get("pairwise", {})),
            }
        return out


def analyze_column(s: Series, cfg: LambdaSearchConfig, bins: int = DEFAULT_BINS) -> ColumnAnalysis:
    opt = optimize_lambda(s, cfg)
    t = transform_series(s, BoxCoxParams(opt.lmbda, cfg.shift))
    h_t = build_histogram(t, bins)
    fm = fit_gaussian_moments(t, hist=h_t)
    return ColumnAnalysis(
        name=s.label,
        raw=s,
        transformed=t,
        summary_raw=moment_summary(s),
        summary_transformed=moment_summary(t),
        optimum=opt,
        hist_raw=build_histogram(s, bins),
        hist_transformed=h_t,
        fit_moments=fm,
        fit_least_squares=fit_gaussian_least_squares(h_t, fm),
    )


def build_report(
    series: Mapping[str, Series],
    cfg: LambdaSearchConfig,
    bins: int = DEFAULT_BINS,
    provenance: Mapping[str, Any] | None = None,
) -> AnalysisReport:
    """Analyse each series; correlate the first two if there are two."""
    cols = {name: analyze_column(Series(s.values, label=name), cfg, bins) for name, s in series.items()}
    names = list(cols)
    kw: dict[str, Any] = {}
    if len(names) >= 2:
        a, b = cols[names[0]], cols[names[1]]
        kw = {
            "pair": (names[0], names[1]),
            "pearson_raw": pearson(a.raw, b.raw),
            "pearson_transformed": pearson(a.transformed, b.transformed),
        }
    return AnalysisReport(columns=cols, config=cfg, bins=bins, provenance=dict(provenance or {}), **kw)


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


def _write_table(path: Path, header: list[str], rows) -> None:
    lines = ["# " + "\t".join(header)]
    lines.extend("\t".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _hist_rows(h: Histogram):
    e, d, c = h.bin_edges.tolist(), h.densities.tolist(), h.counts.tolist()
    for i in range(len(d)):
        yield e[i], e[i + 1], 0.5 * (e[i] + e[i + 1]), d[i], int(c[i])


def _write_data(report: AnalysisReport, out: Path) -> dict[str, dict[str, str]]:
    files: dict[str, dict[str, str]] = {}
    hist_header = ["left", "right", "center", "density", "count"]
    for name, col in report.columns.items():
        entry = {
            "hist_raw": f"hist_raw_{name}.dat",
            "kurtosis_curve": f"curve_{name}.dat",
            "hist_transformed": f"hist_bc_{name}.dat",
        }
        _write_table(out / entry["hist_raw"], hist_header, _hist_rows(col.hist_raw))
        _write_table(
            out / entry["kurtosis_curve"],
            ["lambda", "kurtosis", "objective"],
            ((p.lmbda, p.kurtosis, p.objective) for p in col.optimum.trace),
        )
        _write_table(out / entry["hist_transformed"], hist_header, _hist_rows(col.hist_transformed))
        files[name] = entry
    if report.pair is not None:
        a, b = (report.columns[k] for k in report.pair)
        entry = {"scatter_raw": "scatter_raw.dat", "scatter_transformed": "scatter_bc.dat"}
        _write_table(out / entry["scatter_raw"], list(report.pair), zip(a.raw, b.raw))
        _write_table(out / entry["scatter_transformed"], list(report.pair), zip(a.transformed, b.transformed))
        files["pairwise"] = entry
    return files


_PREAMBLE = "set terminal pngcairo size 900,600\nset key top right\n"


def _hist_script(report: AnalysisReport, files, kind: str, title: str, fits: bool) -> str:
    names = list(report.columns)
    lines = [_PREAMBLE.rstrip("\n"), f"set output '{kind}.png'"]
    lines.append(f"set multiplot layout 1,{len(names)}")
    lines.append("set style fill solid 0.5")
    for name in names:
        col = report.columns[name]
        lines.append(f"set title '{title}: {name}'")
        lines.append("set ylabel 'density'")
        plot = f"plot '{files[name][kind]}' using 3:4:($2-$1) with boxes title 'data'"
        if fits:
            fm, fl = col.fit_moments, col.fit_least_squares
            lines.append(f"mu_m_{name} = {fm.mu!r}; s2_m_{name} = {fm.sigma2!r}")
            lines.append(f"mu_l_{name} = {fl.mu!r}; s2_l_{name} = {fl.sigma2!r}")
            lines.append(f"set xlabel 'Box-Cox transformed {name} (lambda = {col.optimum.lmbda!r})'")
            plot += (
                f", exp(-(x-mu_m_{name})**2/(2*s2_m_{name}))/sqrt(2*pi*s2_m_{name}) lw 2 title 'normal (moments)'"
                f", exp(-(x-mu_l_{name})**2/(2*s2_l_{name}))/sqrt(2*pi*s2_l_{name}) lw 2 dt 2 title 'normal (least squares)'"
            )
        else:
            lines.append(f"set xlabel '{name}'")
        lines.append(plot)
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def _curve_script(report: AnalysisReport, files) -> str:
    lines = [_PREAMBLE.rstrip("\n"), "set output 'kurtosis_curve.png'"]
    lines.append("set xlabel 'lambda'")
    lines.append("set ylabel 'kurtosis'")
    lines.append("set arrow from graph 0, first 3 to graph 1, first 3 nohead dt 3")
    parts = []
    for name, col in report.columns.items():
        parts.append(f"'{files[name]['kurtosis_curve']}' using 1:2 with linespoints title '{name}'")
        lines.append(
            f"set label '{name}: lambda_c = {col.optimum.lmbda:.4f}' at first {col.optimum.lmbda!r}, "
            f"first {col.optimum.kurtosis_at_optimum!r} point pt 7"
        )
    lines.append("plot " + ", ".join(parts))
    return "\n".join(lines) + "\n"


def _scatter_script(report: AnalysisReport, files, kind: str) -> str:
    x, y = report.pair
    transformed = kind == "scatter_transformed"
    r = report.pearson_transformed if transformed else report.pearson_raw
    lines = [_PREAMBLE.rstrip("\n"), f"set output '{kind}.png'"]
    if transformed:
        lx, ly = (report.columns[k].optimum.lmbda for k in report.pair)
        lines.append(f"set xlabel 'Box-Cox {x} (lambda = {lx!r})'")
        lines.append(f"set ylabel 'Box-Cox {y} (lambda = {ly!r})'")
    else:
        lines.append(f"set xlabel '{x}'")
        lines.append(f"set ylabel '{y}'")
    lines.append(f"set title 'pearson r = {r:.4f}'")
    lines.append(f"plot '{files['pairwise'][kind]}' using 1:2 with dots notitle")
    return "\n".join(lines) + "\n"


def emit_plot_scripts(report: AnalysisReport, out_dir, files: Mapping[str, Mapping[str, str]] | None = None) -> list[str]:
    """Write one gnuplot script per figure family; return their relative paths.

    Scripts reference the data files by relative path, so they are run from
    inside ``out_dir``.  The scatter scripts are only written when the
    report has a column pair.
    """
    out = Path(out_dir)
    if files is None:
        files = _write_data(report, out)
    scripts = {
        "hist_raw.gp": _hist_script(report, files, "hist_raw", "raw distribution", fits=False),
        "kurtosis_curve.gp": _curve_script(report, files),
        "hist_transformed.gp": _hist_script(
            report, files, "hist_transformed", "after Box-Cox", fits=True
        ),
    }
    if report.pair is not None:
        scripts["scatter_raw.gp"] = _scatter_script(report, files, "scatter_raw")
        scripts["scatter_transformed.gp"] = _scatter_script(report, files, "scatter_transformed")
    for name, text in scripts.items():
        (out / name).write_text(text, encoding="utf-8")
    return list(scripts)


def write_outputs(report: AnalysisReport, out_dir) -> tuple[AnalysisReport, Path]:
    """Write data files, plot scripts and finally ``report.json``.

    The report is written last and atomically, so its presence means every
    other artifact was written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / REPORT_NAME
    if target.exists():
        target.unlink()
    files = _write_data(report, out)
    scripts = emit_plot_scripts(report, out, files)
    files = {**files, "scripts": {Path(s).stem: s for s in scripts}}
    report = replace(report, files=files)
    tmp = out / (REPORT_NAME + ".tmp")
    tmp.write_text(json.dumps(report.as_dict(), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    os.replace(tmp, target)
    return report, target
