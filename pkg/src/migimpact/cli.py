"""Command-line entry point: ``migimpact <subcommand> [flags]``.

Exit codes: 0 success, 1 validation error, 2 usage error. Report files are
assembled in memory and only written once the whole computation succeeded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import aggregation, data, impact, indices, regression
from .errors import MigImpactError, ValidationError

DEFAULT_SEED = 20190101
FULL_MATRIX_REQUIRED = "an origin-destination matrix is required to estimate the INMI"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    zones: Path | None = None
    flows: Path | None = None
    marginals: Path | None = None
    adjacency: Path | None = None
    benchmark: Path | None = None
    summaries: Path | None = None
    year_flows: list[tuple[int, Path]] = field(default_factory=list)
    seed: int = DEFAULT_SEED
    min_n: int | None = None
    steps: int = aggregation.DEFAULT_STEPS
    samples: int = aggregation.DEFAULT_SAMPLES
    min_units: int = aggregation.DEFAULT_MIN_UNITS
    alpha: float = regression.DEFAULT_ALPHA
    variant: str = regression.ZSCORE
    k: int = 4
    restarts: int = 10
    candidate_ks: tuple[int, ...] = ()
    workers: int = 1
    label: str = ""
    year: int = 0
    interval: int = 1
    out: Path | None = None

    def check_paths(self) -> None:
        paths = {"--zones": self.zones, "--flows": self.flows, "--marginals": self.marginals,
                 "--adjacency": self.adjacency, "--benchmark": self.benchmark, "--summaries": self.summaries}
        paths.update({f"--year-flows {y}": p for y, p in self.year_flows})
        for flag, p in paths.items():
            if p is not None and not p.is_file():
                raise UsageError(f"{flag}: file not found: {p}")


def _year_flow(text: str) -> tuple[int, Path]:
    year, sep, path = text.partition("=")
    if not sep or not year.strip().lstrip("-").isdigit():
        raise argparse.ArgumentTypeError(f"expected YEAR=PATH, got {text!r}")
    return int(year), Path(path)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="migimpact", description="Redistributive impact of internal migration.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, flows=True):
        sp.add_argument("--zones", type=Path, required=True)
        if flows:
            g = sp.add_mutually_exclusive_group(required=True)
            g.add_argument("--flows", type=Path, help="origin,destination,count (or a marginals file)")
            g.add_argument("--marginals", type=Path, help="zone_id,inflow,outflow")
        sp.add_argument("--label", default="")
        sp.add_argument("--year", type=int, default=0)
        sp.add_argument("--interval", type=int, default=1, choices=(1, 5))
        sp.add_argument("--out", type=Path, help="directory for report files")

    def profile_flags(sp):
        sp.add_argument("--adjacency", type=Path, required=True)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--min-n", type=int, dest="min_n")
        sp.add_argument("--steps", type=int, default=aggregation.DEFAULT_STEPS)
        sp.add_argument("--samples", type=int, default=aggregation.DEFAULT_SAMPLES)
        sp.add_argument("--min-units", type=int, dest="min_units", default=aggregation.DEFAULT_MIN_UNITS)
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("validate", help="load inputs and report what was read")
    common(sp)
    sp.add_argument("--adjacency", type=Path)

    sp = sub.add_parser("indices", help="CMI, MEI, ANMR and zone net migration rates")
    common(sp)

    sp = sub.add_parser("regress", help="NMR on log density, regime and z-scores")
    common(sp)
    sp.add_argument("--alpha", type=float, default=regression.DEFAULT_ALPHA)
    sp.add_argument("--variant", choices=("raw", "zscore"), default=regression.ZSCORE)

    sp = sub.add_parser("profile", help="indices across random contiguous aggregations")
    common(sp)
    profile_flags(sp)

    sp = sub.add_parser("inmi", help="scale profile plus INMI against a benchmark")
    common(sp)
    profile_flags(sp)
    sp.add_argument("--benchmark", type=Path, required=True)

    sp = sub.add_parser("cluster", help="k-means over country summaries in (C, R) space")
    sp.add_argument("--summaries", type=Path, required=True, help="label,cmi_slope,mean_mei")
    sp.add_argument("--benchmark", type=Path, required=True)
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--restarts", type=int, default=10)
    sp.add_argument("--evaluate", type=_int_list, dest="candidate_ks", default=(),
                    help="comma-separated k values for diagnostics, e.g. 3,4,5")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--out", type=Path)

    sp = sub.add_parser("timeseries", help="density slopes year by year on one geography")
    sp.add_argument("--zones", type=Path, required=True)
    sp.add_argument("--year-flows", type=_year_flow, action="append", dest="year_flows", required=True,
                    metavar="YEAR=PATH")
    sp.add_argument("--alpha", type=float, default=regression.DEFAULT_ALPHA)
    sp.add_argument("--variant", choices=("raw", "zscore"), default=regression.ZSCORE)
    sp.add_argument("--label", default="")
    sp.add_argument("--interval", type=int, default=1, choices=(1, 5))
    sp.add_argument("--out", type=Path)
    return p


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    cfg = RunConfig(**{k: v for k, v in ns.items() if v is not None})
    for flag, v in (("--samples", cfg.samples), ("--steps", cfg.steps), ("--k", cfg.k),
                    ("--restarts", cfg.restarts), ("--workers", cfg.workers)):
        if v < 1:
            raise UsageError(f"{flag} must be >= 1")
    if not 0 < cfg.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    cfg.check_paths()
    return cfg


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# subcommands; each returns (stdout text, {filename: content})
# ---------------------------------------------------------------------------

def _load(cfg: RunConfig) -> data.MigrationSystem:
    flow_path = cfg.flows if cfg.flows is not None else cfg.marginals
    return data.load_system(cfg.zones, flow_path, cfg.interval,
                            marginals=True if cfg.marginals is not None else None,
                            label=cfg.label, year=cfg.year)


def _validate(cfg):
    system = _load(cfg)
    report = {
        "label": system.label,
        "year": system.year,
        "interval": system.interval,
        "n_zones": len(system.zones),
        "flow_variant": system.flows.kind,
        "m": system.migrants,
        "p": system.population,
        "diagonal_rows_dropped": system.diagonal_dropped,
    }
    if cfg.adjacency is not None:
        graph = data.load_adjacency(cfg.adjacency, system.zones)
        report["n_edges"] = graph.n_edges
        report["connected"] = True
    text = to_json(report)
    return text, {"validation.json": text}


def _indices(cfg):
    system = _load(cfg)
    text = to_json(indices.indices_report(system))
    return text, {"indices.json": text}


def _regress(cfg):
    system = _load(cfg)
    with warnings.catch_warnings(record=True):
        warnings.simplefilter("always")
        result = regression.density_regression(system, cfg.variant)
    text = to_json(regression.regression_report(result, cfg.alpha))
    files = {"regression.json": text}
    if "degenerate_spread" not in result.flags:
        files["zscores.csv"] = regression.zscore_table(indices.net_migration_rates(system)).to_csv()
    return text, files


def _require_matrix(system):
    if not system.has_matrix:
        raise ValidationError(FULL_MATRIX_REQUIRED + "; got marginals (inflow/outflow) only",
                              rule="full-matrix-required")


def _run_profile(cfg, system):
    graph = data.load_adjacency(cfg.adjacency, system.zones)
    base_n = len(system.zones)
    if cfg.min_n is None:
        ladder = aggregation.default_ladder(base_n, cfg.steps)
    else:
        ladder = aggregation.scale_ladder(base_n, cfg.min_n, cfg.steps)
    return aggregation.scale_profile(system, graph, ladder, cfg.samples, cfg.seed, workers=cfg.workers)


def _profile_summary(profile, min_units):
    fit = aggregation.fit_cmi_slope(profile) if len(profile.points) >= 2 else None
    return {
        "base_n": profile.base_n,
        "master_seed": profile.master_seed,
        "ladder": [p.n_units for p in profile.points],
        "samples_per_scale": profile.points[0].samples,
        "cmi_slope": None if fit is None else fit.slope,
        "cmi_intercept": None if fit is None else fit.intercept,
        "cmi_r_squared": None if fit is None else fit.r_squared,
        "min_units": min_units,
        "mean_mei": aggregation.mean_mei(profile, min_units),
    }


def _profile(cfg):
    system = _load(cfg)
    _require_matrix(system)
    profile = _run_profile(cfg, system)
    summary = to_json(_profile_summary(profile, cfg.min_units))
    return summary, {"profile.csv": profile.to_csv(), "profile_summary.json": summary}


def _inmi(cfg):
    system = _load(cfg)
    _require_matrix(system)
    bench = impact.Benchmark.from_json(cfg.benchmark)
    profile = _run_profile(cfg, system)
    fit = aggregation.fit_cmi_slope(profile)
    summary = impact.CountrySummary(system.label, fit.slope, aggregation.mean_mei(profile, cfg.min_units))
    res = impact.compute_inmi(summary, bench)
    text = to_json({
        "label": system.label,
        "cmi_slope": summary.cmi_slope,
        "cmi_r_squared": fit.r_squared,
        "mean_mei": summary.mean_mei,
        "C": res.c_ratio,
        "R": res.r_ratio,
        "inmi": res.inmi,
        "benchmark": bench.to_dict(),
        "master_seed": profile.master_seed,
    })
    return text, {"profile.csv": profile.to_csv(), "inmi.json": text}


def _cluster(cfg):
    bench = impact.Benchmark.from_json(cfg.benchmark)
    summaries = impact.load_summaries(cfg.summaries)
    results = {s.label: impact.compute_inmi(s, bench) for s in summaries}
    points = {lab: (r.c_ratio, r.r_ratio) for lab, r in results.items()}
    res = impact.kmeans_cluster(points, cfg.k, cfg.restarts, cfg.seed)
    files = {"clusters.csv": impact.cluster_csv(res, {lab: r.inmi for lab, r in results.items()})}
    report = {"k": res.k, "seed": res.seed, "restarts": res.restarts, "inertia": res.inertia,
              "centroids": res.centroids.tolist()}
    if cfg.candidate_ks:
        diag = impact.evaluate_k(points, cfg.candidate_ks, cfg.restarts, cfg.seed)
        lines = ["k,inertia,silhouette"]
        for k, d in diag.items():
            sil = "" if d.silhouette is None else format(d.silhouette, ".6g")
            lines.append(f"{k},{d.inertia:.6g},{sil}")
        files["k_diagnostics.csv"] = "\n".join(lines) + "\n"
        report["diagnostics"] = [{"k": d.k, "inertia": d.inertia, "silhouette": d.silhouette}
                                 for d in diag.values()]
    text = to_json(report)
    files["cluster_summary.json"] = text
    return text, files


def _timeseries(cfg):
    zones = data.load_zones(cfg.zones)
    systems = []
    for year, path in cfg.year_flows:
        flows, dropped = data.load_flow_matrix(path, zones) if data.sniff_flow_kind(path) == data.FULL_MATRIX \
            else (data.load_marginals(path, zones), 0)
        systems.append(data.MigrationSystem(zones, flows, label=cfg.label, year=year, interval=cfg.interval,
                                            diagonal_dropped=dropped))
    fits = regression.time_series_slopes(systems, cfg.variant, cfg.alpha)
    text = regression.time_series_csv(fits)
    return text, {"timeseries.csv": text}


COMMANDS = {
    "validate": _validate,
    "indices": _indices,
    "regress": _regress,
    "profile": _profile,
    "inmi": _inmi,
    "cluster": _cluster,
    "timeseries": _timeseries,
}


def run(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        text, files = COMMANDS[cfg.subcommand](cfg)
    except (MigImpactError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg.out is not None:
        os.makedirs(cfg.out, exist_ok=True)
        for name, content in files.items():
            with open(cfg.out / name, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
    sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
