"""Index of net migration impact and clustering in (C, R) space.

C is a country's CMI slope over a benchmark average slope; R is its mean
MEI over the benchmark average MEI. Their product is the INMI, 1 meaning
benchmark-average redistributive impact.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.metrics import adjusted_rand_score, silhouette_score

from .errors import ValidationError

MAX_ITER = 300


@dataclass(frozen=True)
class CountrySummary:
    label: str
    cmi_slope: float
    mean_mei: float

    def __post_init__(self):
        if not 0.0 <= self.mean_mei <= 100.0:
            raise ValidationError(f"{self.label}: mean MEI {self.mean_mei} outside [0, 100]", rule="mei-range")


@dataclass(frozen=True)
class Benchmark:
    avg_cmi_slope: float
    avg_mei: float
    sample_size: int = 0
    note: str = ""

    def __post_init__(self):
        if not self.avg_cmi_slope > 0:
            raise ValidationError("benchmark avg_cmi_slope must be > 0", rule="benchmark-slope>0")
        if not 0.0 < self.avg_mei <= 100.0:
            raise ValidationError("benchmark avg_mei must be in (0, 100]", rule="benchmark-mei-range")

    @classmethod
    def from_json(cls, path) -> "Benchmark":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc.msg}", source=str(path), line=exc.lineno, rule="json") from None
        missing = [k for k in ("avg_cmi_slope", "avg_mei") if k not in d]
        if missing:
            raise ValidationError(f"missing keys {missing}", source=str(path), rule="schema")
        try:
            return cls(float(d["avg_cmi_slope"]), float(d["avg_mei"]), int(d.get("sample_size", 0)),
                       str(d.get("note", "")))
        except ValidationError as exc:
            raise ValidationError(exc.message, source=str(path), rule=exc.rule) from None

    def to_dict(self) -> dict:
        return {"avg_cmi_slope": self.avg_cmi_slope, "avg_mei": self.avg_mei,
                "sample_size": self.sample_size, "note": self.note}


@dataclass(frozen=True)
class INMIResult:
    c_ratio: float
    r_ratio: float
    inmi: float


def compute_inmi(summary: CountrySummary, benchmark: Benchmark) -> INMIResult:
    c = summary.cmi_slope / benchmark.avg_cmi_slope
    r = summary.mean_mei / benchmark.avg_mei
    if c < 0:
        raise ValidationError(f"{summary.label}: negative CMI slope gives a negative intensity ratio",
                              rule="slope>=0")
    return INMIResult(c, r, c * r)


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClusterResult:
    labels: tuple[str, ...]
    points: np.ndarray
    assignments: Mapping[str, int]
    centroids: np.ndarray
    inertia: float
    k: int
    seed: int
    restarts: int
    best_restart: int
    inertia_history: tuple[float, ...]

    def label_array(self) -> np.ndarray:
        return np.array([self.assignments[lab] for lab in self.labels])


def _canonical(points) -> tuple[tuple[str, ...], np.ndarray]:
    """Accepts a mapping label -> (C, R) or a sequence of (label, C, R); sorts by label."""
    if isinstance(points, Mapping):
        items = [(str(k), *map(float, v)) for k, v in points.items()]
    else:
        items = [(str(p[0]), float(p[1]), float(p[2])) for p in points]
    if not items:
        raise ValidationError("no points to cluster", rule="non-empty")
    items.sort(key=lambda t: t[0])
    labels = tuple(t[0] for t in items)
    if len(set(labels)) != len(labels):
        raise ValidationError("point labels must be unique", rule="unique-label")
    return labels, np.array([t[1:] for t in items], dtype=float)


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - c[None, :, :]) ** 2).sum(-1)


def _spread_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Distance-weighted seeding (k-means++)."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        d2 = np.minimum(d2, ((x - x[nxt]) ** 2).sum(1))
    return x[chosen].copy()


def _lloyd(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[float]]:
    assign = np.argmin(_sq_dists(x, centroids), axis=1)
    history: list[float] = []
    for _ in range(MAX_ITER):
        for g in range(centroids.shape[0]):
            members = assign == g
            if members.any():
                centroids[g] = x[members].mean(axis=0)
        history.append(float(((x - centroids[assign]) ** 2).sum()))
        new = np.argmin(_sq_dists(x, centroids), axis=1)
        if np.array_equal(new, assign):
            break
        assign = new
    return assign, centroids, history


def kmeans_cluster(points, k: int, restarts: int = 10, seed: int = 0) -> ClusterResult:
    """Best of ``restarts`` Lloyd runs; restart r draws from its own stream (seed, r).

    Points are put in label order first, so the result does not depend on
    input order. Ties in inertia go to the lowest restart index.
    """
    labels, x = _canonical(points)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}", rule="k-range")
    if restarts < 1:
        raise ValidationError("restarts must be >= 1", rule="restarts>=1")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), r]))
        assign, cents, hist = _lloyd(x, _spread_init(x, k, rng))
        inertia = float(((x - cents[assign]) ** 2).sum())
        if best is None or inertia < best[0]:
            best = (inertia, r, assign, cents, hist)
    inertia, r, assign, cents, hist = best
    return ClusterResult(
        labels=labels, points=x,
        assignments={lab: int(g) for lab, g in zip(labels, assign)},
        centroids=cents, inertia=inertia, k=k, seed=int(seed), restarts=restarts,
        best_restart=r, inertia_history=tuple(hist),
    )


@dataclass(frozen=True)
class KDiagnostics:
    k: int
    inertia: float
    silhouette: float | None


def evaluate_k(points, candidate_ks: Iterable[int], restarts: int = 10, seed: int = 0) -> dict[int, KDiagnostics]:
    """Inertia and mean silhouette per candidate k; choosing among them is left to the analyst."""
    out = {}
    for k in sorted(set(candidate_ks)):
        res = kmeans_cluster(points, k, restarts, seed)
        lab = res.label_array()
        n_used = np.unique(lab).size
        sil = None
        if 2 <= n_used <= len(lab) - 1:
            sil = float(silhouette_score(res.points, lab))
        out[k] = KDiagnostics(k, res.inertia, sil)
    return out


@dataclass(frozen=True)
class SeedStability:
    agreement: float
    degenerate: bool


def seed_stability(points, k: int, seeds: Sequence[int], restarts: int = 10) -> SeedStability:
    """Mean pairwise adjusted Rand index between clusterings from different seeds."""
    if len(seeds) < 2:
        raise ValidationError("need at least 2 seeds", rule="seeds>=2")
    _, x = _canonical(points)
    degenerate = np.unique(x, axis=0).shape[0] < 2
    if degenerate:
        return SeedStability(1.0, True)
    parts = [kmeans_cluster(points, k, restarts, s).label_array() for s in seeds]
    scores = [adjusted_rand_score(a, b) for a, b in combinations(parts, 2)]
    return SeedStability(float(np.mean(scores)), False)


def cluster_csv(result: ClusterResult, inmi: Mapping[str, float] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "C", "R", "inmi", "cluster"])
    for lab, (c, r) in zip(result.labels, result.points):
        v = inmi[lab] if inmi is not None else c * r
        w.writerow([lab, format(c, ".6g"), format(r, ".6g"), format(v, ".6g"), result.assignments[lab]])
    return buf.getvalue()


def load_summaries(path) -> list[CountrySummary]:
    """Read ``label,cmi_slope,mean_mei`` rows."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = ("label", "cmi_slope", "mean_mei")
        missing = [f for f in need if f not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"header lacks required columns {missing}", source=str(path), line=1,
                                  rule="schema")
        for row in reader:
            try:
                slope, mei = float(row["cmi_slope"]), float(row["mean_mei"])
            except ValueError:
                raise ValidationError("non-numeric value", source=str(path), line=reader.line_num,
                                      rule="numeric") from None
            if not (math.isfinite(slope) and math.isfinite(mei)):
                raise ValidationError("non-finite value", source=str(path), line=reader.line_num, rule="numeric")
            try:
                out.append(CountrySummary(row["label"], slope, mei))
            except ValidationError as exc:
                raise ValidationError(exc.message, source=str(path), line=reader.line_num, rule=exc.rule) from None
    return out
