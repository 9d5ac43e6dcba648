"""Random contiguous aggregation of zones and the scale profiles built on it.

A base geography is merged into ``n`` connected pseudo-regions many times at
each of several scales; the migration indices of each aggregated system are
summarised per scale. From that profile come the slope of CMI against
log10(number of units) and the mean MEI across scales.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import AdjacencyGraph, FullMatrix, MigrationSystem, Zone, ZoneSet
from .errors import ValidationError
from .indices import system_indices

DEFAULT_SAMPLES = 30
DEFAULT_STEPS = 8
DEFAULT_MIN_UNITS = 20
PROFILE_FIELDS = ("n_units", "samples", "mean_cmi", "sd_cmi", "mean_mei", "sd_mei", "mean_anmr")


@dataclass(frozen=True, eq=False)
class Partition:
    assignment: np.ndarray
    target_count: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        if a.size and (a.min() < 0 or a.max() >= self.target_count):
            raise ValidationError("group index out of range", rule="partition")
        if np.unique(a).size != self.target_count:
            raise ValidationError("every group must be non-empty", rule="partition")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Partition)
            and self.target_count == other.target_count
            and np.array_equal(self.assignment, other.assignment)
        )

    __hash__ = None

    def groups(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.target_count)]
        for pos, g in enumerate(self.assignment):
            out[g].append(pos)
        return out

    def is_contiguous(self, graph: AdjacencyGraph) -> bool:
        a = self.assignment
        for members in self.groups():
            start = members[0]
            seen = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for v in graph.neighbors[u]:
                    if a[v] == a[start] and v not in seen:
                        seen.add(v)
                        stack.append(v)
            if len(seen) != len(members):
                return False
        return True


def identity_partition(n: int) -> Partition:
    return Partition(np.arange(n), n)


def random_contiguous_partition(graph: AdjacencyGraph, target_count: int, seed) -> Partition:
    """Seeded region growing.

    ``target_count`` distinct seed zones are drawn uniformly; then, until every
    zone is assigned, one frontier edge (assigned zone, unassigned neighbour)
    is chosen uniformly and the neighbour joins that zone's group. ``seed`` is
    anything ``numpy.random.default_rng`` accepts.
    """
    n = len(graph)
    if not 2 <= target_count <= n:
        raise ValidationError(f"target_count must be in [2, {n}], got {target_count}", rule="target-range")
    rng = np.random.default_rng(seed)
    assignment = np.full(n, -1, dtype=np.int64)
    seeds = rng.choice(n, size=target_count, replace=False)
    frontier: list[tuple[int, int]] = []
    for g, s in enumerate(seeds):
        assignment[s] = g
    for s in seeds:
        frontier.extend((s, v) for v in graph.neighbors[s] if assignment[v] < 0)
    remaining = n - target_count
    while remaining:
        k = int(rng.integers(len(frontier)))
        u, v = frontier[k]
        frontier[k] = frontier[-1]
        frontier.pop()
        if assignment[v] >= 0:
            continue
        assignment[v] = assignment[u]
        remaining -= 1
        frontier.extend((v, w) for w in graph.neighbors[v] if assignment[w] < 0)
    return Partition(assignment, target_count)


def aggregate_system(system: MigrationSystem, partition: Partition) -> MigrationSystem:
    """Merge zones into groups: populations, areas and between-group flows are summed."""
    if not isinstance(system.flows, FullMatrix):
        raise ValidationError("aggregation needs a full origin-destination matrix; marginals cannot be re-aggregated",
                              rule="full-matrix-required")
    a = partition.assignment
    if a.size != len(system.zones):
        raise ValidationError("partition does not cover the system's zones", rule="partition")
    k = partition.target_count
    pops = np.bincount(a, weights=system.zones.populations, minlength=k)
    areas = np.bincount(a, weights=system.zones.areas, minlength=k)
    onehot = np.zeros((a.size, k))
    onehot[np.arange(a.size), a] = 1.0
    merged = onehot.T @ system.flows.matrix @ onehot
    width = len(str(k - 1))
    zones = ZoneSet.from_zones(Zone(f"g{g:0{width}d}", float(pops[g]), float(areas[g])) for g in range(k))
    return MigrationSystem(zones, FullMatrix(merged), label=system.label, year=system.year,
                           interval=system.interval)


def scale_ladder(base_n: int, min_n: int, steps: int) -> list[int]:
    """Geometrically spaced unit counts from ``min_n`` to ``base_n`` inclusive."""
    if not (2 <= min_n < base_n):
        raise ValidationError(f"need 2 <= min_n < base_n, got min_n={min_n}, base_n={base_n}", rule="ladder-bounds")
    if steps < 2:
        raise ValidationError(f"need steps >= 2, got {steps}", rule="ladder-bounds")
    ratio = base_n / min_n
    out: list[int] = []
    for k in range(steps):
        v = int(math.floor(min_n * ratio ** (k / (steps - 1)) + 0.5))
        v = min(max(v, min_n), base_n)
        if not out or v > out[-1]:
            out.append(v)
    if out[-1] != base_n:
        out.append(base_n)
    return out


def default_ladder(base_n: int, steps: int = DEFAULT_STEPS) -> list[int]:
    if base_n <= 2:
        return [base_n]
    min_n = max(DEFAULT_MIN_UNITS, math.ceil(base_n / 20))
    min_n = max(2, min(min_n, base_n - 1))
    return scale_ladder(base_n, min_n, steps)


def sample_seed(master_seed: int, scale_index: int, sample_index: int) -> np.random.SeedSequence:
    """Independent, order-free stream for one (scale, sample) cell."""
    return np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, scale_index, sample_index])


@dataclass(frozen=True)
class ScalePoint:
    n_units: int
    samples: int
    mean_cmi: float
    mean_mei: float
    mean_anmr: float
    sd_cmi: float
    sd_mei: float
    cmi_samples: tuple[float, ...] = field(repr=False, default=())
    mei_samples: tuple[float, ...] = field(repr=False, default=())
    anmr_samples: tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class ScaleProfile:
    points: tuple[ScalePoint, ...]
    base_n: int
    master_seed: int

    @property
    def n_units(self) -> np.ndarray:
        return np.array([p.n_units for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PROFILE_FIELDS)
        for p in self.points:
            w.writerow([p.n_units, p.samples] + [
                format(v, ".6g") for v in (p.mean_cmi, p.sd_cmi, p.mean_mei, p.sd_mei, p.mean_anmr)
            ])
        return buf.getvalue()


def _sample_indices(system, graph, n_units, seed):
    if n_units == len(system.zones):
        agg = system
    else:
        agg = aggregate_system(system, random_contiguous_partition(graph, n_units, seed))
    idx = system_indices(agg)
    return idx.cmi, idx.mei, idx.anmr


def _sd(values: np.ndarray) -> float:
    return float(values.std(ddof=1)) if values.size > 1 else 0.0


def scale_profile(
    system: MigrationSystem,
    graph: AdjacencyGraph,
    ladder: Sequence[int] | None = None,
    samples_per_scale: int = DEFAULT_SAMPLES,
    master_seed: int = 0,
    *,
    workers: int = 1,
) -> ScaleProfile:
    """Monte Carlo summary of CMI, MEI and ANMR over random aggregations at each scale.

    Results depend only on the inputs and ``master_seed``; ``workers`` > 1
    evaluates samples on a thread pool and combines them by index.
    """
    if not isinstance(system.flows, FullMatrix):
        raise ValidationError("an origin-destination matrix is required for scale profiling",
                              rule="full-matrix-required")
    if samples_per_scale < 1:
        raise ValidationError("samples_per_scale must be >= 1", rule="samples>=1")
    if graph.zones != system.zones:
        raise ValidationError("adjacency graph and system use different zone sets", rule="same-zones")
    base_n = len(system.zones)
    ladder = list(default_ladder(base_n) if ladder is None else ladder)
    if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValidationError("ladder must be non-empty and strictly increasing", rule="ladder")
    if ladder[0] < 2 or ladder[-1] > base_n:
        raise ValidationError(f"ladder values must lie in [2, {base_n}]", rule="ladder")

    tasks = [
        (si, k, n, sample_seed(master_seed, si, k))
        for si, n in enumerate(ladder)
        for k in range(samples_per_scale)
    ]
    results = np.empty((len(ladder), samples_per_scale, 3))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(si, k, pool.submit(_sample_indices, system, graph, n, s)) for si, k, n, s in tasks]
            for si, k, fut in futures:
                results[si, k] = fut.result()
    else:
        for si, k, n, s in tasks:
            results[si, k] = _sample_indices(system, graph, n, s)

    points = []
    for si, n in enumerate(ladder):
        cmi, mei, anmr = results[si].T
        points.append(ScalePoint(
            n_units=n, samples=samples_per_scale,
            mean_cmi=float(cmi.mean()), mean_mei=float(mei.mean()), mean_anmr=float(anmr.mean()),
            sd_cmi=_sd(cmi), sd_mei=_sd(mei),
            cmi_samples=tuple(cmi.tolist()), mei_samples=tuple(mei.tolist()), anmr_samples=tuple(anmr.tolist()),
        ))
    return ScaleProfile(tuple(points), base_n, int(master_seed))


@dataclass(frozen=True)
class CourgeauFit:
    """CMI against log10(number of units): slope in percent per decade of units."""

    slope: float
    intercept: float
    r_squared: float


def fit_line(x, y) -> CourgeauFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValidationError("need at least 2 points to fit a line", rule="min-2-points")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValidationError("all x values are equal", rule="degenerate-design")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if sst == 0 else min(1.0, max(0.0, 1.0 - float(resid @ resid) / sst))
    return CourgeauFit(slope, intercept, r2)


def fit_cmi_slope(profile: ScaleProfile) -> CourgeauFit:
    """Unweighted least-squares line of mean CMI on log10(n_units)."""
    if len(profile.points) < 2:
        raise ValidationError("profile needs at least 2 scale points", rule="min-2-points")
    return fit_line(np.log10(profile.n_units), [p.mean_cmi for p in profile.points])


def mean_mei(profile: ScaleProfile, min_units: int = DEFAULT_MIN_UNITS) -> float:
    """Average of the per-scale mean MEI over scales with at least ``min_units`` units."""
    vals = [p.mean_mei for p in profile.points if p.n_units >= min_units]
    if not vals:
        raise ValidationError(f"no scale point has n_units >= {min_units}", rule="min-units")
    return float(np.mean(vals))
