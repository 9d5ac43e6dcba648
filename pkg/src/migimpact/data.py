"""Zone attributes, inter-zone flows and contiguity graphs.

Everything here is validated on load and immutable afterwards. Matrices are
indexed by zone position (file order); zone ids only appear at the I/O
boundary.
"""
from __future__ import annotations

import csv
import io
import os
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError

ZONE_FIELDS = ("zone_id", "name", "population", "area_km2")
FLOW_FIELDS = ("origin", "destination", "count")
MARGINAL_FIELDS = ("zone_id", "inflow", "outflow")
ADJACENCY_FIELDS = ("zone_a", "zone_b")

FULL_MATRIX = "FullMatrix"
MARGINALS_ONLY = "MarginalsOnly"

# A source is a CSV path, an open text stream, or already-parsed records.
Source = Union[str, os.PathLike, io.TextIOBase, Iterable[Mapping[str, object]]]


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Zone:
    id: str
    population: float
    area: float
    name: str = ""


@dataclass(frozen=True, eq=False)
class ZoneSet:
    zones: tuple[Zone, ...]
    index: Mapping[str, int] = field(repr=False)

    @classmethod
    def from_zones(cls, zones: Iterable[Zone]) -> "ZoneSet":
        zones = tuple(zones)
        index: dict[str, int] = {}
        for pos, z in enumerate(zones):
            if z.id in index:
                raise ValidationError(f"duplicate zone id {z.id!r}", rule="unique-zone-id")
            if not z.population >= 0:
                raise ValidationError(f"zone {z.id!r}: population must be >= 0", rule="population>=0")
            if not z.area > 0:
                raise ValidationError(f"zone {z.id!r}: area must be > 0", rule="area>0")
            index[z.id] = pos
        if len(zones) < 2:
            raise ValidationError("a zone set needs at least 2 zones", rule="min-2-zones")
        zs = cls(zones, index)
        if not zs.total_population > 0:
            raise ValidationError("total population must be > 0", rule="population-total>0")
        return zs

    def __len__(self) -> int:
        return len(self.zones)

    def __eq__(self, other) -> bool:
        return isinstance(other, ZoneSet) and self.zones == other.zones

    def __hash__(self) -> int:
        return hash(self.zones)

    @property
    def ids(self) -> list[str]:
        return [z.id for z in self.zones]

    @property
    def populations(self) -> np.ndarray:
        return np.array([z.population for z in self.zones], dtype=float)

    @property
    def areas(self) -> np.ndarray:
        return np.array([z.area for z in self.zones], dtype=float)

    @property
    def total_population(self) -> float:
        return float(self.populations.sum())


@dataclass(frozen=True, eq=False)
class FullMatrix:
    """Origin (row) by destination (column) counts, diagonal held at zero."""

    matrix: np.ndarray
    kind = FULL_MATRIX

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("flow matrix must be square", rule="square-matrix")
        if (m < 0).any() or not np.isfinite(m).all():
            raise ValidationError("flow counts must be finite and >= 0", rule="count>=0")
        np.fill_diagonal(m, 0.0)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def inflow(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    @property
    def outflow(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def total(self) -> float:
        return float(self.matrix.sum())

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, FullMatrix) and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MarginalsOnly:
    """Per-zone in- and out-migration totals with no origin-destination detail."""

    inflow: np.ndarray
    outflow: np.ndarray
    kind = MARGINALS_ONLY

    def __post_init__(self):
        d, o = _frozen(self.inflow), _frozen(self.outflow)
        if d.shape != o.shape or d.ndim != 1:
            raise ValidationError("inflow and outflow must be equal-length vectors", rule="shape")
        if (d < 0).any() or (o < 0).any() or not (np.isfinite(d).all() and np.isfinite(o).all()):
            raise ValidationError("flow counts must be finite and >= 0", rule="count>=0")
        if d.sum() != o.sum():
            raise ValidationError(
                f"marginal imbalance: sum of inflows {d.sum():g} != sum of outflows {o.sum():g}",
                rule="closed-system",
            )
        object.__setattr__(self, "inflow", d)
        object.__setattr__(self, "outflow", o)

    @property
    def total(self) -> float:
        return float(self.inflow.sum())

    def __len__(self) -> int:
        return self.inflow.shape[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MarginalsOnly)
            and np.array_equal(self.inflow, other.inflow)
            and np.array_equal(self.outflow, other.outflow)
        )

    __hash__ = None


FlowData = Union[FullMatrix, MarginalsOnly]


@dataclass(frozen=True, eq=False)
class MigrationSystem:
    """One country-year: zones, flows between them, and measurement metadata."""

    zones: ZoneSet
    flows: FlowData
    label: str = ""
    year: int = 0
    interval: int = 1
    diagonal_dropped: int = 0

    def __post_init__(self):
        if len(self.flows) != len(self.zones):
            raise ValidationError(
                f"flow data covers {len(self.flows)} zones but the zone set has {len(self.zones)}",
                rule="dimension-match",
            )
        if self.interval not in (1, 5):
            raise ValidationError(f"interval must be 1 or 5 years, got {self.interval}", rule="interval")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MigrationSystem):
            return NotImplemented
        return (
            self.zones == other.zones
            and self.flows == other.flows
            and (self.label, self.year, self.interval) == (other.label, other.year, other.interval)
        )

    __hash__ = None

    @property
    def has_matrix(self) -> bool:
        return isinstance(self.flows, FullMatrix)

    @property
    def inflow(self) -> np.ndarray:
        return self.flows.inflow

    @property
    def outflow(self) -> np.ndarray:
        return self.flows.outflow

    @property
    def migrants(self) -> float:
        """Total inter-zone migrants, M."""
        return self.flows.total

    @property
    def population(self) -> float:
        """Population at risk, P."""
        return self.zones.total_population

    @property
    def net(self) -> np.ndarray:
        return self.inflow - self.outflow


@dataclass(frozen=True, eq=False)
class AdjacencyGraph:
    """Undirected zone contiguity; ``neighbors`` is indexed by zone position."""

    zones: ZoneSet
    edges: frozenset[tuple[str, str]]
    neighbors: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_pairs(cls, zones: ZoneSet, pairs: Iterable[tuple[str, str]]) -> "AdjacencyGraph":
        edges: set[tuple[str, str]] = set()
        for a, b in pairs:
            for zid in (a, b):
                if zid not in zones.index:
                    raise ValidationError(f"unknown zone id {zid!r} in adjacency", rule="known-zone-id")
            if a == b:
                raise ValidationError(f"self-loop on zone {a!r}", rule="no-self-loop")
            edges.add((a, b) if a < b else (b, a))
        n = len(zones)
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            i, j = zones.index[a], zones.index[b]
            nbrs[i].add(j)
            nbrs[j].add(i)
        graph = cls(zones, frozenset(edges), tuple(tuple(sorted(s)) for s in nbrs))
        sizes = graph.component_sizes()
        if len(sizes) > 1:
            raise ValidationError(
                "adjacency graph is disconnected; component sizes: "
                + ", ".join(str(s) for s in sizes),
                rule="connected",
            )
        return graph

    def component_sizes(self) -> list[int]:
        n = len(self.zones)
        rows = [i for i, nb in enumerate(self.neighbors) for _ in nb]
        cols = [j for nb in self.neighbors for j in nb]
        adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        _, labels = connected_components(adj, directed=False)
        return sorted(np.bincount(labels).tolist(), reverse=True)

    def __len__(self) -> int:
        return len(self.zones)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


# ---------------------------------------------------------------------------
# CSV reading
# ---------------------------------------------------------------------------

def _read_records(source: Source, required: tuple[str, ...]) -> tuple[str, list[tuple[int, dict]]]:
    """Return (source name, [(line number, record), ...]) checking the header."""
    if isinstance(source, (str, os.PathLike)):
        name = str(source)
        try:
            with open(source, newline="", encoding="utf-8") as fh:
                return name, _parse_csv(fh, name, required)
        except FileNotFoundError:
            raise ValidationError("file not found", source=name, rule="exists") from None
    if isinstance(source, io.TextIOBase):
        name = getattr(source, "name", "<stream>")
        return name, _parse_csv(source, name, required)
    records = []
    for i, rec in enumerate(source):
        missing = [f for f in required if f not in rec]
        if missing:
            raise ValidationError(f"record missing fields {missing}", source="<records>", line=i + 1, rule="schema")
        records.append((i + 1, dict(rec)))
    return "<records>", records


def _parse_csv(fh, name: str, required: tuple[str, ...]) -> list[tuple[int, dict]]:
    reader = csv.DictReader(fh)
    header = reader.fieldnames or []
    missing = [f for f in required if f not in header]
    if missing:
        raise ValidationError(
            f"header {header} lacks required columns {missing}", source=name, line=1, rule="schema"
        )
    # header occupies line 1
    return [(reader.line_num, row) for row in reader]


def _number(value, what: str, name: str, line: int) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} {value!r} is not a number", source=name, line=line, rule="numeric") from None
    if not np.isfinite(x):
        raise ValidationError(f"{what} {value!r} is not finite", source=name, line=line, rule="numeric")
    return x


def sniff_flow_kind(source: Source) -> str:
    """Tell a matrix flow file from a marginals file by its header."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), [])
    else:
        raise TypeError("sniffing needs a file path")
    if all(f in header for f in MARGINAL_FIELDS):
        return MARGINALS_ONLY
    return FULL_MATRIX


def load_zones(source: Source) -> ZoneSet:
    name, records = _read_records(source, ("zone_id", "population", "area_km2"))
    zones = []
    seen: dict[str, int] = {}
    for line, rec in records:
        zid = str(rec["zone_id"]).strip()
        if zid in seen:
            raise ValidationError(
                f"duplicate zone id {zid!r} (first seen on line {seen[zid]})",
                source=name, line=line, rule="unique-zone-id",
            )
        seen[zid] = line
        pop = _number(rec["population"], "population", name, line)
        area = _number(rec["area_km2"], "area_km2", name, line)
        if pop < 0:
            raise ValidationError(f"negative population {pop:g}", source=name, line=line, rule="population>=0")
        if area <= 0:
            raise ValidationError(f"area must be > 0, got {area:g}", source=name, line=line, rule="area>0")
        zones.append(Zone(zid, pop, area, str(rec.get("name") or "")))
    try:
        return ZoneSet.from_zones(zones)
    except ValidationError as exc:
        raise ValidationError(exc.message, source=name, rule=exc.rule) from None


def load_flow_matrix(source: Source, zones: ZoneSet) -> tuple[FullMatrix, int]:
    """Read origin/destination/count rows; returns the matrix and the number of diagonal rows dropped."""
    name, records = _read_records(source, FLOW_FIELDS)
    n = len(zones)
    m = np.zeros((n, n))
    seen: dict[tuple[str, str], int] = {}
    dropped = 0
    for line, rec in records:
        o, d = str(rec["origin"]).strip(), str(rec["destination"]).strip()
        for zid in (o, d):
            if zid not in zones.index:
                raise ValidationError(f"unknown zone id {zid!r}", source=name, line=line, rule="known-zone-id")
        if (o, d) in seen:
            raise ValidationError(
                f"duplicate pair {o}->{d} (first seen on line {seen[o, d]})",
                source=name, line=line, rule="unique-pair",
            )
        seen[o, d] = line
        c = _number(rec["count"], "count", name, line)
        if c < 0:
            raise ValidationError(f"negative count {c:g}", source=name, line=line, rule="count>=0")
        if o == d:
            dropped += 1
            continue
        m[zones.index[o], zones.index[d]] = c
    return FullMatrix(m), dropped


def load_marginals(source: Source, zones: ZoneSet) -> MarginalsOnly:
    name, records = _read_records(source, MARGINAL_FIELDS)
    n = len(zones)
    d = np.zeros(n)
    o = np.zeros(n)
    seen: dict[str, int] = {}
    for line, rec in records:
        zid = str(rec["zone_id"]).strip()
        if zid not in zones.index:
            raise ValidationError(f"unknown zone id {zid!r}", source=name, line=line, rule="known-zone-id")
        if zid in seen:
            raise ValidationError(f"duplicate zone id {zid!r}", source=name, line=line, rule="unique-zone-id")
        seen[zid] = line
        inflow = _number(rec["inflow"], "inflow", name, line)
        outflow = _number(rec["outflow"], "outflow", name, line)
        if inflow < 0 or outflow < 0:
            raise ValidationError("negative count", source=name, line=line, rule="count>=0")
        d[zones.index[zid]] = inflow
        o[zones.index[zid]] = outflow
    try:
        return MarginalsOnly(d, o)
    except ValidationError as exc:
        raise ValidationError(exc.message, source=name, rule=exc.rule) from None


def load_system(
    zone_source: Source,
    flow_source: Source,
    interval: int = 1,
    *,
    marginals: bool | None = None,
    label: str = "",
    year: int = 0,
) -> MigrationSystem:
    """Load and validate a migration system.

    ``marginals`` selects the flow schema; when None it is inferred from the
    header of a flow file (or from the keys of the first record).
    Within-zone rows of a matrix file are dropped and counted in
    ``MigrationSystem.diagonal_dropped``.
    """
    zones = load_zones(zone_source)
    if marginals is None:
        if isinstance(flow_source, (str, os.PathLike)):
            marginals = sniff_flow_kind(flow_source) == MARGINALS_ONLY
        else:
            flow_source = list(flow_source)
            marginals = bool(flow_source) and "inflow" in flow_source[0]
    dropped = 0
    if marginals:
        flows: FlowData = load_marginals(flow_source, zones)
    else:
        flows, dropped = load_flow_matrix(flow_source, zones)
    return MigrationSystem(zones, flows, label=label, year=year, interval=interval, diagonal_dropped=dropped)


def load_adjacency(edge_source: Source, zones: ZoneSet) -> AdjacencyGraph:
    name, records = _read_records(edge_source, ADJACENCY_FIELDS)
    pairs = []
    for line, rec in records:
        a, b = str(rec["zone_a"]).strip(), str(rec["zone_b"]).strip()
        for zid in (a, b):
            if zid not in zones.index:
                raise ValidationError(f"unknown zone id {zid!r}", source=name, line=line, rule="known-zone-id")
        if a == b:
            raise ValidationError(f"self-loop on zone {a!r}", source=name, line=line, rule="no-self-loop")
        pairs.append((a, b))
    try:
        return AdjacencyGraph.from_pairs(zones, pairs)
    except ValidationError as exc:
        raise ValidationError(exc.message, source=name, rule=exc.rule) from None


def densities(zones: ZoneSet) -> np.ndarray:
    """Persons per km² for each zone."""
    return zones.populations / zones.areas


# ---------------------------------------------------------------------------
# Construction from arrays and CSV writing
# ---------------------------------------------------------------------------

def make_system(
    ids: Iterable[str],
    populations,
    areas,
    flows,
    *,
    label: str = "",
    year: int = 0,
    interval: int = 1,
) -> MigrationSystem:
    """Build a system from arrays. ``flows`` is an n×n matrix or an (inflow, outflow) pair."""
    ids = [str(i) for i in ids]
    zones = ZoneSet.from_zones(Zone(i, float(p), float(a)) for i, p, a in zip(ids, populations, areas, strict=True))
    if isinstance(flows, tuple):
        fd: FlowData = MarginalsOnly(*flows)
    else:
        fd = FullMatrix(flows)
    return MigrationSystem(zones, fd, label=label, year=year, interval=interval)


def zone_records(zones: ZoneSet) -> list[dict]:
    return [
        {"zone_id": z.id, "name": z.name, "population": repr(z.population), "area_km2": repr(z.area)}
        for z in zones.zones
    ]


def flow_records(system: MigrationSystem) -> list[dict]:
    ids = system.zones.ids
    if isinstance(system.flows, MarginalsOnly):
        return [
            {"zone_id": zid, "inflow": repr(float(d)), "outflow": repr(float(o))}
            for zid, d, o in zip(ids, system.flows.inflow, system.flows.outflow)
        ]
    m = system.flows.matrix
    rows, cols = np.nonzero(m)
    return [{"origin": ids[i], "destination": ids[j], "count": repr(float(m[i, j]))} for i, j in zip(rows, cols)]


def _write_csv(path, fieldnames, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        w.writerows(records)


def save_system(system: MigrationSystem, zones_path, flows_path) -> None:
    """Write a system back out in the same CSV schemas ``load_system`` reads."""
    _write_csv(zones_path, ZONE_FIELDS, zone_records(system.zones))
    fields = MARGINAL_FIELDS if isinstance(system.flows, MarginalsOnly) else FLOW_FIELDS
    _write_csv(flows_path, fields, flow_records(system))


def save_adjacency(graph: AdjacencyGraph, path) -> None:
    _write_csv(path, ADJACENCY_FIELDS, [{"zone_a": a, "zone_b": b} for a, b in sorted(graph.edges)])


