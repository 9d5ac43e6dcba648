"""Synthetic zone systems on rectangular grids, for tests and demonstrations."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .data import AdjacencyGraph, MigrationSystem, make_system


def grid_ids(rows: int, cols: int) -> list[str]:
    width = len(str(rows * cols - 1))
    return [f"z{k:0{width}d}" for k in range(rows * cols)]


def grid_coordinates(rows: int, cols: int) -> np.ndarray:
    r, c = np.divmod(np.arange(rows * cols), cols)
    return np.column_stack([r, c]).astype(float)


def grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    """Rook-contiguity edges between cell positions (row-major)."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                edges.append((k, k + 1))
            if r + 1 < rows:
                edges.append((k, k + cols))
    return edges


def grid_graph(system: MigrationSystem, rows: int, cols: int) -> AdjacencyGraph:
    ids = system.zones.ids
    return AdjacencyGraph.from_pairs(system.zones, [(ids[a], ids[b]) for a, b in grid_edges(rows, cols)])


def uniform_flow_system(rows: int, cols: int, seed=0, *, high: float = 100.0, integer: bool = False,
                        population=(1000, 5000)) -> MigrationSystem:
    """Grid system with every off-diagonal flow drawn uniformly from [0, high]."""
    rng = np.random.default_rng(seed)
    n = rows * cols
    flows = rng.uniform(0.0, high, size=(n, n))
    if integer:
        flows = np.floor(flows)
    pops = rng.integers(population[0], population[1] + 1, size=n)
    areas = rng.integers(10, 200, size=n)
    return make_system(grid_ids(rows, cols), pops, areas, flows)


def attractiveness_field(rows: int, cols: int, rng, *, roughness: float = 1.5,
                         scales=(0.5, 1, 2, 4, 8)) -> np.ndarray:
    """Multi-scale random surface, unit standard deviation, flattened row-major.

    Gaussian-smoothed white noise is summed over ``scales`` with weight
    ``scale ** roughness``, so broad regional contrasts dominate but local
    detail survives.
    """
    phi = np.zeros((rows, cols))
    scales = [s for s in scales if s <= max(rows, cols) / 2] or [min(scales)]
    for s in scales:
        f = gaussian_filter(rng.standard_normal((rows, cols)), s, mode="wrap")
        phi += s ** roughness * f / f.std()
    phi -= phi.mean()
    return (phi / phi.std()).ravel()


def structured_flow_system(rows: int, cols: int, seed=0, *, decay: float = 2.0, amplitude: float = 2.0,
                           roughness: float = 1.5, high: float = 100.0) -> MigrationSystem:
    """Grid system whose flows are uniform draws shaped by geography.

    Each off-diagonal count is ``floor(U * exp(-d / decay) * exp((a_j - a_i) / 2))``
    with ``U`` uniform on [0, ``high``], ``d`` the centroid distance in cells
    and ``a`` a multi-scale attractiveness surface scaled by ``amplitude``.
    Net gains are then spatially autocorrelated at every scale, unlike
    :func:`uniform_flow_system` where they are white noise.
    """
    rng = np.random.default_rng(seed)
    n = rows * cols
    xy = grid_coordinates(rows, cols)
    dist = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1))
    a = amplitude * attractiveness_field(rows, cols, rng, roughness=roughness)
    flows = np.floor(rng.uniform(0.0, high, size=(n, n)) * np.exp(-dist / decay) * np.exp((a[None, :] - a[:, None]) / 2))
    pops = rng.integers(1000, 5001, size=n)
    areas = rng.integers(10, 200, size=n)
    return make_system(grid_ids(rows, cols), pops, areas, flows)


def flows_with_net(net: np.ndarray, baseline: np.ndarray) -> np.ndarray:
    """Add directed flows to a symmetric ``baseline`` so zone balances equal ``net``.

    Zones with negative ``net`` send their deficit to zones with positive
    ``net`` in proportion to each receiver's share. ``net`` must sum to 0.
    """
    net = np.asarray(net, dtype=float)
    gain = np.clip(net, 0, None)
    loss = np.clip(-net, 0, None)
    total = gain.sum()
    directed = np.outer(loss, gain / total) if total > 0 else np.zeros((net.size, net.size))
    flows = baseline + directed
    np.fill_diagonal(flows, 0.0)
    return flows


def planted_density_system(rows: int, cols: int, seed=0, *, slope: float = 0.5, noise_sd: float = 0.25,
                           smooth: bool = True) -> MigrationSystem:
    """Grid system whose zone NMR (percent) is ``slope * log10(density)`` plus noise.

    The noise standard deviation is ``noise_sd`` for a zone of average
    population and scales with ``1 / sqrt(population)``, as sampling noise in
    a rate does.
    Log10 density follows a smooth surface between roughly 1 and 3 when
    ``smooth`` is set (i.i.d. otherwise). The noise is centred, then a
    population-weighted constant is removed so the system is closed; that
    constant only moves the intercept.
    """
    rng = np.random.default_rng(seed)
    n = rows * cols
    if smooth:
        logden = 2.0 + 0.5 * attractiveness_field(rows, cols, rng, roughness=2.0, scales=(2, 4, 8))
    else:
        logden = rng.uniform(1.0, 3.0, size=n)
    areas = rng.uniform(20.0, 200.0, size=n)
    pops = 10.0 ** logden * areas
    noise = rng.normal(0.0, noise_sd, size=n) * np.sqrt(pops.mean() / pops)
    nmr = slope * logden + noise - slope * logden.mean() - noise.mean()
    nmr -= (pops * nmr).sum() / pops.sum()
    net = nmr * pops / 100.0
    xy = grid_coordinates(rows, cols)
    dist = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1))
    base = rng.uniform(0.0, 1.0, size=(n, n))
    baseline = 0.002 * np.sqrt(np.outer(pops, pops)) * np.exp(-dist / 2.0) * (base + base.T) / 2
    return make_system(grid_ids(rows, cols), pops, areas, flows_with_net(net, baseline))
