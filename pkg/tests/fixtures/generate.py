"""Regenerate the CSV/JSON fixture corpus used by the CLI tests.

    python tests/fixtures/generate.py
"""
from pathlib import Path

import numpy as np

from migimpact.data import make_system, save_adjacency, save_system
from migimpact.synthetic import grid_graph, structured_flow_system

HERE = Path(__file__).resolve().parent


def write(name, text):
    (HERE / name).write_text(text, encoding="utf-8")


def main():
    write("two_zone_zones.csv", "zone_id,name,population,area_km2\nA,Alpha,100,50\nB,Beta,100,10\n")
    write("two_zone_flows.csv", "origin,destination,count\nA,B,10\nB,A,4\n")
    write("two_zone_marginals.csv", "zone_id,inflow,outflow\nA,4,10\nB,10,4\n")

    # four zones of different density exchanging symmetric flows
    write("balanced_zones.csv",
          "zone_id,name,population,area_km2\nN1,,5000,10\nN2,,2000,40\nN3,,800,80\nN4,,12000,6\n")
    rows = ["origin,destination,count"]
    ids = ["N1", "N2", "N3", "N4"]
    for i, a in enumerate(ids):
        for j, b in enumerate(ids):
            if i != j:
                rows.append(f"{a},{b},{10 * (min(i, j) + 1) + 5 * max(i, j)}")
    write("balanced_flows.csv", "\n".join(rows) + "\n")

    grid = structured_flow_system(6, 6, seed=3)
    save_system(grid, HERE / "grid_zones.csv", HERE / "grid_flows.csv")
    save_adjacency(grid_graph(grid, 6, 6), HERE / "grid_adjacency.csv")
    # second year: every flow reversed
    year2 = make_system(grid.zones.ids, grid.zones.populations, grid.zones.areas, grid.flows.matrix.T)
    save_system(year2, HERE / "grid_zones_2.csv", HERE / "grid_flows_2.csv")
    (HERE / "grid_zones_2.csv").unlink()

    write("benchmark.json", '{"avg_cmi_slope": 3.0, "avg_mei": 40.0, "sample_size": 8, '
                            '"note": "synthetic benchmark for tests"}\n')
    rng = np.random.default_rng(11)
    lines = ["label,cmi_slope,mean_mei"]
    centers = [(1.0, 2.2), (0.35, 1.0), (1.4, 0.5), (2.5, 1.6)]
    for c, (cx, rx) in enumerate(centers):
        for k in range(4):
            lines.append(f"X{c}{k},{3.0 * (cx + rng.normal(0, 0.05)):.4f},{40.0 * (rx + rng.normal(0, 0.05)):.4f}")
    write("summaries.csv", "\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
