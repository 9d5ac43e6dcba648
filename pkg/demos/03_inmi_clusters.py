"""
Net migration impact and country clusters
=========================================

INMI splits into an intensity ratio C and an effectiveness ratio R, both
relative to a benchmark. Countries are then grouped in (C, R) space.
"""

from migimpact import Benchmark, CountrySummary, compute_inmi, evaluate_k, kmeans_cluster
from migimpact.impact import cluster_csv

bench = Benchmark(avg_cmi_slope=3.0, avg_mei=40.0)

countries = [
    CountrySummary("Avalon", 3.0, 89.2),    # average intensity, very effective
    CountrySummary("Brenta", 6.1, 14.0),    # mobile but reciprocal
    CountrySummary("Corvo", 1.2, 70.0),
    CountrySummary("Dunmore", 5.5, 18.0),
    CountrySummary("Elara", 1.0, 75.0),
    CountrySummary("Fenwick", 3.2, 41.0),
    CountrySummary("Galen", 2.9, 38.0),
    CountrySummary("Hollis", 2.8, 92.0),
]

points = {}
for c in countries:
    r = compute_inmi(c, bench)
    points[c.label] = (r.c_ratio, r.r_ratio)
    print(f"{c.label:8s} C={r.c_ratio:.2f} R={r.r_ratio:.2f} INMI={r.inmi:.2f}")

# diagnostics only; picking k is a judgement call
for k, d in evaluate_k(points, [2, 3, 4]).items():
    print(k, round(d.inertia, 3), d.silhouette and round(d.silhouette, 3))

res = kmeans_cluster(points, k=4, restarts=10, seed=7)
print(cluster_csv(res))
