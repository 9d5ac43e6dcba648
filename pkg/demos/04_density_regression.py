"""
Net migration against population density
=========================================

A population-weighted regression of zone net migration rates on log10
density, with heteroskedasticity-robust errors, sorts a country into
concentration, deconcentration or spatial equilibrium.
"""

import warnings
from dataclasses import replace

from migimpact import (classify_redistribution, density_regression, net_migration_rates,
                       time_series_slopes, zscore_table)
from migimpact.regression import time_series_csv
from migimpact.synthetic import planted_density_system

s = planted_density_system(10, 10, seed=3, slope=0.5)

# the slope is per unit of log10(persons / km2)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    raw = density_regression(s, "raw")
    z = density_regression(s, "zscore")

for res in (raw, z):
    f = res.fit
    print(f"{res.variant:6s} slope {f.slope:+.4f} se {f.robust_se_slope:.4f} t {f.t_slope:+.3f} "
          f"p {f.p_slope:.2g} adj R2 {f.adj_r_squared:.3f}")

# standardising y rescales slope and SE together: same t, same verdict
print(classify_redistribution(raw.fit).label, classify_redistribution(z.fit).label)

# outlying zones, two standard deviations out
table = zscore_table(net_migration_rates(s))
print([r.zone_id for r in table.rows if r.flag])

# a few "years" with the gradient drifting from dispersal to concentration
years = []
for k, b in enumerate([-0.4, -0.1, 0.0, 0.3, 0.6]):
    sy = planted_density_system(10, 10, seed=11, slope=b)
    years.append(replace(sy, label="demo", year=2010 + k))
print(time_series_csv(time_series_slopes(years, "raw")))
