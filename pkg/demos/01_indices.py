"""
System indices from an origin-destination matrix
=================================================

Crude migration intensity, migration effectiveness and the aggregate net
migration rate for a small made-up country, and why the last one is the
product of the first two.
"""

import numpy as np
from migimpact import make_system, net_migration_rates, system_indices

# three regions; rows send, columns receive
flows = np.array([
    [0, 120, 40],
    [60, 0, 30],
    [20, 90, 0],
])
s = make_system(["north", "capital", "south"], [50_000, 80_000, 40_000], [900, 150, 1200], flows)

idx = system_indices(s)
print(f"CMI  {idx.cmi:.4f}  migrants per 100 residents")
print(f"MEI  {idx.mei:.4f}  net moves per 100 migrants")
print(f"ANMR {idx.anmr:.4f}  net moves per 100 residents")

# ANMR is intensity times effectiveness
print("CMI*MEI/100 =", idx.cmi * idx.mei / 100)

# the capital gains, the periphery loses
rates = net_migration_rates(s)
for zid, r in zip(rates.zone_ids, rates.rates):
    print(f"{zid:8s} {r:+.3f} %")

# perfectly reciprocal flows redistribute nobody
sym = make_system(["a", "b", "c"], [1000] * 3, [1] * 3, flows + flows.T)
print("MEI with symmetric flows:", system_indices(sym).mei)
