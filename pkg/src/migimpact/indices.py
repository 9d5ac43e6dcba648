"""System-wide migration indices and per-zone net migration rates.

All rates are percentages: migrants per 100 residents (CMI), net
redistribution per 100 migrants (MEI) and per 100 residents (ANMR).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MigrationSystem
from .errors import UndefinedIndexError, ValidationError

IDENTITY_RTOL = 1e-12


@dataclass(frozen=True)
class SystemIndices:
    cmi: float
    mei: float
    anmr: float
    m: float
    p: float
    half_abs_net: float


@dataclass(frozen=True, eq=False)
class NetMigrationRates:
    zone_ids: tuple[str, ...]
    rates: np.ndarray  # percent of local population
    net: np.ndarray  # persons
    populations: np.ndarray

    def __len__(self) -> int:
        return len(self.zone_ids)


def _half_abs_net(system: MigrationSystem) -> float:
    return 0.5 * float(np.abs(system.net).sum())


def crude_migration_intensity(system: MigrationSystem) -> float:
    return 100.0 * system.migrants / system.population


def migration_effectiveness_index(system: MigrationSystem) -> float:
    m = system.migrants
    if m <= 0:
        raise UndefinedIndexError("migration effectiveness is undefined for a system with no migrants (M = 0)")
    return 100.0 * _half_abs_net(system) / m


def aggregate_net_migration_rate(system: MigrationSystem) -> float:
    return 100.0 * _half_abs_net(system) / system.population


def net_migration_rates(system: MigrationSystem) -> NetMigrationRates:
    pops = system.zones.populations
    zero = np.flatnonzero(pops <= 0)
    if zero.size:
        zid = system.zones.zones[zero[0]].id
        raise ValidationError(f"zone {zid!r} has zero population; its net migration rate is undefined",
                              rule="population>0")
    net = system.net
    return NetMigrationRates(tuple(system.zones.ids), 100.0 * net / pops, net, pops)


def system_indices(system: MigrationSystem) -> SystemIndices:
    m = system.migrants
    p = system.population
    if m <= 0:
        raise UndefinedIndexError("migration effectiveness is undefined for a system with no migrants (M = 0)")
    half = _half_abs_net(system)
    cmi = 100.0 * m / p
    mei = 100.0 * half / m
    anmr = 100.0 * half / p
    if abs(anmr - cmi * mei / 100.0) > IDENTITY_RTOL * max(anmr, 1e-30):
        raise ArithmeticError(f"ANMR identity violated: anmr={anmr!r}, cmi*mei/100={cmi * mei / 100.0!r}")
    return SystemIndices(cmi=cmi, mei=mei, anmr=anmr, m=m, p=p, half_abs_net=half)


def indices_report(system: MigrationSystem) -> dict:
    """JSON-ready report of the indices and the per-zone rates."""
    idx = system_indices(system)
    rates = net_migration_rates(system)
    return {
        "cmi": idx.cmi,
        "mei": idx.mei,
        "anmr": idx.anmr,
        "m": idx.m,
        "p": idx.p,
        "rates": [
            {"zone_id": zid, "nmr_percent": float(r), "net_persons": float(n)}
            for zid, r, n in zip(rates.zone_ids, rates.rates, rates.net)
        ],
    }
