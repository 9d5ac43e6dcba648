"""Net migration against log population density.

Population-weighted least squares with HC0 (Huber-White) standard errors,
regime classification from the slope, z-score tables, and year-by-year
slopes.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .data import MigrationSystem, densities
from .errors import DegenerateDesignError, DegenerateSpreadError, ValidationError
from .indices import NetMigrationRates, net_migration_rates

RAW = "raw"
ZSCORE = "zscore"
VARIANTS = (RAW, ZSCORE)

CONCENTRATION = "Concentration"
EQUILIBRIUM = "SpatialEquilibrium"
DECONCENTRATION = "Deconcentration"

DEFAULT_ALPHA = 0.05
UNUSUAL_SLOPE = 0.5
RECOMMENDED_MIN_ZONES = 30

BIN_LOW = "<-2.0"
BIN_NEG = "-2.0–0.0"
BIN_POS = "0.0–2.0"
BIN_HIGH = ">2.0"


@dataclass(frozen=True)
class WeightedOLSFit:
    slope: float
    intercept: float
    robust_se_slope: float
    robust_se_intercept: float
    t_slope: float
    t_intercept: float
    p_slope: float
    p_intercept: float
    adj_r_squared: float
    n: int


def _t_and_p(coef: float, se: float, df: int) -> tuple[float, float]:
    # A zero SE means a perfect fit: the t ratio is infinite unless the
    # coefficient is itself zero, in which case there is no effect to test.
    if se > 0:
        t = coef / se
    elif coef == 0:
        return 0.0, 1.0
    else:
        t = float(np.copysign(np.inf, coef))
    return t, float(2.0 * stats.t.sf(abs(t), df))


def weighted_ols(x, y, w) -> WeightedOLSFit:
    """Minimise sum w_i (y_i - a - b x_i)^2 and report HC0 sandwich inference.

    Covariance is ``B^-1 (X' W diag(e^2) W X) B^-1`` with ``B = X' W X``;
    p-values use Student t with n - 2 degrees of freedom.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    n = x.size
    if not (y.size == w.size == n):
        raise ValidationError("x, y and w must have equal lengths", rule="equal-lengths")
    if n < 3:
        raise ValidationError(f"need at least 3 observations, got {n}", rule="n>=3")
    if not (w > 0).all():
        raise ValidationError("weights must be strictly positive", rule="weight>0")
    if np.all(x == x[0]):
        raise DegenerateDesignError("all predictor values are equal; the slope is not identified")

    X = np.column_stack([np.ones(n), x])
    bread = X.T @ (w[:, None] * X)
    coef = np.linalg.solve(bread, X.T @ (w * y))
    resid = y - X @ coef
    meat = X.T @ (((w * resid) ** 2)[:, None] * X)
    bread_inv = np.linalg.inv(bread)
    cov = bread_inv @ meat @ bread_inv
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    ybar = float(w @ y / w.sum())
    sst = float(w @ (y - ybar) ** 2)
    ssr = float(w @ resid ** 2)
    if sst > 0:
        adj = 1.0 - (ssr / sst) * (n - 1) / (n - 2)
    else:
        adj = 0.0

    df = n - 2
    t_b, p_b = _t_and_p(float(coef[1]), float(se[1]), df)
    t_a, p_a = _t_and_p(float(coef[0]), float(se[0]), df)
    return WeightedOLSFit(
        slope=float(coef[1]), intercept=float(coef[0]),
        robust_se_slope=float(se[1]), robust_se_intercept=float(se[0]),
        t_slope=t_b, t_intercept=t_a, p_slope=p_b, p_intercept=p_a,
        adj_r_squared=adj, n=n,
    )


def fit_from_published(slope: float, t_slope: float, n: int, *, intercept: float = float("nan"),
                       t_intercept: float = float("nan"), adj_r_squared: float = float("nan")) -> WeightedOLSFit:
    """Rebuild a fit from a reported coefficient, its t ratio and the sample size."""
    def se_p(coef, t):
        if t == 0 or not np.isfinite(t):
            return float("nan"), (1.0 if t == 0 else float("nan"))
        return abs(coef / t), float(2.0 * stats.t.sf(abs(t), n - 2))

    se_b, p_b = se_p(slope, t_slope)
    se_a, p_a = se_p(intercept, t_intercept)
    return WeightedOLSFit(slope, intercept, se_b, se_a, t_slope, t_intercept, p_b, p_a, adj_r_squared, n)


@dataclass(frozen=True)
class RedistributionRegime:
    label: str
    slope_sign: int
    p_value: float
    alpha: float
    flags: tuple[str, ...] = ()


def classify_redistribution(fit: WeightedOLSFit, alpha: float = DEFAULT_ALPHA) -> RedistributionRegime:
    """Significance first, then sign: p >= alpha is spatial equilibrium."""
    sign = int(np.sign(fit.slope))
    flags: list[str] = []
    if not (fit.p_slope < alpha) or sign == 0:
        label = EQUILIBRIUM
        if abs(fit.slope) > UNUSUAL_SLOPE:
            flags.append("unusual: |slope| large but insignificant")
    elif sign > 0:
        label = CONCENTRATION
    else:
        label = DECONCENTRATION
    return RedistributionRegime(label, sign, fit.p_slope, alpha, tuple(flags))


@dataclass(frozen=True)
class ZScoreRow:
    zone_id: str
    nmr: float
    z: float
    bin: str
    flag: str = ""


@dataclass(frozen=True)
class ZScoreTable:
    rows: tuple[ZScoreRow, ...]
    mean: float
    sd: float

    @property
    def z(self) -> np.ndarray:
        return np.array([r.z for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["zone_id", "nmr_percent", "z", "bin"])
        for r in self.rows:
            w.writerow([r.zone_id, format(r.nmr, ".6g"), format(r.z, ".6g"), r.bin])
        return buf.getvalue()


def z_bin(z: float) -> str:
    """Legend bin; 0 falls on the negative side and ±2 in the inner bins."""
    if z < -2.0:
        return BIN_LOW
    if z <= 0.0:
        return BIN_NEG
    if z <= 2.0:
        return BIN_POS
    return BIN_HIGH


def _zscores(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    if not sd > 0:
        raise DegenerateSpreadError("all net migration rates are identical; z-scores are undefined")
    return (values - mean) / sd, mean, sd


def zscore_table(rates: NetMigrationRates) -> ZScoreTable:
    """Standardise zone rates by the country mean and sample standard deviation."""
    if len(rates) < 2:
        raise ValidationError("z-scores need at least 2 zones", rule="min-2-zones")
    z, mean, sd = _zscores(np.asarray(rates.rates, dtype=float))
    rows = []
    for zid, r, zi in zip(rates.zone_ids, rates.rates, z):
        flag = ""
        if zi < -2.0:
            flag = "unusually high net migration loss"
        elif zi > 2.0:
            flag = "unusually high net migration gain"
        rows.append(ZScoreRow(zid, float(r), float(zi), z_bin(zi), flag))
    return ZScoreTable(tuple(rows), mean, sd)


@dataclass(frozen=True)
class ZoneRecord:
    zone_id: str
    nmr: float
    z_nmr: float
    log10_density: float
    weight: float


@dataclass(frozen=True)
class DensityRegressionResult:
    fit: WeightedOLSFit
    variant: str
    records: tuple[ZoneRecord, ...] = field(repr=False)
    flags: tuple[str, ...] = ()


def density_regression(system: MigrationSystem, variant: str = ZSCORE) -> DensityRegressionResult:
    """Regress zone NMR (or its z-score) on log10 density, weighted by population.

    When every zone has the same NMR the z-score variant has no scale; z is
    then set to 0 everywhere and the result carries a ``degenerate_spread``
    flag, so a balanced system still yields a zero slope.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}", rule="variant")
    n = len(system.zones)
    if n < 3:
        raise ValidationError(f"density regression needs at least 3 zones, got {n}", rule="n>=3")
    flags: list[str] = []
    if n < RECOMMENDED_MIN_ZONES:
        warnings.warn(
            f"{n} zones is below the {RECOMMENDED_MIN_ZONES} recommended for a scale-robust slope",
            stacklevel=2,
        )
        flags.append(f"few_zones<{RECOMMENDED_MIN_ZONES}")
    rates = net_migration_rates(system)
    nmr = np.asarray(rates.rates, dtype=float)
    logden = np.log10(densities(system.zones))
    try:
        z, _, _ = _zscores(nmr)
    except DegenerateSpreadError:
        z = np.zeros_like(nmr)
        flags.append("degenerate_spread")
    y = nmr if variant == RAW else z
    fit = weighted_ols(logden, y, rates.populations)
    records = tuple(
        ZoneRecord(zid, float(r), float(zi), float(x), float(wt))
        for zid, r, zi, x, wt in zip(rates.zone_ids, nmr, z, logden, rates.populations)
    )
    return DensityRegressionResult(fit, variant, records, tuple(flags))


def regression_report(result: DensityRegressionResult, alpha: float = DEFAULT_ALPHA) -> dict:
    regime = classify_redistribution(result.fit, alpha)
    f = result.fit
    return {
        "variant": result.variant,
        "slope": f.slope,
        "intercept": f.intercept,
        "robust_se_slope": f.robust_se_slope,
        "t_slope": f.t_slope,
        "p_slope": f.p_slope,
        "adj_r2": f.adj_r_squared,
        "n": f.n,
        "regime": regime.label,
        "flags": list(result.flags) + list(regime.flags),
    }


@dataclass(frozen=True)
class YearFit:
    year: int
    fit: WeightedOLSFit
    regime: RedistributionRegime


def time_series_slopes(systems: Sequence[MigrationSystem], variant: str = ZSCORE,
                       alpha: float = DEFAULT_ALPHA) -> list[YearFit]:
    """One density regression per system, ordered by year; all must share a zone-id set."""
    systems = list(systems)
    if not systems:
        raise ValidationError("need at least one system", rule="non-empty")
    ref = systems[0].zones.ids
    ref_set = set(ref)
    for s in systems[1:]:
        ids = s.zones.ids
        if set(ids) != ref_set:
            diff = [i for i in ref if i not in set(ids)] + [i for i in ids if i not in ref_set]
            raise ValidationError(
                f"zone sets differ between years {systems[0].year} and {s.year}: first differing id {diff[0]!r}",
                rule="same-zone-set",
            )
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for s in sorted(systems, key=lambda s: s.year):
            fit = density_regression(s, variant).fit
            out.append(YearFit(s.year, fit, classify_redistribution(fit, alpha)))
    return out


def time_series_csv(fits: Iterable[YearFit]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "slope", "robust_se", "p", "adj_r2", "regime"])
    for yf in fits:
        f = yf.fit
        w.writerow([yf.year] + [format(v, ".6g") for v in (f.slope, f.robust_se_slope, f.p_slope, f.adj_r_squared)]
                   + [yf.regime.label])
    return buf.getvalue()
