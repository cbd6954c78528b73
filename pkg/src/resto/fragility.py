"""Per-branch damage probabilities from recorded ground-motion intensity.

Damage curves are lognormal in peak ground acceleration: the probability of
a branch structure reaching the complete-damage level at a recorded PGA of
x is Phi(ln(x / median) / beta), with Phi the standard normal CDF. Only the
complete-damage level matters here; lower damage levels leave the branch
operable. Fixtures and field workflows may skip curves entirely and supply
the damage probability per branch directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SchemaError
from .network import Network


@dataclass(frozen=True)
class FragilityCurve:
    """Lognormal damage curve: median PGA (g) and log-space dispersion."""

    median_pga: float
    dispersion_beta: float

    def __post_init__(self):
        if not self.median_pga > 0:
            raise ValueError(f"median_pga must be > 0, got {self.median_pga}")
        if not self.dispersion_beta > 0:
            raise ValueError(f"dispersion_beta must be > 0, got {self.dispersion_beta}")


@dataclass(frozen=True)
class PgaRecord:
    """One station reading: largest absolute recorded acceleration, in g."""

    station_id: str
    pga: float
    location: tuple[float, float] | None = None

    def __post_init__(self):
        if self.pga < 0:
            raise ValueError(f"pga must be >= 0, got {self.pga}")


@dataclass(frozen=True)
class FailureProfile:
    """Length-m vector of per-branch damage probabilities."""

    p_f: tuple[float, ...]

    def __post_init__(self):
        for i, p in enumerate(self.p_f):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p_f[{i}] = {p} outside [0, 1]")

    @classmethod
    def of(cls, values) -> "FailureProfile":
        if isinstance(values, cls):
            return values
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.p_f)

    def __getitem__(self, i: int) -> float:
        return self.p_f[i]


def normal_cdf(x: float) -> float:
    """Standard normal CDF, deterministic and accurate well below 1e-10."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def evaluate_fragility(curve: FragilityCurve, pga: float) -> float:
    """Probability of complete damage at the given PGA.

    Zero at pga = 0 (limit of the lognormal CDF), 0.5 exactly at the median,
    nondecreasing in pga.
    """
    if pga < 0:
        raise ValueError(f"pga must be >= 0, got {pga}")
    if pga == 0.0:
        return 0.0
    if pga == curve.median_pga:
        return 0.5
    x = math.log(pga / curve.median_pga) / curve.dispersion_beta
    p = normal_cdf(x)
    return min(1.0, max(0.0, p))


def assign_pga(
    records: list[PgaRecord],
    net: Network,
    mapping: dict,
    needed: set[int] | None = None,
) -> dict[int, float]:
    """Resolve a PGA value per branch.

    `mapping` holds direct values and/or station references:
    ``{"direct": {branch: pga}, "branch_station": {branch: station_id}}``.
    Direct values win over station references. With `needed`, only those
    branches must resolve; otherwise all of them must.
    """
    stations = {r.station_id: r.pga for r in records}
    direct = {int(k): float(v) for k, v in (mapping.get("direct") or {}).items()}
    by_station = {int(k): str(v) for k, v in (mapping.get("branch_station") or {}).items()}
    targets = range(net.m) if needed is None else sorted(needed)
    out: dict[int, float] = {}
    for j in targets:
        if j in direct:
            if direct[j] < 0:
                raise SchemaError(f"pga for branch {j} is negative", path=f"pga.direct.{j}")
            out[j] = direct[j]
        elif j in by_station:
            sid = by_station[j]
            if sid not in stations:
                raise SchemaError(
                    f"branch {j} references unknown station {sid!r}",
                    path=f"pga.branch_station.{j}",
                )
            out[j] = stations[sid]
        else:
            raise SchemaError(f"no pga mapping for branch {j}", path=f"pga.{j}")
    return out


def failure_profile(
    net: Network,
    curves: dict[int, FragilityCurve],
    pga: dict[int, float],
    overrides: dict[int, float] | None = None,
) -> FailureProfile:
    """Per-branch damage probabilities, curve-driven unless overridden."""
    overrides = overrides or {}
    values = []
    for j in range(net.m):
        if j in overrides:
            p = float(overrides[j])
            if not 0.0 <= p <= 1.0:
                raise SchemaError(
                    f"override for branch {j} outside [0, 1]", path=f"overrides.{j}"
                )
            values.append(p)
            continue
        if j not in curves:
            raise SchemaError(
                f"branch {j} has neither a fragility curve nor an override",
                path=f"curves.{j}",
            )
        if j not in pga:
            raise SchemaError(f"branch {j} has no pga value", path=f"pga.{j}")
        values.append(evaluate_fragility(curves[j], pga[j]))
    return FailureProfile(tuple(values))


def profile_from_dict(net: Network, doc: dict) -> FailureProfile:
    """Build a FailureProfile from the fragility document form.

    ``{"curves": {"0": {"median_pga": ..., "beta": ...}, ...},
       "overrides": {"1": 0.7, ...},
       "pga": {"direct": {...}, "stations": [{"station_id": ..., "pga": ...}],
               "branch_station": {...}}}``
    """
    if not isinstance(doc, dict):
        raise SchemaError("fragility document must be an object", path="")
    overrides = {}
    for k, v in (doc.get("overrides") or {}).items():
        try:
            overrides[int(k)] = float(v)
        except (TypeError, ValueError):
            raise SchemaError(f"bad override {v!r}", path=f"overrides.{k}")
    curves = {}
    for k, v in (doc.get("curves") or {}).items():
        try:
            curves[int(k)] = FragilityCurve(
                median_pga=float(v["median_pga"]),
                dispersion_beta=float(v.get("beta", v.get("dispersion_beta"))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad curve for branch {k}: {exc}", path=f"curves.{k}")
    pga_doc = doc.get("pga") or {}
    records = []
    for i, r in enumerate(pga_doc.get("stations") or []):
        try:
            records.append(PgaRecord(station_id=str(r["station_id"]), pga=float(r["pga"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad station record: {exc}", path=f"pga.stations[{i}]")
    for section, keys in (
        ("overrides", overrides),
        ("curves", curves),
        ("pga.direct", pga_doc.get("direct") or {}),
        ("pga.branch_station", pga_doc.get("branch_station") or {}),
    ):
        for k in keys:
            try:
                j = int(k)
            except (TypeError, ValueError):
                raise SchemaError(f"bad branch key {k!r}", path=f"{section}.{k}")
            if not 0 <= j < net.m:
                raise SchemaError(
                    f"branch {j} does not exist (m = {net.m})", path=f"{section}.{k}"
                )
    needed = {j for j in range(net.m) if j not in overrides}
    missing_curve = [j for j in needed if j not in curves]
    if missing_curve:
        raise SchemaError(
            f"branch {missing_curve[0]} has neither a fragility curve nor an override",
            path=f"curves.{missing_curve[0]}",
        )
    pga = assign_pga(records, net, pga_doc, needed=needed)
    return failure_profile(net, curves, pga, overrides)
