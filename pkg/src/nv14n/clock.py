"""Instability model for a nuclear-spin frequency standard in diamond.

The fractional frequency instability of an ensemble of N centers probed for
a time T is

    df/f0 = 1 / (2 pi f0 F sqrt(T2* T) sqrt(N)),

about 2e-5 / (sqrt(T) sqrt(N)) at the nominal transition frequency (~5 MHz,
set by the quadrupole coupling), readout fidelity (~1.5%) and nuclear
coherence time (~10 ms). Conversions between ensemble size and defect
density assume the registry's carbon site density.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import constants

__all__ = [
    "BENCHMARKS",
    "ClockConfig",
    "count_to_density_ppb",
    "density_to_count",
    "emit_curve",
    "instability",
    "prefactor",
    "required_N",
]

BENCHMARKS = dict(constants.CLOCK_BENCHMARKS)


@dataclass(frozen=True)
class ClockConfig:
    f0: float = abs(constants.P_QUADRUPOLE_HZ)
    readout_fidelity: float = 0.015
    t2_star: float = 0.010
    volume_mm3: float = 1.0
    carbon_density_per_cm3: float = constants.CARBON_ATOMS_PER_CM3

    def __post_init__(self) -> None:
        if min(self.f0, self.readout_fidelity, self.t2_star, self.volume_mm3) <= 0:
            raise ValueError("all clock configuration values must be positive")
        if self.readout_fidelity > 1.0:
            raise ValueError("readout fidelity cannot exceed 1")
        if self.carbon_density_per_cm3 <= 0:
            raise ValueError("carbon density must be positive")


def instability(cfg: ClockConfig, n: float, t: float) -> float:
    """Fractional frequency instability for N centers and measurement time T."""
    if n < 1:
        raise ValueError("ensemble size must be at least 1")
    if t <= 0:
        raise ValueError("measurement time must be positive")
    return 1.0 / (
        2.0 * math.pi * cfg.f0 * cfg.readout_fidelity * math.sqrt(cfg.t2_star * t) * math.sqrt(n)
    )


def prefactor(cfg: ClockConfig) -> float:
    """Single-center instability at 1 s (the 2e-5 scale factor)."""
    return instability(cfg, 1, 1.0)


def required_N(cfg: ClockConfig, target: float, t: float = 1.0) -> int:
    """Smallest ensemble size whose instability reaches the target."""
    if target <= 0:
        raise ValueError("target instability must be positive")
    n = max(1, math.ceil((prefactor(cfg) / (target * math.sqrt(t))) ** 2))
    while n > 1 and instability(cfg, n - 1, t) <= target:
        n -= 1
    while instability(cfg, n, t) > target:
        n += 1
    return n


def density_to_count(ppb: float, volume_mm3: float, carbon_density_per_cm3: float = constants.CARBON_ATOMS_PER_CM3) -> float:
    """Number of centers at a given density (ppb of carbon sites) and volume."""
    if ppb < 0 or volume_mm3 < 0:
        raise ValueError("density and volume must be nonnegative")
    return ppb * 1e-9 * carbon_density_per_cm3 * volume_mm3 * 1e-3


def count_to_density_ppb(n: float, volume_mm3: float, carbon_density_per_cm3: float = constants.CARBON_ATOMS_PER_CM3) -> float:
    if volume_mm3 <= 0:
        raise ValueError("volume must be positive")
    return n / (carbon_density_per_cm3 * volume_mm3 * 1e-3) * 1e9


def emit_curve(
    cfg: ClockConfig,
    n_min: float = 1.0,
    n_max: float = 1e16,
    points: int = 81,
) -> list[dict]:
    """Log-spaced instability-at-1-s curve rows plus benchmark constants."""
    if n_min < 1 or n_max <= n_min:
        raise ValueError("need 1 <= n_min < n_max")
    rows = []
    for n in np.logspace(math.log10(n_min), math.log10(n_max), points):
        rows.append(
            {
                "n_centers": float(n),
                "density_ppb": count_to_density_ppb(float(n), cfg.volume_mm3, cfg.carbon_density_per_cm3),
                "instability_1s": instability(cfg, float(n), 1.0),
            }
        )
    return rows


def curve_to_csv(rows: list[dict], path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_centers", "density_ppb", "instability_1s"])
    for row in rows:
        writer.writerow(
            [repr(row["n_centers"]), repr(row["density_ppb"]), repr(row["instability_1s"])]
        )
    for name, level in BENCHMARKS.items():
        writer.writerow([f"benchmark:{name}", "", repr(level)])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
