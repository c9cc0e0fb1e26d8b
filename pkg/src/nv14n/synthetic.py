"""Synthetic measurement fixtures generated from the exact oracle.

Per-center frequency tables are not portable, so studies run on synthetic
data: frequency sets computed by exact diagonalization at chosen parameters,
with seeded Gaussian noise at experiment-scale uncertainties. The seven
center fixture mirrors the structure of the published comparison: five
consistent centers away from fabrication strain and two offset centers whose
quadrupole and parallel hyperfine couplings are shifted by tens of Hz.
"""

from __future__ import annotations

import math

import numpy as np

from . import constants
from .hamiltonian import (
    NUCLEAR_TRANSITIONS,
    FrequencySet,
    NVParams,
    Strain,
    exact_electron_frequencies,
    exact_nuclear_frequencies,
)
from .inversion import MeasuredSet

__all__ = [
    "SIGMA_MW_DEFAULT_HZ",
    "SIGMA_NUCLEAR_DEFAULT_HZ",
    "make_params",
    "measured_set",
    "seven_center_dataset",
]

SIGMA_NUCLEAR_DEFAULT_HZ = 1.6
SIGMA_MW_DEFAULT_HZ = 2000.0


def make_params(
    b_tesla: float = 0.0509,
    angle_deg: float = 0.0,
    *,
    P: float = constants.P_QUADRUPOLE_HZ,
    A_par: float = constants.A_PAR_HZ,
    A_perp: float = constants.A_PERP_HZ,
    D: float = constants.D_ZFS_HZ,
    gamma_ratio: float = constants.GAMMA_RATIO_MEASURED,
    strain: Strain | None = None,
) -> NVParams:
    """Parameters at a given field with an exact electron/nuclear ratio."""
    tilt = math.radians(angle_deg)
    omega_e = constants.GAMMA_E_HZ_PER_T * b_tesla * math.cos(tilt)
    omega_n = omega_e / gamma_ratio
    tan_tilt = math.tan(tilt)
    return NVParams(
        D=D,
        omega_e=omega_e,
        P=P,
        omega_n=omega_n,
        A_par=A_par,
        A_perp=A_perp,
        omega_ex=omega_e * tan_tilt,
        omega_nx=omega_n * tan_tilt,
        strain=strain if strain is not None else Strain(),
    )


def measured_set(
    params: NVParams,
    center_id: str = "nv-01",
    sigma_nuclear: float = SIGMA_NUCLEAR_DEFAULT_HZ,
    sigma_mw: float = SIGMA_MW_DEFAULT_HZ,
    mw_mi: int = 1,
    rng: np.random.Generator | int | None = None,
    noisy: bool = True,
    mw_noise: bool = True,
) -> MeasuredSet:
    """Oracle-generated measured set, optionally with Gaussian noise.

    ``mw_noise=False`` keeps the MW pair exact while the nuclear frequencies
    stay noisy, which isolates the nuclear-frequency error propagation.
    """
    if rng is None or isinstance(rng, int):
        rng = np.random.default_rng(rng)
    freqs = exact_nuclear_frequencies(params)
    entries = []
    for label in NUCLEAR_TRANSITIONS:
        value = freqs.frequency(label)
        if noisy:
            value += rng.normal(0.0, sigma_nuclear)
        entries.append((label, value, sigma_nuclear))
    f_plus, f_minus = exact_electron_frequencies(params, mw_mi)
    if noisy and mw_noise:
        f_plus += rng.normal(0.0, sigma_mw)
        f_minus += rng.normal(0.0, sigma_mw)
    field_hint = math.hypot(params.omega_e, params.omega_ex) / constants.GAMMA_E_HZ_PER_T
    return MeasuredSet(
        center_id=center_id,
        nuclear=FrequencySet(entries=tuple(entries)),
        mw=((mw_mi, f_plus, sigma_mw), (mw_mi, f_minus, sigma_mw)),
        field_hint_tesla=field_hint,
    )


def seven_center_dataset(
    seed: int = 20260809,
    b_tesla: float = 0.0509,
    offsets_hz: tuple[float, float] = (30.0, 50.0),
    sigma_nuclear: float = SIGMA_NUCLEAR_DEFAULT_HZ,
    sigma_mw: float = SIGMA_MW_DEFAULT_HZ,
) -> list[tuple[MeasuredSet, str]]:
    """Five consistent centers plus two with P and A_par offset by tens of Hz.

    Per-center fields are jittered by a fraction of a gauss; the last center
    sits at a slightly different field, like the published configuration.
    """
    rng = np.random.default_rng(seed)
    sets: list[tuple[MeasuredSet, str]] = []
    for i in range(5):
        params = make_params(b_tesla + rng.uniform(-2e-6, 2e-6))
        sets.append(
            (
                measured_set(
                    params,
                    center_id=f"nv-{i + 1:02d}",
                    sigma_nuclear=sigma_nuclear,
                    sigma_mw=sigma_mw,
                    rng=rng,
                ),
                "far_from_SIL",
            )
        )
    for j, offset in enumerate(offsets_hz):
        b = b_tesla + (3e-5 if j == 1 else rng.uniform(-2e-6, 2e-6))
        params = make_params(
            b,
            P=constants.P_QUADRUPOLE_HZ + offset,
            A_par=constants.A_PAR_HZ + offset,
        )
        sets.append(
            (
                measured_set(
                    params,
                    center_id=f"nv-{6 + j:02d}",
                    sigma_nuclear=sigma_nuclear,
                    sigma_mw=sigma_mw,
                    rng=rng,
                ),
                "in_SIL",
            )
        )
    return sets
