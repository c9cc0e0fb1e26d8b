"""Ground-state Hamiltonian of the NV- electron coupled to its intrinsic 14N.

The full 9x9 Hamiltonian is

    H = (D + Ez) Sz^2 + we Sz + P Iz^2 + wn Iz + A_par Sz Iz
        + A_perp (Sx Ix + Sy Iy) + wex Sx + wnx Ix + strain terms,

with every coefficient in Hz. Transition frequencies are reported as the
energy of the reached state minus the energy of the mI = 0 (nuclear) or
mS = 0 (electron) reference state in the same subspace, so the six nuclear
frequencies are negative at typical fields where the quadrupole term
dominates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import constants, spin_core
from .spin_core import BASIS_MI, BASIS_MS, basis_index, kron, spin1_operators

__all__ = [
    "NVParams",
    "Strain",
    "TransitionLabel",
    "FrequencySet",
    "NUCLEAR_TRANSITIONS",
    "build_full",
    "electron_transitions",
    "exact_electron_frequencies",
    "exact_nuclear_frequencies",
    "field_sensitivity",
    "labeled_energies",
    "transition_frequency",
]

TRANSVERSE_RATIO_RTOL = 1e-12
PARAMS_SCHEMA_VERSION = 1

# Field step for sensitivity estimates, matching the stabilization scale of
# interest (0.1 uT).
SENSITIVITY_STEP_T = 1e-7


@dataclass(frozen=True)
class Strain:
    """Electron-spin strain couplings in Hz.

    ``ez`` only renormalizes the zero-field splitting and is added to the
    Sz^2 coefficient; the primed pair drives single-quantum transitions and
    the unprimed pair double-quantum transitions.
    """

    ez: float = 0.0
    ex_prime: float = 0.0
    ey_prime: float = 0.0
    ex: float = 0.0
    ey: float = 0.0

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.ez, self.ex_prime, self.ey_prime, self.ex, self.ey)

    def transverse_magnitude(self) -> float:
        return max(abs(self.ex_prime), abs(self.ey_prime), abs(self.ex), abs(self.ey))


@dataclass(frozen=True)
class NVParams:
    """Hamiltonian coefficients in Hz.

    The transverse Zeeman pair must correspond to a common tilt of the field,
    i.e. omega_ex / omega_e == omega_nx / omega_n whenever both are nonzero.
    """

    D: float
    omega_e: float
    P: float
    omega_n: float
    A_par: float
    A_perp: float
    omega_ex: float = 0.0
    omega_nx: float = 0.0
    strain: Strain = field(default_factory=Strain)

    def __post_init__(self) -> None:
        if abs(self.omega_e) >= self.D:
            raise ValueError(
                "|omega_e| must stay below D (no ground-state level inversion); "
                f"got omega_e={self.omega_e:g}, D={self.D:g}"
            )
        if self.omega_ex != 0.0 and self.omega_nx != 0.0:
            if self.omega_e == 0.0 or self.omega_n == 0.0:
                raise ValueError(
                    "transverse terms require nonzero longitudinal Zeeman terms"
                )
            r_e = self.omega_ex / self.omega_e
            r_n = self.omega_nx / self.omega_n
            if abs(r_e - r_n) > TRANSVERSE_RATIO_RTOL * max(abs(r_e), abs(r_n)):
                raise ValueError(
                    "omega_ex/omega_e and omega_nx/omega_n must agree "
                    f"(got {r_e:.15g} vs {r_n:.15g})"
                )

    @classmethod
    def from_field(
        cls,
        b_tesla: float,
        angle_deg: float = 0.0,
        *,
        D: float = constants.D_ZFS_HZ,
        P: float = constants.P_QUADRUPOLE_HZ,
        A_par: float = constants.A_PAR_HZ,
        A_perp: float = constants.A_PERP_HZ,
        gamma_e: float = constants.GAMMA_E_HZ_PER_T,
        gamma_n: float = constants.GAMMA_N_HZ_PER_T,
        strain: Strain | None = None,
    ) -> "NVParams":
        """Build parameters for a field of given magnitude and tilt angle."""
        tilt = math.radians(angle_deg)
        omega_e = gamma_e * b_tesla * math.cos(tilt)
        omega_n = gamma_n * b_tesla * math.cos(tilt)
        tan_tilt = math.tan(tilt)
        return cls(
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

    def replace(self, **kwargs) -> "NVParams":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return {
            "version": PARAMS_SCHEMA_VERSION,
            "d_hz": self.D,
            "omega_e_hz": self.omega_e,
            "p_hz": self.P,
            "omega_n_hz": self.omega_n,
            "a_par_hz": self.A_par,
            "a_perp_hz": self.A_perp,
            "omega_ex_hz": self.omega_ex,
            "omega_nx_hz": self.omega_nx,
            "strain_hz": {
                "ez": self.strain.ez,
                "ex_prime": self.strain.ex_prime,
                "ey_prime": self.strain.ey_prime,
                "ex": self.strain.ex,
                "ey": self.strain.ey,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "NVParams":
        if doc.get("version") != PARAMS_SCHEMA_VERSION:
            raise ValueError(f"unsupported NVParams schema version: {doc.get('version')}")
        strain = doc.get("strain_hz", {})
        return cls(
            D=float(doc["d_hz"]),
            omega_e=float(doc["omega_e_hz"]),
            P=float(doc["p_hz"]),
            omega_n=float(doc["omega_n_hz"]),
            A_par=float(doc["a_par_hz"]),
            A_perp=float(doc["a_perp_hz"]),
            omega_ex=float(doc.get("omega_ex_hz", 0.0)),
            omega_nx=float(doc.get("omega_nx_hz", 0.0)),
            strain=Strain(
                ez=float(strain.get("ez", 0.0)),
                ex_prime=float(strain.get("ex_prime", 0.0)),
                ey_prime=float(strain.get("ey_prime", 0.0)),
                ex=float(strain.get("ex", 0.0)),
                ey=float(strain.get("ey", 0.0)),
            ),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NVParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TransitionLabel:
    """One of the six nuclear transitions or two electron MW transitions.

    Nuclear: fixed electron subspace ``subspace`` (mS), nuclear branch
    0 <-> ``branch``. Electron: mS branch 0 <-> ``branch`` at fixed nuclear
    projection ``mi``.
    """

    kind: str
    subspace: int | None = None
    branch: int = 1
    mi: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("nuclear", "electron"):
            raise ValueError(f"unknown transition kind: {self.kind!r}")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if self.kind == "nuclear":
            if self.subspace not in BASIS_MS:
                raise ValueError("nuclear transitions need an electron subspace mS")
            if self.mi is not None:
                raise ValueError("nuclear transitions carry no spectator mI")
        else:
            if self.mi not in BASIS_MI:
                raise ValueError("electron transitions need a spectator mI")
            if self.subspace is not None:
                raise ValueError("electron transitions carry no mS subspace")

    @classmethod
    def nuclear(cls, ms: int, branch: int) -> "TransitionLabel":
        return cls(kind="nuclear", subspace=ms, branch=branch)

    @classmethod
    def electron(cls, branch: int, mi: int) -> "TransitionLabel":
        return cls(kind="electron", branch=branch, mi=mi)

    def short(self) -> str:
        if self.kind == "nuclear":
            return f"n_ms{self.subspace:+d}_0to{self.branch:+d}"
        return f"e_0to{self.branch:+d}_mi{self.mi:+d}"


NUCLEAR_TRANSITIONS = tuple(
    TransitionLabel.nuclear(ms, branch) for ms in BASIS_MS for branch in (1, -1)
)


def electron_transitions(mi: int) -> tuple[TransitionLabel, TransitionLabel]:
    return (TransitionLabel.electron(1, mi), TransitionLabel.electron(-1, mi))


@dataclass(frozen=True)
class FrequencySet:
    """Labeled transition frequencies with their 1-sigma uncertainties (Hz)."""

    entries: tuple[tuple[TransitionLabel, float, float], ...]

    def __post_init__(self) -> None:
        labels = [label for label, _, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate transition labels in FrequencySet")

    def labels(self) -> tuple[TransitionLabel, ...]:
        return tuple(label for label, _, _ in self.entries)

    def frequency(self, label: TransitionLabel) -> float:
        for lab, freq, _ in self.entries:
            if lab == label:
                return freq
        raise KeyError(f"no entry for {label}")

    def sigma(self, label: TransitionLabel) -> float:
        for lab, _, sig in self.entries:
            if lab == label:
                return sig
        raise KeyError(f"no entry for {label}")

    def nuclear_entries(self) -> tuple[tuple[TransitionLabel, float, float], ...]:
        return tuple(e for e in self.entries if e[0].kind == "nuclear")

    def nuclear_array(
        self, order: tuple[TransitionLabel, ...] = NUCLEAR_TRANSITIONS
    ) -> np.ndarray:
        return np.array([self.frequency(label) for label in order], dtype=float)


# Static operator table; the Hamiltonian is a linear combination of these.
_SX, _SY, _SZ = spin1_operators()
_I3 = np.eye(3, dtype=complex)
_OP_SZ2 = kron(_SZ @ _SZ, _I3)
_OP_SZ = kron(_SZ, _I3)
_OP_IZ2 = kron(_I3, _SZ @ _SZ)
_OP_IZ = kron(_I3, _SZ)
_OP_SZIZ = kron(_SZ, _SZ)
_OP_FLIPFLOP = kron(_SX, _SX) + kron(_SY, _SY)
_OP_SX = kron(_SX, _I3)
_OP_IX = kron(_I3, _SX)
_OP_STRAIN_SQX = kron(_SX @ _SZ + _SZ @ _SX, _I3)
_OP_STRAIN_SQY = kron(_SY @ _SZ + _SZ @ _SY, _I3)
_OP_STRAIN_DQX = kron(_SY @ _SY - _SX @ _SX, _I3)
_OP_STRAIN_DQY = kron(_SX @ _SY + _SY @ _SX, _I3)


def build_full(p: NVParams) -> np.ndarray:
    """Assemble the full 9x9 Hamiltonian (Hz) for the given parameters."""
    st = p.strain
    h = (
        (p.D + st.ez) * _OP_SZ2
        + p.omega_e * _OP_SZ
        + p.P * _OP_IZ2
        + p.omega_n * _OP_IZ
        + p.A_par * _OP_SZIZ
        + p.A_perp * _OP_FLIPFLOP
        + p.omega_ex * _OP_SX
        + p.omega_nx * _OP_IX
    )
    if st.ex_prime != 0.0:
        h = h + st.ex_prime * _OP_STRAIN_SQX
    if st.ey_prime != 0.0:
        h = h + st.ey_prime * _OP_STRAIN_SQY
    if st.ex != 0.0:
        h = h + st.ex * _OP_STRAIN_DQX
    if st.ey != 0.0:
        h = h + st.ey * _OP_STRAIN_DQY
    return h


def labeled_energies(p: NVParams) -> spin_core.EigenSystem:
    """Exact labeled eigensystem of the full Hamiltonian."""
    return spin_core.label_states(spin_core.eigh(build_full(p)))


def exact_nuclear_frequencies(p: NVParams) -> FrequencySet:
    """Six nuclear transition frequencies from exact diagonalization.

    Each frequency is E(|mS, mI=branch>) - E(|mS, mI=0>), which makes the
    quadrupole-dominated values negative, matching the signed convention used
    throughout the toolkit.
    """
    es = labeled_energies(p)
    entries = []
    for label in NUCLEAR_TRANSITIONS:
        freq = es.value_of(label.subspace, label.branch) - es.value_of(
            label.subspace, 0
        )
        entries.append((label, freq, 0.0))
    return FrequencySet(entries=tuple(entries))


def exact_electron_frequencies(p: NVParams, mi: int = 1) -> tuple[float, float]:
    """MW transition pair E(|mS=+/-1, mI>) - E(|mS=0, mI>) for the chosen mI."""
    es = labeled_energies(p)
    f_plus = es.value_of(1, mi) - es.value_of(0, mi)
    f_minus = es.value_of(-1, mi) - es.value_of(0, mi)
    return f_plus, f_minus


def transition_frequency(p: NVParams, label: TransitionLabel) -> float:
    """Exact frequency of a single labeled transition."""
    if label.kind == "nuclear":
        return exact_nuclear_frequencies(p).frequency(label)
    f_plus, f_minus = exact_electron_frequencies(p, label.mi)
    return f_plus if label.branch == 1 else f_minus


def _shift_field(p: NVParams, db_tesla: float, gamma_e: float, gamma_n: float) -> NVParams:
    norm_e = math.hypot(p.omega_e, p.omega_ex)
    if norm_e > 0.0:
        cos_t = p.omega_e / norm_e
        sin_t = p.omega_ex / norm_e
    else:
        cos_t, sin_t = 1.0, 0.0
    return p.replace(
        omega_e=p.omega_e + gamma_e * db_tesla * cos_t,
        omega_ex=p.omega_ex + gamma_e * db_tesla * sin_t,
        omega_n=p.omega_n + gamma_n * db_tesla * cos_t,
        omega_nx=p.omega_nx + gamma_n * db_tesla * sin_t,
    )


def field_sensitivity(
    p: NVParams,
    t: TransitionLabel,
    gamma_ratio: float = constants.GAMMA_RATIO_NOMINAL,
) -> float:
    """Transition frequency slope against field magnitude, in Hz per uT.

    Central finite difference with a 0.1 uT step: the four Zeeman terms are
    scaled along the existing field direction using the electron coefficient
    from the constants registry and the supplied electron/nuclear ratio.
    """
    gamma_e = constants.GAMMA_E_HZ_PER_T
    gamma_n = gamma_e / gamma_ratio
    up = _shift_field(p, SENSITIVITY_STEP_T, gamma_e, gamma_n)
    down = _shift_field(p, -SENSITIVITY_STEP_T, gamma_e, gamma_n)
    df = transition_frequency(up, t) - transition_frequency(down, t)
    return df / (2.0 * SENSITIVITY_STEP_T * 1e6)
