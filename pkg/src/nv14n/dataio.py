"""Versioned JSON dataset schema shared by the library and the CLI.

A dataset file holds a list of centers, each with its labeled nuclear
transitions, the MW pair, an optional cohort tag and optional references to
Ramsey trace CSV files that supply transitions not listed explicitly:

    {
      "version": 1,
      "centers": [
        {
          "center_id": "nv-01",
          "cohort": "far_from_SIL",
          "b_hint_mt": 50.9,
          "transitions": [
            {"ms": -1, "branch": -1, "freq_hz": -6958568.8, "sigma_hz": 1.6},
            ...
          ],
          "mw": [{"mi": 1, "freq_hz": 4.29e9, "sigma_hz": 2000.0}, ...],
          "traces": [
            {"path": "trace.csv", "ms": -1, "branch": -1,
             "rf_drive_hz": -6959102.0}
          ]
        }
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .hamiltonian import FrequencySet, NUCLEAR_TRANSITIONS, TransitionLabel
from .inversion import MeasuredSet

__all__ = [
    "DatasetError",
    "Dataset",
    "DatasetCenter",
    "TraceRef",
    "dataset_to_dict",
    "load_dataset",
    "measured_set_to_dict",
    "save_dataset",
]

DATASET_SCHEMA_VERSION = 1


class DatasetError(ValueError):
    """Raised for malformed or incomplete dataset documents."""


@dataclass(frozen=True)
class TraceRef:
    path: str
    label: TransitionLabel
    rf_drive_hz: float


@dataclass
class DatasetCenter:
    center_id: str
    cohort: str
    field_hint_tesla: float
    transitions: list  # (TransitionLabel, freq_hz, sigma_hz)
    mw: list           # (mi, freq_hz, sigma_hz)
    traces: list = field(default_factory=list)

    def to_measured_set(self, extra_transitions=()) -> MeasuredSet:
        """Build the MeasuredSet, merging in trace-derived transitions."""
        entries = {label: (freq, sigma) for label, freq, sigma in self.transitions}
        for label, freq, sigma in extra_transitions:
            entries[label] = (freq, sigma)
        missing = [t.short() for t in NUCLEAR_TRANSITIONS if t not in entries]
        if missing:
            raise DatasetError(
                f"center {self.center_id} is missing transitions: {', '.join(missing)}"
            )
        freq_set = FrequencySet(
            entries=tuple((lab, *entries[lab]) for lab in NUCLEAR_TRANSITIONS)
        )
        try:
            return MeasuredSet(
                center_id=self.center_id,
                nuclear=freq_set,
                mw=tuple(self.mw),
                field_hint_tesla=self.field_hint_tesla,
            )
        except ValueError as exc:
            raise DatasetError(f"center {self.center_id}: {exc}") from exc


@dataclass
class Dataset:
    version: int
    centers: list


def _parse_transition(row: dict, center_id: str) -> tuple[TransitionLabel, float, float]:
    try:
        label = TransitionLabel.nuclear(int(row["ms"]), int(row["branch"]))
        return label, float(row["freq_hz"]), float(row["sigma_hz"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"center {center_id}: bad transition record {row!r}") from exc


def load_dataset(path) -> Dataset:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
    if doc.get("version") != DATASET_SCHEMA_VERSION:
        raise DatasetError(f"unsupported dataset version: {doc.get('version')!r}")
    centers_doc = doc.get("centers")
    if not isinstance(centers_doc, list) or not centers_doc:
        raise DatasetError("dataset has no centers")
    centers = []
    seen = set()
    for entry in centers_doc:
        center_id = str(entry.get("center_id", "")).strip()
        if not center_id:
            raise DatasetError("center without center_id")
        if center_id in seen:
            raise DatasetError(f"duplicate center_id {center_id!r}")
        seen.add(center_id)
        transitions = [
            _parse_transition(row, center_id) for row in entry.get("transitions", [])
        ]
        mw = []
        for row in entry.get("mw", []):
            try:
                mw.append((int(row["mi"]), float(row["freq_hz"]), float(row["sigma_hz"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"center {center_id}: bad MW record {row!r}") from exc
        if len(mw) != 2:
            raise DatasetError(f"center {center_id}: exactly two MW records required")
        traces = []
        for row in entry.get("traces", []):
            try:
                traces.append(
                    TraceRef(
                        path=str(row["path"]),
                        label=TransitionLabel.nuclear(int(row["ms"]), int(row["branch"])),
                        rf_drive_hz=float(row["rf_drive_hz"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"center {center_id}: bad trace record {row!r}") from exc
        centers.append(
            DatasetCenter(
                center_id=center_id,
                cohort=str(entry.get("cohort", "other")),
                field_hint_tesla=float(entry.get("b_hint_mt", 50.9)) * 1e-3,
                transitions=transitions,
                mw=mw,
                traces=traces,
            )
        )
    return Dataset(version=DATASET_SCHEMA_VERSION, centers=centers)


def measured_set_to_dict(m: MeasuredSet, cohort: str = "other") -> dict:
    return {
        "center_id": m.center_id,
        "cohort": cohort,
        "b_hint_mt": m.field_hint_tesla * 1e3,
        "transitions": [
            {
                "ms": label.subspace,
                "branch": label.branch,
                "freq_hz": freq,
                "sigma_hz": sigma,
            }
            for label, freq, sigma in m.nuclear.entries
        ],
        "mw": [
            {"mi": mi, "freq_hz": freq, "sigma_hz": sigma} for mi, freq, sigma in m.mw
        ],
    }


def dataset_to_dict(sets_with_cohorts) -> dict:
    return {
        "version": DATASET_SCHEMA_VERSION,
        "centers": [measured_set_to_dict(m, cohort) for m, cohort in sets_with_cohorts],
    }


def save_dataset(sets_with_cohorts, path) -> None:
    Path(path).write_text(
        json.dumps(dataset_to_dict(sets_with_cohorts), indent=2, sort_keys=True),
        encoding="utf-8",
    )
