"""Cross-center statistics: weighted averages, pulls and consistency verdicts.

Centers are compared through inverse-variance weighted means. Pulls are
reported in two flavors: against the full reference mean in units of the
center's own sigma (these square-sum to the standard chi-square with n-1
degrees of freedom) and against the leave-one-out mean with the combined
uncertainty in the denominator (free of self-correlation; the default for
verdicts). Parameter-specific inclusion rules control which cohort defines
the reference mean.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .inversion import ParamEstimate

__all__ = [
    "CenterRecord",
    "CenterPull",
    "CohortReport",
    "ConsistencyResult",
    "DEFAULT_INCLUSION",
    "PARAMETER_KEYS",
    "cohort_report",
    "consistency",
    "parameter_value",
    "weighted_mean",
]

PARAMETER_KEYS = ("P", "A_par", "A_perp", "gamma_ratio")

# Which cohort tags feed the reference mean of each parameter; None means all
# centers contribute.
DEFAULT_INCLUSION = {
    "P": ("far_from_SIL",),
    "A_par": ("far_from_SIL",),
    "A_perp": None,
    "gamma_ratio": None,
}

VERDICT_THRESHOLD = 2.0


@dataclass(frozen=True)
class CenterRecord:
    center_id: str
    cohort_tag: str
    estimate: ParamEstimate


def parameter_value(record: CenterRecord, key: str) -> tuple[float, float]:
    """(value, sigma) of one identity parameter for one center."""
    e = record.estimate
    if key == "gamma_ratio":
        return e.gamma_ratio, e.gamma_ratio_sigma
    if key not in e.values:
        raise KeyError(f"estimate for {record.center_id} has no parameter {key!r}")
    return e.values[key], e.sigmas[key]


def weighted_mean(values, sigmas) -> tuple[float, float]:
    """Inverse-variance weighted mean and its standard error."""
    values = np.asarray(values, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    if values.size == 0:
        raise ValueError("weighted_mean needs at least one value")
    if values.shape != sigmas.shape:
        raise ValueError("values and sigmas must have equal length")
    if np.any(sigmas <= 0):
        raise ValueError("sigmas must be positive")
    w = 1.0 / sigmas**2
    mean = float(np.sum(w * values) / np.sum(w))
    return mean, float(1.0 / np.sqrt(np.sum(w)))


@dataclass(frozen=True)
class CenterPull:
    center_id: str
    cohort_tag: str
    value: float
    sigma: float
    pull: float       # vs full reference mean, in units of the center sigma
    pull_loo: float   # vs leave-one-out mean, combined-uncertainty units
    included: bool    # contributes to the reference mean
    within: bool      # |pull_loo| at or below the verdict threshold


@dataclass(frozen=True)
class ConsistencyResult:
    parameter: str
    mean: float
    sigma: float
    n_included: int
    chi2: float
    dof: int
    pulls: tuple[CenterPull, ...]
    consistent: bool
    threshold: float

    def pull_of(self, center_id: str) -> CenterPull:
        for pull in self.pulls:
            if pull.center_id == center_id:
                return pull
        raise KeyError(center_id)


def consistency(
    records,
    parameter: str,
    reference_records=None,
    threshold: float = VERDICT_THRESHOLD,
) -> ConsistencyResult:
    """Pulls and chi-square of one parameter across centers.

    ``reference_records`` (default: all records) define the weighted mean;
    pulls are evaluated for every record against that mean. The verdict is
    consistent iff every evaluated |pull_loo| stays at or below the
    threshold.
    """
    records = list(records)
    if len(records) < 1:
        raise ValueError("consistency needs at least one record")
    reference = list(reference_records) if reference_records is not None else records
    ref_ids = {r.center_id for r in reference}

    ref_vals = np.array([parameter_value(r, parameter)[0] for r in reference])
    ref_sigs = np.array([parameter_value(r, parameter)[1] for r in reference])
    mean, mean_sigma = weighted_mean(ref_vals, ref_sigs)

    pulls = []
    chi2 = 0.0
    for record in records:
        value, sigma = parameter_value(record, parameter)
        pull_full = (value - mean) / sigma
        if record.center_id in ref_ids and len(reference) >= 2:
            keep = [r for r in reference if r.center_id != record.center_id]
            loo_vals = np.array([parameter_value(r, parameter)[0] for r in keep])
            loo_sigs = np.array([parameter_value(r, parameter)[1] for r in keep])
            loo_mean, loo_sigma = weighted_mean(loo_vals, loo_sigs)
        else:
            loo_mean, loo_sigma = mean, mean_sigma
        pull_loo = (value - loo_mean) / math.sqrt(sigma**2 + loo_sigma**2)
        if record.center_id in ref_ids:
            chi2 += pull_full**2
        pulls.append(
            CenterPull(
                center_id=record.center_id,
                cohort_tag=record.cohort_tag,
                value=value,
                sigma=sigma,
                pull=pull_full,
                pull_loo=pull_loo,
                included=record.center_id in ref_ids,
                within=abs(pull_loo) <= threshold,
            )
        )
    return ConsistencyResult(
        parameter=parameter,
        mean=mean,
        sigma=mean_sigma,
        n_included=len(reference),
        chi2=chi2,
        dof=max(len(reference) - 1, 0),
        pulls=tuple(pulls),
        consistent=all(p.within for p in pulls),
        threshold=threshold,
    )


@dataclass(frozen=True)
class CohortReport:
    """Consistency results for all identity parameters."""

    results: dict

    def result(self, parameter: str) -> ConsistencyResult:
        return self.results[parameter]

    def to_dict(self) -> dict:
        out = {}
        for key, res in self.results.items():
            out[key] = {
                "mean": res.mean,
                "sigma": res.sigma,
                "n_included": res.n_included,
                "chi2": res.chi2,
                "dof": res.dof,
                "consistent": res.consistent,
                "threshold": res.threshold,
                "centers": [
                    {
                        "center_id": p.center_id,
                        "cohort": p.cohort_tag,
                        "value": p.value,
                        "sigma": p.sigma,
                        "pull": p.pull,
                        "pull_loo": p.pull_loo,
                        "included": p.included,
                        "within": p.within,
                    }
                    for p in res.pulls
                ],
            }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self, path=None) -> str:
        """Plot-ready rows: one line per (parameter, center) plus mean lines."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [
                "parameter",
                "center_id",
                "cohort",
                "value",
                "sigma",
                "cohort_mean",
                "cohort_mean_sigma",
                "pull",
                "pull_loo",
                "included",
            ]
        )
        for key, res in self.results.items():
            for p in res.pulls:
                writer.writerow(
                    [
                        key,
                        p.center_id,
                        p.cohort_tag,
                        repr(p.value),
                        repr(p.sigma),
                        repr(res.mean),
                        repr(res.sigma),
                        f"{p.pull:.4f}",
                        f"{p.pull_loo:.4f}",
                        str(p.included).lower(),
                    ]
                )
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def cohort_report(
    records,
    inclusion=None,
    threshold: float = VERDICT_THRESHOLD,
    parameters=PARAMETER_KEYS,
) -> CohortReport:
    """Per-parameter consistency across all centers.

    The inclusion rule maps each parameter to the cohort tags whose centers
    define the reference mean (None includes everyone); when no center
    carries an included tag the rule degenerates to all centers.
    """
    records = list(records)
    if not records:
        raise ValueError("cohort_report needs at least one record")
    rule = {**DEFAULT_INCLUSION, **(inclusion or {})}
    results = {}
    for key in parameters:
        tags = rule.get(key)
        if tags is None:
            reference = records
        else:
            reference = [r for r in records if r.cohort_tag in tags] or records
        results[key] = consistency(
            records, key, reference_records=reference, threshold=threshold
        )
    return CohortReport(results=results)
