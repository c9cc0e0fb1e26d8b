"""Command-line pipeline: validate, simulate, fit, invert, identity, clock.

Exit codes: 0 success, 1 usage error, 2 validation or input failure,
3 numerical failure. All outputs are plain JSON/CSV without timestamps, so a
repeated invocation with the same seed is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import clock as clock_mod
from . import identity as identity_mod
from . import inversion, perturbation, ramsey
from .dataio import DatasetError, load_dataset
from .identity import CenterRecord
from .inversion import InversionError, ParamEstimate

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise UsageError(f"bad numeric list {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="nv14n", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    v = sub.add_parser("validate", help="sweep the closed-form frequency accuracy")
    v.add_argument("--b-min", type=float, default=400.0)
    v.add_argument("--b-max", type=float, default=600.0)
    v.add_argument("--b-step", type=float, default=25.0)
    v.add_argument("--angles", type=str, default="0,0.05,0.1")
    v.add_argument("--strains", type=str, default="0,1e6")
    v.add_argument("--tolerance", type=float, default=perturbation.DEVIATION_TOLERANCE_HZ)
    v.add_argument("--drop-small-denominators", action="store_true")
    v.add_argument("--out", type=str, default="validation_sweep.csv")

    s = sub.add_parser("simulate", help="simulate a Ramsey trace")
    s.add_argument("--detuning", type=float, required=True)
    s.add_argument("--t2-star", type=float, default=0.010)
    s.add_argument("--stretch", type=float, default=1.0)
    s.add_argument("--amplitude", type=float, default=0.4)
    s.add_argument("--offset", type=float, default=0.0)
    s.add_argument("--baseline", type=float, default=0.5)
    s.add_argument("--phase", type=float, default=0.5)
    s.add_argument("--t-max", type=float, default=0.012)
    s.add_argument("--points", type=int, default=121)
    s.add_argument("--shots", type=int, default=17000)
    s.add_argument("--bright", type=float, default=0.032)
    s.add_argument("--dark", type=float, default=0.012)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=str, required=True)

    f = sub.add_parser("fit", help="fit a Ramsey trace CSV")
    f.add_argument("--trace", type=str, required=True)
    f.add_argument("--rf-drive", type=float, default=None)
    f.add_argument("--out", type=str, default=None)

    i = sub.add_parser("invert", help="recover Hamiltonian parameters from a dataset")
    i.add_argument("--dataset", type=str, required=True)
    i.add_argument("--model", type=str, choices=("4", "5"), default="4")
    i.add_argument("--center", type=str, default=None)
    i.add_argument("--no-errors", action="store_true")
    i.add_argument("--out", type=str, default=None)

    d = sub.add_parser("identity", help="cross-center consistency report")
    d.add_argument("--estimates", type=str, required=True)
    d.add_argument("--threshold", type=float, default=2.0)
    d.add_argument("--out", type=str, default=None)
    d.add_argument("--csv", type=str, default=None)

    c = sub.add_parser("clock", help="ensemble clock instability")
    c.add_argument("--n", type=float, default=None)
    c.add_argument("--target", type=float, default=None)
    c.add_argument("--time", type=float, default=1.0)
    c.add_argument("--curve", type=str, default=None)
    c.add_argument("--n-min", type=float, default=1.0)
    c.add_argument("--n-max", type=float, default=1e16)
    c.add_argument("--points", type=int, default=81)

    p = sub.add_parser("pipeline", help="dataset -> fits -> estimates -> report")
    p.add_argument("--dataset", type=str, required=True)
    p.add_argument("--model", type=str, choices=("4", "5"), default="4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", type=str, required=True)

    return parser


def _cmd_validate(args) -> int:
    if args.b_step <= 0 or args.b_max < args.b_min:
        raise UsageError("need b-min <= b-max and a positive b-step")
    b_values = []
    b = args.b_min
    while b <= args.b_max + 1e-9:
        b_values.append(round(b, 9))
        b += args.b_step
    report = perturbation.validation_sweep(
        b_gauss=tuple(b_values),
        angles_deg=_float_list(args.angles),
        strains_hz=_float_list(args.strains),
        keep_small_denominators=not args.drop_small_denominators,
        tolerance_hz=args.tolerance,
    )
    report.to_csv(args.out)
    print(f"report written to {args.out}")
    print(
        f"max in-domain deviation: {report.max_deviation():.6f} Hz "
        f"(tolerance {report.tolerance_hz:g} Hz)"
    )
    return EXIT_VALIDATION if report.any_in_domain_flagged() else EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = ramsey.RamseyConfig(
        true_detuning=args.detuning,
        t2_star=args.t2_star,
        stretch_p=args.stretch,
        amplitude_a=args.amplitude,
        offset_b=args.offset,
        baseline_c=args.baseline,
        phase_phi0=args.phase,
        time_points=ramsey.uniform_times(args.t_max, args.points),
        shots_per_point=args.shots,
        photons_per_shot_bright=args.bright,
        photons_per_shot_dark=args.dark,
        rng_seed=args.seed,
    )
    ramsey.simulate(cfg).to_csv(args.out)
    print(f"trace written to {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    trace = ramsey.RamseyTrace.from_csv(args.trace)
    result = ramsey.fit(trace)
    doc = result.to_dict()
    if args.rf_drive is not None:
        freq, sigma = ramsey.absolute_frequency(args.rf_drive, result)
        doc["absolute_frequency_hz"] = freq
        doc["absolute_frequency_sigma_hz"] = sigma
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"fit written to {args.out}")
    print(
        f"detuning: {result.detuning:.3f} +- {result.detuning_sigma:.3f} Hz "
        f"(chi2/dof {result.chi2_reduced:.2f}, converged {result.converged})"
    )
    if not result.converged:
        return EXIT_NUMERICAL
    return EXIT_OK


def _measured_sets_from_dataset(dataset, model_tag):
    """Fit any referenced traces, then build complete measured sets."""
    fits = {}
    sets = []
    for center in dataset.centers:
        extra = []
        for ref in center.traces:
            trace = ramsey.RamseyTrace.from_csv(ref.path)
            result = ramsey.fit(trace)
            freq, sigma = ramsey.absolute_frequency(ref.rf_drive_hz, result)
            extra.append((ref.label, freq, sigma))
            fits[f"{center.center_id}:{ref.label.short()}"] = result.to_dict()
        sets.append((center.to_measured_set(extra), center.cohort))
    return sets, fits


def _cmd_invert(args) -> int:
    dataset = load_dataset(args.dataset)
    model = "four_param" if args.model == "4" else "five_param"
    sets, _ = _measured_sets_from_dataset(dataset, model)
    estimates = []
    for measured, _cohort in sets:
        if args.center is not None and measured.center_id != args.center:
            continue
        estimate = inversion.fit_parameters(
            measured, model=model, compute_errors=not args.no_errors
        )
        estimates.append(estimate)
        print(
            f"{measured.center_id}: P={estimate.values['P']:.2f} "
            f"A_par={estimate.values['A_par']:.2f} "
            f"A_perp={estimate.values['A_perp']:.1f} "
            f"residual={estimate.weighted_residual:.3f} Hz"
        )
    if not estimates:
        raise DatasetError(f"no center matching {args.center!r} in dataset")
    if args.out:
        payload = [e.to_dict() for e in estimates]
        Path(args.out).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"estimates written to {args.out}")
    return EXIT_OK


def _records_from_estimates(path, cohorts=None):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    records = []
    for entry in doc:
        cohort = entry.get("cohort", "other") if cohorts is None else cohorts.get(
            entry["center_id"], "other"
        )
        records.append(
            CenterRecord(
                center_id=entry["center_id"],
                cohort_tag=cohort,
                estimate=ParamEstimate.from_dict(entry),
            )
        )
    return records


def _cmd_identity(args) -> int:
    records = _records_from_estimates(args.estimates)
    report = identity_mod.cohort_report(records, threshold=args.threshold)
    if args.out:
        Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
        print(f"report written to {args.out}")
    if args.csv:
        report.to_csv(args.csv)
        print(f"plot rows written to {args.csv}")
    for key, res in report.results.items():
        print(
            f"{key}: mean {res.mean:.4f} +- {res.sigma:.4f} "
            f"(chi2/dof {res.chi2:.1f}/{res.dof}, consistent {res.consistent})"
        )
    return EXIT_OK


def _cmd_clock(args) -> int:
    cfg = clock_mod.ClockConfig()
    did_something = False
    if args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be at least 1")
        value = clock_mod.instability(cfg, args.n, args.time)
        print(f"instability(N={args.n:g}, T={args.time:g} s) = {value:.3e}")
        did_something = True
    if args.target is not None:
        n = clock_mod.required_N(cfg, args.target, args.time)
        print(f"required N for {args.target:.3e} at T={args.time:g} s: {n:.4e}")
        did_something = True
    if args.curve is not None:
        rows = clock_mod.emit_curve(cfg, args.n_min, args.n_max, args.points)
        clock_mod.curve_to_csv(rows, args.curve)
        print(f"curve written to {args.curve}")
        did_something = True
    if not did_something:
        raise UsageError("clock needs --n, --target or --curve")
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    dataset = load_dataset(args.dataset)
    model = "four_param" if args.model == "4" else "five_param"
    sets, trace_fits = _measured_sets_from_dataset(dataset, model)

    def run_one(item):
        measured, cohort = item
        estimate = inversion.fit_parameters(measured, model=model)
        return measured.center_id, cohort, estimate

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, sets))
    else:
        results = [run_one(item) for item in sets]
    results.sort(key=lambda r: r[0])

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    estimates_doc = []
    records = []
    for center_id, cohort, estimate in results:
        doc = estimate.to_dict()
        doc["cohort"] = cohort
        estimates_doc.append(doc)
        records.append(CenterRecord(center_id=center_id, cohort_tag=cohort, estimate=estimate))
        print(
            f"{center_id} [{cohort}]: P={estimate.values['P']:.2f} "
            f"+- {estimate.sigmas['P']:.2f} Hz, residual {estimate.weighted_residual:.3f} Hz"
        )
    (out_dir / "estimates.json").write_text(
        json.dumps(estimates_doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    report = identity_mod.cohort_report(records)
    (out_dir / "cohort_report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    report.to_csv(out_dir / "cohort_report.csv")
    if trace_fits:
        (out_dir / "trace_fits.json").write_text(
            json.dumps(trace_fits, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    summary = {
        "model": model,
        "seed": args.seed,
        "centers": [r[0] for r in results],
        "consistent": {k: res.consistent for k, res in report.results.items()},
    }
    (out_dir / "pipeline_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"bundle written to {out_dir}")
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "invert": _cmd_invert,
    "identity": _cmd_identity,
    "clock": _cmd_clock,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (DatasetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InversionError, ramsey.FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
