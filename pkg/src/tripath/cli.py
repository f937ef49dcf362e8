"""Command-line interface: single runs, parameter sweeps, fixture export.

``tripath run`` integrates one scenario and writes ``timeseries.csv``
(dense grid of every load, dose and ledger column), ``summary.yaml``
(final exposures, risks, pathway shares, mass balance, steady-state air
estimate) and, unless ``--no-figures`` is given, PNG figures alongside.
``tripath sweep`` runs a 2-D override grid and writes ``grid.csv``,
``sweep.yaml`` and a heatmap.  ``tripath export-fixture`` prints a
bundled scenario as an editable document.

Exit codes: 0 success, 1 model/validation/integration error, 2 I/O or
usage error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np
import yaml

from tripath.dynamics import DOSE_PATHWAYS, LEDGER_FIELDS
from tripath.errors import ModelError
from tripath.exposure import build_summary
from tripath.fixtures import FIXTURE_NAMES, builtin_fixture
from tripath.integrator import IntegrationConfig, integrate
from tripath.overrides import apply_overrides, parse_assignment
from tripath.scenario import hand_ref, load_scenario, mucosa_ref, serialize_scenario
from tripath.sweep import load_sweep_spec, run_sweep


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", metavar="PATH",
                        help="scenario document, or the name of a bundled fixture")
    source.add_argument("--fixture", choices=FIXTURE_NAMES,
                        help="bundled scenario by name")
    parser.add_argument("--set", metavar="PATH=VALUE", action="append", default=[],
                        dest="overrides", help="override one scenario value (repeatable)")
    parser.add_argument("--mode", choices=("exact-jump", "smoothed"),
                        help="event handling (default: scenario's)")
    parser.add_argument("--epsilon", type=float,
                        help="smoothing width in hours (default: scenario's)")
    parser.add_argument("--rtol", type=float, default=1e-8, help="relative tolerance")
    parser.add_argument("--atol", type=float, default=1e-4,
                        help="absolute tolerance, viral particles")
    parser.add_argument("--grid-step", type=float, default=0.01,
                        help="output grid spacing in hours")
    parser.add_argument("--tend", type=float, help="horizon in hours (default: scenario's)")
    parser.add_argument("--out-dir", default="tripath-out", help="output directory")
    parser.add_argument("--figures", action=argparse.BooleanOptionalAction, default=True,
                        help="render PNG figures next to the CSV output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tripath",
        description="Indoor virus transmission simulator (fomite, close contact, aerosol).",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="integrate one scenario")
    _add_common_arguments(run_parser)
    run_parser.set_defaults(handler=_cmd_run)

    sweep_parser = commands.add_parser("sweep", help="run a 2-D override grid")
    _add_common_arguments(sweep_parser)
    sweep_parser.add_argument("--sweep", metavar="SPEC", required=True,
                              help="sweep spec document (axes, metric)")
    sweep_parser.add_argument("--jobs", type=int, default=1,
                              help="worker processes for grid cells")
    sweep_parser.set_defaults(handler=_cmd_sweep)

    export_parser = commands.add_parser("export-fixture",
                                        help="write a bundled scenario as a document")
    export_parser.add_argument("--name", choices=FIXTURE_NAMES, required=True)
    export_parser.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    export_parser.set_defaults(handler=_cmd_export_fixture)
    return parser


def _load(args):
    if args.fixture:
        scenario = builtin_fixture(args.fixture)
    elif args.scenario in FIXTURE_NAMES:
        scenario = builtin_fixture(args.scenario)
    else:
        scenario = load_scenario(args.scenario)
    if args.overrides:
        scenario = apply_overrides(scenario, [parse_assignment(s) for s in args.overrides])
    return scenario


def _config(args) -> IntegrationConfig:
    return IntegrationConfig(
        rtol=args.rtol,
        atol=args.atol,
        grid_step=args.grid_step,
        mode=args.mode,
        epsilon=args.epsilon,
        t_end=args.tend,
    )


def _write_timeseries(result, path: Path) -> None:
    layout = result.layout
    columns: list[tuple[str, int]] = [("air", layout.air)]
    columns += [(sid, layout.surface_index[sid]) for sid in layout.surface_ids]
    columns += [(hand_ref(pid), layout.hand_index[pid]) for pid in layout.individual_ids]
    columns += [(mucosa_ref(pid), layout.mucosa_index[pid]) for pid in layout.individual_ids]
    columns += [
        (f"dose_{pathway}:{pid}", layout.dose_index[(pid, pathway)])
        for pid in layout.susceptible_ids
        for pathway in DOSE_PATHWAYS
    ]
    columns += [(name, layout.ledger_index[name]) for name in LEDGER_FIELDS]
    header = ",".join(["time"] + [label for label, _ in columns])
    data = np.column_stack([result.times, result.states[:, [i for _, i in columns]]])
    np.savetxt(path, data, fmt="%.12g", delimiter=",", header=header, comments="")


def _cmd_run(args) -> int:
    result = integrate(_load(args), _config(args))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    timeseries = out_dir / "timeseries.csv"
    _write_timeseries(result, timeseries)
    summary_path = out_dir / "summary.yaml"
    summary_path.write_text(yaml.safe_dump(build_summary(result), sort_keys=False),
                            encoding="utf-8")
    written = [timeseries, summary_path]
    if args.figures:
        from tripath.report import render_run_figures

        written += render_run_figures(result, out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args) -> int:
    scenario = _load(args)
    spec = load_sweep_spec(args.sweep)
    sweep_result = run_sweep(scenario, spec, _config(args), jobs=args.jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    grid_path = out_dir / "grid.csv"
    with open(grid_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis1", "axis2", "metric"])
        for v1, v2, value in sweep_result.rows():
            writer.writerow([f"{v1:.12g}", f"{v2:.12g}", f"{value:.12g}"])
    spec_path = out_dir / "sweep.yaml"
    spec_path.write_text(
        yaml.safe_dump(
            {
                "axis1": {"path": spec.axis1.path, "values": list(spec.axis1.values)},
                "axis2": {"path": spec.axis2.path, "values": list(spec.axis2.values)},
                "metric": spec.metric,
                "individual": spec.individual,
                "pathway": spec.pathway,
            },
            sort_keys=False,
        ),
        encoding="utf-8",
    )
    written = [grid_path, spec_path]
    if args.figures:
        from tripath.report import render_sweep_figure

        written.append(render_sweep_figure(sweep_result, out_dir))
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_export_fixture(args) -> int:
    text = serialize_scenario(builtin_fixture(args.name))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
