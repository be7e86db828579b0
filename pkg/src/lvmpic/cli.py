"""Command-line interface: run simulations, print presets, analyze outputs."""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import diagnostics, runner

LANDAU_REFERENCE_SLOPE = -0.3066


def _cmd_run(args):
    with open(args.config) as fh:
        text = fh.read()
    config = runner.parse_config(text)
    if args.output is not None:
        config = replace(config, output_dir=args.output)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    record = runner.run(config)
    series = record.series
    print(f"steps:            {config.n_steps}")
    print(f"final H_total:    {series['H_total'][-1]:.9e}")
    print(f"max |dH/H|:       {np.max(series['rel_energy_err']):.3e}")
    print(f"max |div b|_inf:  {np.max(series['div_b_inf']):.3e}")
    print(f"wall time [s]:    {record.timings['total']:.2f}")
    if config.output_dir:
        print(f"outputs in:       {config.output_dir}")
    return 0


def _cmd_presets(args):
    try:
        text = runner.preset_text(args.name)
    except KeyError:
        print(
            f"unknown preset {args.name!r}; available: "
            + ", ".join(runner.preset_names()),
            file=sys.stderr,
        )
        return 2
    print(text)
    return 0


def _cmd_analyze(args):
    indir = args.input
    if args.what == "damping":
        series = diagnostics.read_scalars_csv(os.path.join(indir, "scalars.csv"))
        fit = diagnostics.fit_damping_rate(series.time, series["H_E"])
        print("first six field-energy maxima:")
        print(f"{'t':>10}  {'H_E':>14}")
        for t, e in zip(fit["maxima_t"], fit["maxima_e"]):
            print(f"{t:10.4f}  {e:14.6e}")
        print(f"fitted log-energy slope: {fit['slope']:+.4f}")
        print(f"reference slope:         {LANDAU_REFERENCE_SLOPE:+.4f}")
        return 0
    # spectrum analysis
    times, xs, values = runner.read_ex_line(os.path.join(indir, "ex_line.bin"))
    with open(os.path.join(indir, "config.echo.txt")) as fh:
        config = runner.parse_config(fh.read())
    omega_p, omega_c = runner.hybrid_parameters(config)
    hyb = diagnostics.hybrid_frequencies(omega_p, omega_c)
    grid = diagnostics.dispersion_spectrum(values, times, xs)
    result = diagnostics.cvk_peak_offsets(
        grid, args.k_start, targets=(hyb["omega_L"], hyb["omega_R"])
    )
    print(f"k-averaged spectrum peaks (k >= {args.k_start}):")
    print(f"{'omega':>10}  {'amplitude':>12}")
    for w, a in result.peaks:
        print(f"{w:10.4f}  {a:12.4e}")
    print(f"omega_L = {hyb['omega_L']:.4f}, nearest-peak offset: "
          f"{result.offsets.get(hyb['omega_L'], float('nan')):.4f}")
    print(f"omega_R = {hyb['omega_R']:.4f}, nearest-peak offset: "
          f"{result.offsets.get(hyb['omega_R'], float('nan')):.4f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lvmpic",
        description="Linearized Vlasov-Maxwell delta-f PIC solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a config file")
    p_run.add_argument("--config", required=True, help="config file path")
    p_run.add_argument("--output", help="override the output directory")
    p_run.add_argument("--seed", type=int, help="override the marker seed")
    p_run.set_defaults(func=_cmd_run)

    p_pre = sub.add_parser("presets", help="print a named preset config")
    p_pre.add_argument("name", help="preset name")
    p_pre.set_defaults(func=_cmd_presets)

    p_ana = sub.add_parser("analyze", help="analyze a finished run directory")
    p_ana.add_argument("what", choices=["damping", "spectrum"])
    p_ana.add_argument("--input", required=True, help="run output directory")
    p_ana.add_argument("--k-start", type=float, default=4.0,
                       help="lower k bound for spectrum averaging")
    p_ana.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
