"""Console entry points: plot-damping and plot-dispersion."""

import argparse
import sys

from .plots import PlotJob, plot_damping, plot_dispersion


def _parser(kind):
    parser = argparse.ArgumentParser(
        prog=f"plot-{kind}",
        description=f"Render the {kind} figure from an lvmpic run directory",
    )
    parser.add_argument("--input", required=True, help="run output directory")
    parser.add_argument("--out", required=True, help="output image path")
    if kind == "dispersion":
        parser.add_argument("--k-start", type=float, default=4.0)
        parser.add_argument("--no-cold-modes", action="store_true")
        parser.add_argument("--no-hybrid-lines", action="store_true")
    else:
        parser.add_argument("--no-exact-slope", action="store_true")
    return parser


def main_damping(argv=None):
    args = _parser("damping").parse_args(argv)
    job = PlotJob(
        input_dir=args.input, kind="damping", out_path=args.out,
        show_exact_slope=not args.no_exact_slope,
    )
    try:
        plot_damping(job)
    except (OSError, ValueError) as exc:
        print(f"plot-damping failed: {exc}", file=sys.stderr)
        return 1
    if "slope" in job.annotations:
        print(f"fitted slope: {job.annotations['slope']:+.4f}")
    else:
        print(f"no fit: {job.annotations.get('fit_error', 'unknown')}")
    print(f"wrote {args.out}")
    return 0


def main_dispersion(argv=None):
    args = _parser("dispersion").parse_args(argv)
    job = PlotJob(
        input_dir=args.input, kind="dispersion", out_path=args.out,
        show_cold_modes=not args.no_cold_modes,
        show_hybrid_lines=not args.no_hybrid_lines,
        k_start=args.k_start,
    )
    try:
        plot_dispersion(job)
    except (OSError, ValueError) as exc:
        print(f"plot-dispersion failed: {exc}", file=sys.stderr)
        return 1
    print(f"omega_L = {job.annotations['omega_L']:.6f}, "
          f"omega_R = {job.annotations['omega_R']:.6f}")
    if "sidecar_deviation" in job.annotations:
        print(f"overlay sidecar max deviation: "
              f"{job.annotations['sidecar_deviation']:.2e}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main_damping())
