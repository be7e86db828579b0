"""Figure builders: damping trace, energy error and dispersion heatmap."""

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import io, overlays

LOG_FLOOR = 1e-30


@dataclass
class PlotJob:
    input_dir: str
    kind: str  # damping | energy_error | dispersion
    out_path: str
    show_exact_slope: bool = True
    show_cold_modes: bool = True
    show_hybrid_lines: bool = True
    k_start: float = 4.0
    annotations: dict = field(default_factory=dict)


def plot_damping(job):
    """Semilog field-energy trace with the first six maxima and a fit."""
    scalars = io.read_scalars(os.path.join(job.input_dir, "scalars.csv"))
    t, he = scalars["time"], scalars["H_E"]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.semilogy(t, np.maximum(he, LOG_FLOOR), lw=0.9, color="tab:blue",
                label="field energy")
    fit = overlays.fit_first_maxima(t, he)
    if fit is None:
        job.annotations["fit_error"] = "fewer than six local maxima in the trace"
        ax.set_title("field energy (no damping fit: too few maxima)")
    else:
        job.annotations["slope"] = fit["slope"]
        ax.semilogy(fit["t"], fit["e"], "o", ms=5, color="tab:red",
                    label="first six maxima")
        tline = np.linspace(fit["t"][0], fit["t"][-1] + 2.0, 50)
        ax.semilogy(tline, np.exp(fit["intercept"] + fit["slope"] * tline),
                    "--", color="tab:red",
                    label=f"fit slope {fit['slope']:+.4f}")
        if job.show_exact_slope:
            ref = overlays.REFERENCE_LANDAU_SLOPE
            ax.semilogy(tline, np.exp(fit["intercept"] + ref * tline), ":",
                        color="k", label=f"reference {ref:+.4f}")
        ax.set_title(f"weak Landau damping: fitted slope {fit['slope']:+.4f}")
    ax.set_xlabel("t")
    ax.set_ylabel("field energy")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=130)
    plt.close(fig)
    return job


def plot_energy_error(job):
    """Relative total-energy error per step on a log scale."""
    scalars = io.read_scalars(os.path.join(job.input_dir, "scalars.csv"))
    if "rel_energy_err" not in scalars:
        raise ValueError("scalars.csv lacks the rel_energy_err column")
    t, err = scalars["time"], scalars["rel_energy_err"]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.semilogy(t[1:], np.maximum(err[1:], LOG_FLOOR), lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("|dH / H| per step")
    ax.set_title("relative total-energy error")
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=130)
    plt.close(fig)
    return job


def compute_spectrum(times, xs, values):
    """Positive-quadrant power of the 2-D transform, physics convention."""
    nt, nx = values.shape
    power = np.abs(np.fft.fft2(values)) ** 2
    m, j = nt // 2 + 1, nx // 2 + 1
    cols = (-np.arange(j)) % nx
    quad = power[:m][:, cols]
    dt = times[1] - times[0] if nt > 1 else 1.0
    dx = xs[1] - xs[0] if nx > 1 else 1.0
    omega = 2 * np.pi * np.arange(m) / (nt * dt)
    k = 2 * np.pi * np.arange(j) / (nx * dx)
    return omega, k, quad


def plot_dispersion(job):
    """Log-power heatmap over (k, omega) with analytic overlay curves."""
    times, xs, values = io.read_ex_line(os.path.join(job.input_dir, "ex_line.bin"))
    freqs = io.read_run_frequencies(job.input_dir)
    wp, wc, vth = freqs["omega_p"], freqs["omega_c"], freqs["v_th"]
    sidecar = io.read_overlay_sidecar(job.input_dir)
    if sidecar is not None:
        job.annotations["sidecar_deviation"] = overlays.check_sidecar(sidecar)

    omega, k, quad = compute_spectrum(times, xs, values)
    w_l, w_r = overlays.hybrid_cutoffs(wp, wc)
    job.annotations["omega_L"] = w_l
    job.annotations["omega_R"] = w_r

    omega_max = min(omega[-1], 4.2 * wp) if wp > 0 else omega[-1]
    sel = omega <= omega_max
    fig, ax = plt.subplots(figsize=(7.6, 5.0))
    mesh = ax.pcolormesh(
        k, omega[sel], np.log10(quad[sel] + LOG_FLOOR),
        shading="auto", cmap="inferno", rasterized=True,
    )
    fig.colorbar(mesh, ax=ax, label="log10 |E_x(omega, k)|^2")

    kk = np.linspace(0.0, k[-1], 120)
    if job.show_cold_modes and wp > 0 and wc > 0:
        branches = {"omega_O": [], "omega_X_fast": [], "omega_X_slow": []}
        for kv in kk:
            modes = overlays.cold_modes(float(kv), wp, wc)
            for name in branches:
                branches[name].append(modes[name])
        for name, style in (("omega_O", "-."), ("omega_X_fast", "-."),
                            ("omega_X_slow", "-.")):
            ax.plot(kk, branches[name], style, color="deepskyblue", lw=1.0)
        for band in (1, 2, 3, 4):
            roots = [overlays.bernstein_branch(float(kv), wp, wc, vth, band)
                     for kv in kk[1:]]
            pts = [(kv, r) for kv, r in zip(kk[1:], roots) if r is not None]
            if pts:
                ax.plot(*zip(*pts), "*", color="deepskyblue", ms=2.0)
    if job.show_hybrid_lines and wc > 0:
        for w in (w_l, w_r):
            ax.axhline(w, color="w", ls="--", lw=0.9)
        half = 0.5 * wp
        n = 1
        while n * half <= omega_max and wp > 0:
            ax.axhline(n * half, color="k", ls="--", lw=0.5, alpha=0.5)
            n += 1
    ax.set_ylim(0, omega_max)
    ax.set_xlabel("k")
    ax.set_ylabel("omega")
    ax.set_title("perpendicular dispersion of E_x")
    fig.tight_layout()
    fig.savefig(job.out_path, dpi=130)
    plt.close(fig)
    return job
