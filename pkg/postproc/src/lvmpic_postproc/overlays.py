"""Closed-form overlay curves, recomputed independently of the solver.

These duplicate the solver's analytic references on purpose: the plots
stay usable standalone, and the overlay.json sidecar written by a run
lets callers verify that both codes agree (see check_sidecar).
"""

import numpy as np
from scipy.optimize import brentq
from scipy.special import ive

REFERENCE_LANDAU_SLOPE = -0.3066


def hybrid_cutoffs(omega_p, omega_c):
    root = np.sqrt(1.0 + 4.0 * (omega_p / omega_c) ** 2)
    return 0.5 * omega_c * (root - 1.0), 0.5 * omega_c * (root + 1.0)


def cold_x_residual(w, k, omega_p, omega_h):
    return w * w - omega_p**2 * (w * w - omega_p**2) / (w * w - omega_h**2) - k * k


def cold_modes(k, omega_p, omega_c):
    """O-mode and both X-branches; k may be zero (returns the cutoffs)."""
    omega_o = float(np.hypot(omega_p, k))
    w_l, w_r = hybrid_cutoffs(omega_p, omega_c)
    omega_h = float(np.hypot(omega_p, omega_c))
    if k == 0.0:
        return {"omega_O": omega_o, "omega_X_fast": w_r, "omega_X_slow": w_l}
    hi = max(2.0 * w_r, 2.0 * float(np.hypot(k, omega_h)))
    fast = brentq(cold_x_residual, w_r * (1 + 1e-12), hi,
                  args=(k, omega_p, omega_h), xtol=1e-14, rtol=1e-14)
    slow = brentq(cold_x_residual, w_l * (1 + 1e-12), omega_h * (1 - 1e-12),
                  args=(k, omega_p, omega_h), xtol=1e-14, rtol=1e-14)
    return {"omega_O": omega_o, "omega_X_fast": float(fast),
            "omega_X_slow": float(slow)}


def bernstein_residual(w, k, omega_p, omega_c, v_th, n_terms=50):
    lam = (k * v_th / omega_c) ** 2
    if lam == 0.0:
        return 1.0 - omega_p**2 / (w**2 - omega_c**2)
    n = np.arange(1, n_terms + 1)
    series = (n * n * ive(n, lam) / (w**2 - n * n * omega_c**2)).sum()
    return 1.0 - 2.0 * omega_p**2 / lam * series


def bernstein_branch(k, omega_p, omega_c, v_th, band, n_terms=50):
    lo = band * omega_c * (1 + 1e-5)
    hi = (band + 1) * omega_c * (1 - 1e-5)
    f = lambda w: bernstein_residual(w, k, omega_p, omega_c, v_th, n_terms)
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        return None
    return float(brentq(f, lo, hi, xtol=1e-12, rtol=1e-12))


def fit_first_maxima(times, energies, n_maxima=6):
    """Least-squares line through ln(E) at the first strict local maxima.

    Returns None when fewer maxima exist (flat or monotone traces).
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    interior = np.arange(1, energies.size - 1)
    keep = (energies[interior] > energies[interior - 1]) & (
        energies[interior] > energies[interior + 1]
    )
    peaks = interior[keep]
    peaks = peaks[energies[peaks] > 0.0]
    if peaks.size < n_maxima:
        return None
    sel = peaks[:n_maxima]
    slope, intercept = np.polyfit(times[sel], np.log(energies[sel]), 1)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "t": times[sel],
        "e": energies[sel],
    }


def check_sidecar(sidecar, tol=1e-9):
    """Recompute all overlay samples and compare against the sidecar.

    Returns the maximum absolute deviation; raises if it exceeds tol.
    """
    wp, wc, vth = sidecar["omega_p"], sidecar["omega_c"], sidecar["v_th"]
    w_l, w_r = hybrid_cutoffs(wp, wc)
    worst = max(abs(w_l - sidecar["omega_L"]), abs(w_r - sidecar["omega_R"]))
    for i, k in enumerate(sidecar["k"]):
        modes = cold_modes(float(k), wp, wc)
        for name in ("omega_O", "omega_X_fast", "omega_X_slow"):
            worst = max(worst, abs(modes[name] - sidecar["cold_modes"][name][i]))
        for band, roots in sidecar["bernstein_branches"].items():
            if roots[i] is None:
                continue
            mine = bernstein_branch(float(k), wp, wc, vth, int(band))
            if mine is not None:
                worst = max(worst, abs(mine - roots[i]))
    if worst > tol:
        raise ValueError(
            f"overlay sidecar disagrees with recomputed curves by {worst:.3e}"
        )
    return worst
