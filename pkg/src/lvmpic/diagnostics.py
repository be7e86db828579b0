"""Conserved quantities, damping fits, spectra and dispersion curves.

Pure post-processing over immutable arrays. The analytic references
cover the hybrid cutoffs, the cold-plasma O/X modes and the
electrostatic perpendicular Bernstein relation (speed of light = 1 in
code units).
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ive

from .errors import InsufficientDataError, InvalidMarkerError

SCALAR_COLUMNS = (
    "H_total",
    "H_particles",
    "H_E",
    "H_B",
    "rel_energy_err",
    "div_b_inf",
)


@dataclass
class ScalarSeries:
    """Time series of scalar diagnostics with aligned named columns."""

    time: np.ndarray
    columns: dict

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=float)
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.time.shape:
                raise ValueError(f"column {name!r} length mismatch")
            self.columns[name] = col
        if self.time.size > 1 and not np.all(np.diff(self.time) > 0.0):
            raise ValueError("time must be strictly increasing")

    def __getitem__(self, name):
        return self.columns[name]


@dataclass
class SpectrumGrid:
    """Positive-quadrant power of the 2-D transform of E_x(t, x).

    ``power[m, j]`` is the squared magnitude at angular frequency
    omega[m] and wavenumber k[j], with the sign convention that a
    right-travelling wave sin(k0 x - w0 t) lands at (w0, k0).
    ``total_power`` sums the full (all-quadrant) transform for Parseval
    checks.
    """

    power: np.ndarray
    omega: np.ndarray
    k: np.ndarray
    total_power: float = 0.0


def hamiltonian(batch, fields, masses, phys):
    """Discrete energies: particle part, field parts and their total."""
    if batch is None or batch.count == 0:
        h_part = 0.0
    else:
        if np.any(batch.f0 <= 0.0):
            raise InvalidMarkerError("non-positive f0 in Hamiltonian")
        h_part = (
            0.5 * phys.alpha2 * phys.v_th**2 / batch.count
            * (batch.s0 * batch.w**2 / batch.f0).sum()
        )
    h_e = 0.5 * ((masses.M1 @ fields.e1) * fields.e1).sum()
    h_b = 0.5 * ((masses.M2 @ fields.b1) * fields.b1).sum()
    return {
        "H_particles": h_part,
        "H_E": h_e,
        "H_B": h_b,
        "H_total": h_part + h_e + h_b,
    }


def rel_energy_error(h_total):
    """Per-step |(H^{n+1} - H^n) / H^n|; NaN flags division by zero."""
    h = np.asarray(h_total, dtype=float)
    if h.size < 2:
        raise ValueError("need at least two samples")
    out = np.full(h.size - 1, np.nan)
    ok = h[:-1] != 0.0
    out[ok] = np.abs((h[1:] - h[:-1])[ok] / h[:-1][ok])
    return out


def fit_damping_rate(times, energies, n_maxima=6):
    """Least-squares slope of ln(E) through the first strict local maxima.

    Returns the raw log-energy slope; for the weak Landau damping
    benchmark this equals twice the amplitude decay rate.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    interior = np.arange(1, energies.size - 1)
    is_max = (energies[interior] > energies[interior - 1]) & (
        energies[interior] > energies[interior + 1]
    )
    peaks = interior[is_max]
    peaks = peaks[energies[peaks] > 0.0]
    if peaks.size < n_maxima:
        raise InsufficientDataError(
            f"found {peaks.size} local maxima, need {n_maxima}"
        )
    sel = peaks[:n_maxima]
    slope, intercept = np.polyfit(times[sel], np.log(energies[sel]), 1)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "maxima_t": times[sel],
        "maxima_e": energies[sel],
    }


def _check_uniform(axis, name):
    axis = np.asarray(axis, dtype=float)
    if axis.size < 2:
        raise ValueError(f"{name} axis too short")
    d = np.diff(axis)
    if np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise ValueError(f"{name} axis is not uniform")
    return d[0]


def dispersion_spectrum(ex_tx, times, xs):
    """2-D discrete Fourier power of E_x(t, x), positive quadrant."""
    ex_tx = np.asarray(ex_tx, dtype=float)
    dt = _check_uniform(times, "time")
    dx = _check_uniform(xs, "space")
    nt, nx = ex_tx.shape
    if (nt, nx) != (len(times), len(xs)):
        raise ValueError("sample array shape does not match axes")
    power = np.abs(np.fft.fft2(ex_tx)) ** 2
    m = nt // 2 + 1
    j = nx // 2 + 1
    cols = (-np.arange(j)) % nx  # sign flip: e^{i(kx - wt)} convention
    quad = power[:m][:, cols]
    return SpectrumGrid(
        power=quad,
        omega=2.0 * np.pi * np.arange(m) / (nt * dt),
        k=2.0 * np.pi * np.arange(j) / (nx * dx),
        total_power=float(power.sum()),
    )


def hybrid_frequencies(omega_p, omega_c):
    """Cutoffs of the slow/fast X-branches (k -> 0 abscissas)."""
    if omega_p <= 0.0 or omega_c <= 0.0:
        raise ValueError("frequencies must be positive")
    root = np.sqrt(1.0 + 4.0 * (omega_p / omega_c) ** 2)
    return {
        "omega_L": 0.5 * omega_c * (root - 1.0),
        "omega_R": 0.5 * omega_c * (root + 1.0),
    }


def _cold_x_implicit(w, k, omega_p, omega_h):
    return w * w - omega_p**2 * (w * w - omega_p**2) / (w * w - omega_h**2) - k * k


def cold_plasma_modes(k, omega_p, omega_c):
    """O-mode and the two positive X-branches of the cold dispersion."""
    if k < 0.0:
        raise ValueError("k must be non-negative")
    omega_o = np.sqrt(omega_p**2 + k**2)
    if omega_p == 0.0:
        return {"omega_O": float(k), "omega_X_fast": float(k), "omega_X_slow": 0.0}
    hyb = hybrid_frequencies(omega_p, omega_c)
    w_l, w_r = hyb["omega_L"], hyb["omega_R"]
    omega_h = np.hypot(omega_p, omega_c)
    if k == 0.0:
        return {"omega_O": float(omega_o), "omega_X_fast": w_r, "omega_X_slow": w_l}

    def solve(lo, hi):
        flo = _cold_x_implicit(lo, k, omega_p, omega_h)
        fhi = _cold_x_implicit(hi, k, omega_p, omega_h)
        if flo * fhi > 0.0:
            raise ArithmeticError(
                f"no sign change on [{lo:g}, {hi:g}] "
                f"(f = {flo:.3e}, {fhi:.3e}) for k = {k:g}"
            )
        return brentq(_cold_x_implicit, lo, hi, args=(k, omega_p, omega_h),
                      xtol=1e-14, rtol=1e-14)

    # fast branch starts at the right cutoff and follows the light line
    hi = max(2.0 * w_r, 2.0 * np.hypot(k, omega_h))
    fast = solve(w_r * (1.0 + 1e-12), hi)
    # slow branch lives between the left cutoff and the upper hybrid
    slow = solve(w_l * (1.0 + 1e-12), omega_h * (1.0 - 1e-12))
    return {"omega_O": float(omega_o), "omega_X_fast": float(fast),
            "omega_X_slow": float(slow)}


def bernstein_residual(omega, k, omega_p, omega_c, v_th, n_terms=50):
    """Electrostatic perpendicular Bernstein dispersion residual.

    Zero residual between consecutive cyclotron harmonics locates the
    electron Bernstein branches. The scaled modified Bessel function
    ive(n, lam) = exp(-lam) I_n(lam) keeps the series stable for large
    arguments.
    """
    lam = (k * v_th / omega_c) ** 2
    n = np.arange(1, n_terms + 1)
    if np.min(np.abs(omega - n * omega_c)) < 1e-6 * omega_c:
        raise ValueError("omega too close to a cyclotron harmonic (pole)")
    if omega_p == 0.0:
        return 1.0
    if lam == 0.0:
        # only the n = 1 term survives the lam -> 0 limit of I_n(lam)/lam
        return 1.0 - omega_p**2 / (omega**2 - omega_c**2)
    series = (n * n * ive(n, lam) / (omega**2 - n * n * omega_c**2)).sum()
    return 1.0 - 2.0 * omega_p**2 / lam * series


def bernstein_branch(k, omega_p, omega_c, v_th, band, n_terms=50):
    """Root of the Bernstein residual in (band, band+1) * omega_c."""
    lo = band * omega_c * (1.0 + 1e-5)
    hi = (band + 1) * omega_c * (1.0 - 1e-5)
    f = lambda w: bernstein_residual(w, k, omega_p, omega_c, v_th, n_terms)
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise ArithmeticError(f"no Bernstein root bracketed in band {band}")
    return brentq(f, lo, hi, xtol=1e-12, rtol=1e-12)


@dataclass
class PeakResult:
    peaks: list = field(default_factory=list)   # (omega, amplitude) pairs
    offsets: dict = field(default_factory=dict)  # target -> |omega_peak - target|


def cvk_peak_offsets(grid, k_start, targets=(), min_prominence=10.0):
    """Peaks of the k-averaged spectrum and their offsets from targets.

    Power is averaged over all columns with k >= k_start; strict local
    maxima (quadratically refined on the log scale) whose amplitude
    exceeds ``min_prominence`` times the median are reported. For each
    target frequency the offset of the nearest peak is returned.
    """
    cols = grid.k >= k_start
    if grid.power.size == 0 or not np.any(cols):
        return PeakResult()
    avg = grid.power[:, cols].mean(axis=1)
    if np.all(avg == avg[0]):
        return PeakResult()
    floor = 1e-300
    loga = np.log10(avg + floor)
    interior = np.arange(1, avg.size - 1)
    is_max = (avg[interior] > avg[interior - 1]) & (
        avg[interior] > avg[interior + 1]
    )
    cand = interior[is_max]
    cand = cand[avg[cand] >= min_prominence * np.median(avg)]
    domega = grid.omega[1] - grid.omega[0]
    peaks = []
    for i in cand:
        ym, y0, yp = loga[i - 1], loga[i], loga[i + 1]
        denom = ym - 2.0 * y0 + yp
        shift = 0.5 * (ym - yp) / denom if denom != 0.0 else 0.0
        peaks.append((grid.omega[i] + shift * domega, float(avg[i])))
    offsets = {}
    for t in targets:
        if peaks:
            offsets[t] = min(abs(w - t) for w, _ in peaks)
    return PeakResult(peaks=peaks, offsets=offsets)


# ---------------------------------------------------------------------------
# CSV persistence of scalar series


def write_scalars_csv(series, path):
    """Header row plus one row per step, 17 significant digits."""
    names = ["time"] + [c for c in SCALAR_COLUMNS if c in series.columns]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names) + "\n")
        cols = [series.time] + [series.columns[c] for c in names[1:]]
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_scalars_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    if rows.size == 0:
        raise ValueError(f"empty scalar series in {path}")
    columns = {name: rows[:, i] for i, name in enumerate(header) if name != "time"}
    return ScalarSeries(time=rows[:, header.index("time")], columns=columns)
