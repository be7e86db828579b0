import numpy as np
import pytest

from lvmpic import diagnostics, feec, markers as mk
from lvmpic.diagnostics import (
    ScalarSeries,
    bernstein_branch,
    bernstein_residual,
    cold_plasma_modes,
    cvk_peak_offsets,
    dispersion_spectrum,
    fit_damping_rate,
    hamiltonian,
    hybrid_frequencies,
    rel_energy_error,
)
from lvmpic.errors import InsufficientDataError, InvalidMarkerError
from lvmpic.feec import MassMatrices, assemble_mass, build_complex
from lvmpic.geometry import MappingSpec
from lvmpic.markers import MarkerBatch, PhysParams
from lvmpic.propagators import FieldState

PHYS = PhysParams(alpha2=1.0, eps=-1.0, v_th=1.0)


def small_context():
    spec = MappingSpec("cuboid", (2.0, 1.0, 1.0))
    c = build_complex((4, 1, 1), (1, 1, 1))
    masses = MassMatrices(
        M1=assemble_mass(c, spec, feec.V1), M2=assemble_mass(c, spec, feec.V2)
    )
    return spec, c, masses


def test_hamiltonian_zero_state():
    spec, c, masses = small_context()
    batch = MarkerBatch(
        eta=np.zeros((1, 3)), v=np.zeros((1, 3)), w=np.zeros(1),
        s0=np.ones(1), f0=np.ones(1),
    )
    h = hamiltonian(batch, FieldState.zeros(c), masses, PHYS)
    assert h["H_total"] == 0.0 and h["H_E"] == 0.0 and h["H_B"] == 0.0


def test_hamiltonian_single_marker_value():
    spec, c, masses = small_context()
    batch = MarkerBatch(
        eta=np.zeros((1, 3)), v=np.zeros((1, 3)), w=np.ones(1),
        s0=np.full(1, 0.37), f0=np.full(1, 0.37),
    )
    h = hamiltonian(batch, FieldState.zeros(c), masses, PHYS)
    assert h["H_particles"] == pytest.approx(PHYS.alpha2 * PHYS.v_th**2 / 2.0)


def test_hamiltonian_rejects_bad_f0():
    spec, c, masses = small_context()
    batch = MarkerBatch(
        eta=np.zeros((1, 3)), v=np.zeros((1, 3)), w=np.ones(1),
        s0=np.ones(1), f0=np.zeros(1),
    )
    with pytest.raises(InvalidMarkerError):
        hamiltonian(batch, FieldState.zeros(c), masses, PHYS)


def test_rel_energy_error_values():
    assert np.array_equal(rel_energy_error([2.0, 2.0, 2.0]), np.zeros(2))
    assert rel_energy_error([1.0, 1.0 + 1e-9])[0] == pytest.approx(1e-9, rel=1e-6)
    flagged = rel_energy_error([0.0, 1.0])
    assert np.isnan(flagged[0])


def test_fit_damping_rate_synthetic_energy_signal():
    m, omega = -0.15, 1.4
    t = np.arange(0.0, 30.0, 0.05)
    energy = np.exp(2 * m * t) * np.cos(omega * t) ** 2 + 1e-300
    fit = fit_damping_rate(t, energy)
    assert fit["slope"] == pytest.approx(2 * m, rel=0.01)
    assert len(fit["maxima_t"]) == 6


def test_fit_damping_rate_scale_invariance():
    t = np.arange(0.0, 30.0, 0.05)
    energy = np.exp(-0.3 * t) * np.cos(1.4 * t) ** 2 + 1e-300
    a = fit_damping_rate(t, energy)["slope"]
    b = fit_damping_rate(t, 7.25e4 * energy)["slope"]
    assert a == pytest.approx(b, rel=1e-12)


def test_fit_damping_rate_needs_six_maxima():
    t = np.linspace(0.0, 10.0, 200)
    with pytest.raises(InsufficientDataError):
        fit_damping_rate(t, np.exp(-t))


def test_dispersion_spectrum_plane_wave_lands_on_target_bin():
    nt, nx = 128, 64
    dt, dx = 0.25, 0.5
    t = np.arange(nt) * dt
    x = np.arange(nx) * dx
    k0 = 2 * np.pi * 5 / (nx * dx)
    w0 = 2 * np.pi * 10 / (nt * dt)
    ex = np.sin(k0 * x[None, :] - w0 * t[:, None])
    grid = dispersion_spectrum(ex, t, x)
    m, j = np.unravel_index(np.argmax(grid.power), grid.power.shape)
    assert grid.omega[m] == pytest.approx(w0)
    assert grid.k[j] == pytest.approx(k0)


def test_dispersion_spectrum_zero_field_and_parseval():
    nt, nx = 64, 32
    t = np.arange(nt) * 0.1
    x = np.arange(nx) * 0.3
    zero = dispersion_spectrum(np.zeros((nt, nx)), t, x)
    assert np.all(zero.power == 0.0)
    rng = np.random.default_rng(0)
    ex = rng.standard_normal((nt, nx))
    grid = dispersion_spectrum(ex, t, x)
    assert grid.total_power == pytest.approx(nt * nx * (ex**2).sum(), rel=1e-12)


def test_dispersion_spectrum_rejects_nonuniform_axes():
    ex = np.zeros((8, 8))
    bad_t = np.array([0, 1, 2, 3, 4, 5, 6, 8.0])
    with pytest.raises(ValueError):
        dispersion_spectrum(ex, bad_t, np.arange(8.0))


def test_hybrid_frequencies_golden_ratio_values():
    h = hybrid_frequencies(1.0, 1.0)
    assert h["omega_L"] == pytest.approx((np.sqrt(5) - 1) / 2, abs=1e-14)
    assert h["omega_R"] == pytest.approx((np.sqrt(5) + 1) / 2, abs=1e-14)
    # algebraic identities
    assert h["omega_R"] - h["omega_L"] == pytest.approx(1.0, abs=1e-14)
    assert h["omega_R"] * h["omega_L"] == pytest.approx(1.0, abs=1e-14)


def test_hybrid_frequencies_limits():
    h = hybrid_frequencies(1e-8, 2.0)
    assert h["omega_L"] == pytest.approx(0.0, abs=1e-7)
    assert h["omega_R"] == pytest.approx(2.0, abs=1e-7)


def test_cold_plasma_modes_cutoffs_and_light_line():
    h = hybrid_frequencies(1.0, 1.0)
    at0 = cold_plasma_modes(0.0, 1.0, 1.0)
    assert at0["omega_O"] == pytest.approx(1.0)
    assert at0["omega_X_fast"] == pytest.approx(h["omega_R"], rel=1e-12)
    assert at0["omega_X_slow"] == pytest.approx(h["omega_L"], rel=1e-12)
    big = cold_plasma_modes(100.0, 1.0, 1.0)
    assert big["omega_O"] == pytest.approx(100.0, rel=0.01)
    assert cold_plasma_modes(3.7, 0.0, 1.0)["omega_O"] == pytest.approx(3.7)


def test_cold_plasma_x_branches_satisfy_relation():
    wp, wc = 1.0, 1.0
    wh = np.hypot(wp, wc)
    for k in (0.5, 1.0, 4.0):
        modes = cold_plasma_modes(k, wp, wc)
        for branch in ("omega_X_fast", "omega_X_slow"):
            w = modes[branch]
            lhs = k**2
            rhs = w**2 - wp**2 * (w**2 - wp**2) / (w**2 - wh**2)
            assert lhs == pytest.approx(rhs, rel=1e-9)


def test_bernstein_residual_limits():
    # no plasma: residual is identically one
    assert bernstein_residual(1.5, 2.0, 0.0, 1.0, 0.2) == 1.0
    # lam -> 0: root in (wc, 2wc) approaches the upper hybrid sqrt(2)
    for lam_k in (1e-4, 1e-5):
        root = bernstein_branch(lam_k, 1.0, 1.0, 1.0, band=1)
        assert root == pytest.approx(np.sqrt(2.0), abs=5e-3)


def test_bernstein_residual_sign_change_brackets_root():
    # lam = 0.5 with vth=1, wc=1 -> k = sqrt(0.5)
    k = np.sqrt(0.5)
    lo = bernstein_residual(1.01, k, 1.0, 1.0, 1.0)
    hi = bernstein_residual(1.99, k, 1.0, 1.0, 1.0)
    assert lo * hi < 0.0


def test_bernstein_residual_rejects_poles():
    with pytest.raises(ValueError):
        bernstein_residual(2.0 + 1e-9, 1.0, 1.0, 1.0, 0.2)


def test_cvk_peak_offsets_synthetic_injection():
    omega = np.linspace(0.0, 3.0, 301)
    k = np.linspace(0.0, 10.0, 51)
    power = np.full((301, 51), 1e-12)
    for target in (0.618, 1.618):
        i = np.argmin(np.abs(omega - target))
        power[i, :] += 1.0
        power[i - 1, :] += 0.4
        power[i + 1, :] += 0.4
    grid = diagnostics.SpectrumGrid(power=power, omega=omega, k=k)
    res = cvk_peak_offsets(grid, k_start=4.0, targets=(0.618, 1.618))
    dbin = omega[1] - omega[0]
    assert res.offsets[0.618] <= dbin
    assert res.offsets[1.618] <= dbin


def test_cvk_flat_or_empty_spectrum_gives_no_peaks():
    omega = np.linspace(0, 2, 64)
    k = np.linspace(0, 5, 16)
    flat = diagnostics.SpectrumGrid(
        power=np.ones((64, 16)), omega=omega, k=k
    )
    assert cvk_peak_offsets(flat, 1.0).peaks == []
    empty = diagnostics.SpectrumGrid(
        power=np.zeros((64, 0)), omega=omega, k=np.zeros(0)
    )
    assert cvk_peak_offsets(empty, 1.0).peaks == []


def test_scalar_series_validation_and_csv_roundtrip(tmp_path):
    with pytest.raises(ValueError):
        ScalarSeries(time=np.array([0.0, 0.0]), columns={})
    t = np.arange(5) * 0.5
    cols = {name: np.linspace(0, 1, 5) * (i + 1)
            for i, name in enumerate(diagnostics.SCALAR_COLUMNS)}
    series = ScalarSeries(time=t, columns=cols)
    path = tmp_path / "scalars.csv"
    diagnostics.write_scalars_csv(series, path)
    header = path.read_text().splitlines()[0]
    assert header == "time,H_total,H_particles,H_E,H_B,rel_energy_err,div_b_inf"
    back = diagnostics.read_scalars_csv(path)
    assert np.array_equal(back.time, t)
    for name in cols:
        assert np.array_equal(back[name], cols[name])


def test_hamiltonian_invariant_under_marker_reordering():
    spec, c, masses = small_context()
    rng = np.random.default_rng(1)
    batch = mk.sample_markers(1000, spec, PHYS, seed=2)
    batch.w = rng.standard_normal(1000)
    h0 = hamiltonian(batch, FieldState.zeros(c), masses, PHYS)["H_particles"]
    perm = rng.permutation(1000)
    shuffled = MarkerBatch(
        eta=batch.eta[perm], v=batch.v[perm], w=batch.w[perm],
        s0=batch.s0[perm], f0=batch.f0[perm],
    )
    h1 = hamiltonian(shuffled, FieldState.zeros(c), masses, PHYS)["H_particles"]
    assert h1 == pytest.approx(h0, rel=1e-12)
