import numpy as np
import pytest

from lvmpic import markers as mk
from lvmpic.geometry import MappingSpec
from lvmpic.markers import BackgroundSpec, PhysParams

CUBOID = MappingSpec("cuboid", (4 * np.pi, 1.0, 1.0))
PHYS = PhysParams(alpha2=1.0, eps=-1.0, v_th=1.0)


def test_sampling_is_deterministic():
    a = mk.sample_markers(10, CUBOID, PHYS, seed=7)
    b = mk.sample_markers(10, CUBOID, PHYS, seed=7)
    assert np.array_equal(a.eta, b.eta)
    assert np.array_equal(a.v, b.v)
    assert np.array_equal(a.s0, b.s0)


def test_sobol_scheme_deterministic_and_distinct():
    a = mk.sample_markers(64, CUBOID, PHYS, seed=7, scheme="sobol")
    b = mk.sample_markers(64, CUBOID, PHYS, seed=7, scheme="sobol")
    c = mk.sample_markers(64, CUBOID, PHYS, seed=8, scheme="sobol")
    assert np.array_equal(a.v, b.v)
    assert not np.array_equal(a.v, c.v)


@pytest.mark.parametrize("scheme", ["pseudo_random", "sobol"])
def test_velocity_variance_matches_target(scheme):
    phys = PhysParams(alpha2=1.0, eps=-1.0, v_th=0.7)
    batch = mk.sample_markers(100000, CUBOID, phys, seed=1, scheme=scheme)
    var = batch.v.var(axis=0)
    assert np.all(np.abs(var - 0.49) < 0.02 * 0.49)


def test_s0_equals_maxwellian_over_volume_on_cuboid():
    batch = mk.sample_markers(100, CUBOID, PHYS, seed=2)
    expected = mk.maxwellian(batch.v, PHYS.v_th) / (4 * np.pi)
    assert np.allclose(batch.s0, expected, rtol=1e-14)


def test_unknown_scheme_rejected():
    with pytest.raises(ValueError):
        mk.sample_markers(4, CUBOID, PHYS, seed=0, scheme="halton")


def test_landau_weight_value_at_origin():
    # w = delta * Vol * cos(k x); at x = 0 with delta=1e-3, Vol=4*pi
    batch = mk.sample_markers(3, CUBOID, PHYS, seed=3)
    batch.eta[:, 0] = 0.0
    batch.s0 = mk.maxwellian(batch.v, PHYS.v_th) / (4 * np.pi)
    delta, k = 1e-3, 0.5

    def f1(x, v):
        return delta * mk.maxwellian(v, PHYS.v_th) * np.cos(k * x[:, 0])

    mk.init_weights(batch, f1, CUBOID)
    assert np.allclose(batch.w, delta * 4 * np.pi, rtol=1e-13)
    assert batch.w[0] == pytest.approx(1.2566e-2, rel=1e-3)


def test_zero_perturbation_gives_zero_weights():
    batch = mk.sample_markers(50, CUBOID, PHYS, seed=4)
    mk.init_weights(batch, lambda x, v: np.zeros(len(x)), CUBOID)
    assert np.all(batch.w == 0.0)


def test_weight_scaling_is_linear_in_delta():
    def f1(delta):
        return lambda x, v: delta * mk.maxwellian(v, 1.0) * np.cos(0.5 * x[:, 0])

    a = mk.sample_markers(50, CUBOID, PHYS, seed=5)
    b = mk.sample_markers(50, CUBOID, PHYS, seed=5)
    mk.init_weights(a, f1(1e-3), CUBOID)
    mk.init_weights(b, f1(2e-3), CUBOID)
    assert np.allclose(b.w, 2.0 * a.w, rtol=1e-15)


def test_sum_of_sines_weights():
    # w = amp * Vol * sum_k sin(2 pi k x / L + 2 pi sqrt(2) k^2)
    spec = MappingSpec("cuboid", (72.0, 0.8, 0.8))
    batch = mk.sample_markers(5, spec, PHYS, seed=6)
    amp, modes = 1e-4, np.arange(81)
    phases = 2 * np.pi * np.sqrt(2.0) * modes**2

    def f1(x, v):
        arg = 2 * np.pi * modes[None, :] * x[:, 0:1] / 72.0 + phases[None, :]
        return amp * mk.maxwellian(v, 1.0) * np.sin(arg).sum(axis=1)

    mk.init_weights(batch, f1, spec)
    x = spec.lengths[0] * batch.eta[:, 0]
    expected = amp * spec.volume * np.sin(
        2 * np.pi * modes[None, :] * x[:, None] / 72.0 + phases[None, :]
    ).sum(axis=1)
    assert np.allclose(batch.w, expected, rtol=1e-10)


def test_eval_f0_printed_values():
    bg = BackgroundSpec(n0=1.0)
    assert mk.eval_f0(PHYS, bg, None, np.zeros(3)) == pytest.approx(
        (2 * np.pi) ** -1.5
    )
    assert mk.eval_f0(PHYS, bg, None, np.zeros(3)) == pytest.approx(0.06349, rel=1e-3)
    phys02 = PhysParams(alpha2=1.0, eps=-1.0, v_th=0.2)
    assert mk.eval_f0(phys02, bg, None, np.zeros(3)) == pytest.approx(
        (2 * np.pi * 0.04) ** -1.5
    )


def test_eval_f0_isotropy():
    rng = np.random.default_rng(7)
    bg = BackgroundSpec()
    v = rng.standard_normal(3)
    theta = 1.1
    rot = np.array(
        [
            [np.cos(theta), -np.sin(theta), 0.0],
            [np.sin(theta), np.cos(theta), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    assert mk.eval_f0(PHYS, bg, None, v) == pytest.approx(
        mk.eval_f0(PHYS, bg, None, rot @ v), rel=1e-14
    )


def test_monte_carlo_weight_mean_consistency():
    # Landau init integrates to zero; sample mean within 3 std errors
    batch = mk.sample_markers(100000, CUBOID, PHYS, seed=8)
    mk.init_weights(
        batch,
        lambda x, v: 1e-3 * mk.maxwellian(v, 1.0) * np.cos(0.5 * x[:, 0]),
        CUBOID,
    )
    stderr = batch.w.std() / np.sqrt(batch.count)
    assert abs(batch.w.mean()) < 3 * stderr


def test_snapshot_roundtrip_bit_exact(tmp_path):
    batch = mk.sample_markers(123, CUBOID, PHYS, seed=9)
    mk.init_weights(
        batch, lambda x, v: 1e-3 * mk.maxwellian(v, 1.0) * np.cos(0.5 * x[:, 0]), CUBOID
    )
    path = tmp_path / "markers.bin"
    mk.save_markers(batch, path)
    raw = path.read_bytes()
    assert raw[:8] == b"LVMPIC01"
    assert len(raw) == 16 + 123 * 8 * 8
    loaded = mk.load_markers(path, PHYS, BackgroundSpec())
    assert np.array_equal(loaded.eta, batch.eta)
    assert np.array_equal(loaded.v, batch.v)
    assert np.array_equal(loaded.w, batch.w)
    assert np.array_equal(loaded.s0, batch.s0)
    assert np.allclose(loaded.f0, batch.f0, rtol=1e-15)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTMAGIC" + b"\0" * 24)
    with pytest.raises(ValueError):
        mk.load_markers(path, PHYS, BackgroundSpec())


def test_phys_params_invariants():
    with pytest.raises(ValueError):
        PhysParams(alpha2=0.0, eps=-1.0, v_th=1.0)
    with pytest.raises(ValueError):
        PhysParams(alpha2=1.0, eps=0.0, v_th=1.0)
    with pytest.raises(ValueError):
        PhysParams(alpha2=1.0, eps=-1.0, v_th=-1.0)
