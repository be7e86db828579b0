import numpy as np
import pytest

from lvmpic import geometry
from lvmpic.errors import SingularMappingError
from lvmpic.geometry import MappingSpec, evaluate_bundle


def test_cuboid_bundle_is_constant_diagonal():
    spec = MappingSpec("cuboid", (4 * np.pi, 1.0, 1.0))
    for eta in ([0.0, 0.0, 0.0], [0.3, 0.7, 0.9], [0.99, 0.01, 0.5]):
        b = evaluate_bundle(spec, eta)
        assert np.allclose(b.DL, np.diag([4 * np.pi, 1.0, 1.0]))
        assert b.sqrt_g == pytest.approx(4 * np.pi, rel=1e-15)


def test_colella_zero_alpha_matches_cuboid():
    rng = np.random.default_rng(0)
    cub = MappingSpec("cuboid", (2.0, 3.0, 4.0))
    col = MappingSpec("colella", (2.0, 3.0, 4.0), alpha_c=0.0)
    for eta in rng.random((10, 3)):
        bc = evaluate_bundle(cub, eta)
        bl = evaluate_bundle(col, eta)
        assert np.array_equal(bc.x, bl.x)
        assert np.array_equal(bc.DL, bl.DL)


def test_colella_printed_formula_value():
    # x1 = 12*(0.25 + 0.1*sin(pi/2)*sin(pi/2)) = 4.2
    spec = MappingSpec("colella", (12.0, 1.0, 1.0), alpha_c=0.1)
    b = evaluate_bundle(spec, [0.25, 0.25, 0.0])
    assert b.x[0] == pytest.approx(4.2, abs=1e-14)


def test_bundle_invariants():
    spec = MappingSpec("colella", (12.0, 1.0, 1.0), alpha_c=0.1)
    rng = np.random.default_rng(1)
    for eta in rng.random((20, 3)):
        b = evaluate_bundle(spec, eta)
        assert b.sqrt_g > 0
        assert np.allclose(b.G, b.DL.T @ b.DL, atol=1e-13)
        assert np.allclose(b.DL @ b.DL_inv, np.eye(3), atol=1e-13)
        assert b.sqrt_g**2 == pytest.approx(np.linalg.det(b.G), rel=1e-12)
        assert np.allclose(b.G @ b.G_inv, np.eye(3), atol=1e-12)


def test_jacobian_matches_finite_differences():
    spec = MappingSpec("colella", (7.0, 3.0, 2.0), alpha_c=0.12)
    rng = np.random.default_rng(2)
    h = 1e-5
    for eta in rng.random((100, 3)):
        dl = geometry.jacobians(spec, eta[None, :])[0]
        fd = np.empty((3, 3))
        for j in range(3):
            ep = eta.copy()
            em = eta.copy()
            ep[j] += h
            em[j] -= h
            fd[:, j] = (
                geometry.map_positions(spec, ep[None, :])[0]
                - geometry.map_positions(spec, em[None, :])[0]
            ) / (2 * h)
        assert np.max(np.abs(dl - fd)) < 1e-6


def test_periodicity_of_derived_quantities():
    spec = MappingSpec("colella", (5.0, 2.0, 1.0), alpha_c=0.1)
    rng = np.random.default_rng(3)
    for eta in rng.random((10, 3)):
        b0 = evaluate_bundle(spec, eta)
        for j in range(3):
            shifted = eta.copy()
            shifted[j] = np.mod(shifted[j] + 1.0, 1.0)
            b1 = evaluate_bundle(spec, shifted)
            assert np.allclose(b0.DL, b1.DL, atol=1e-9)
            assert b0.sqrt_g == pytest.approx(b1.sqrt_g, rel=1e-9)


def test_construction_rejects_bad_parameters():
    with pytest.raises(ValueError):
        MappingSpec("cuboid", (0.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        MappingSpec("spiral", (1.0, 1.0, 1.0))
    # |alpha_c| >= 1/(2*pi) makes the determinant vanish somewhere
    with pytest.raises(SingularMappingError):
        MappingSpec("colella", (1.0, 1.0, 1.0), alpha_c=0.2)


def test_volume_includes_colella_distortion_average():
    spec = MappingSpec("colella", (12.0, 1.0, 1.0), alpha_c=0.1)
    assert spec.volume == pytest.approx(12.0)
    # numeric check: the distortion integrates to zero
    rng = np.random.default_rng(4)
    etas = rng.random((200000, 3))
    assert np.mean(geometry.sqrt_g(spec, etas)) == pytest.approx(12.0, rel=5e-3)
