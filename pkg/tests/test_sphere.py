"""Geometry primitives: distances, frames, caps, sampling."""

import math

import numpy as np
import pytest

from spherevortex.errors import ConfigError
from spherevortex.experiments import substream
from spherevortex.sphere import (
    E1,
    E2,
    E3,
    cap_area,
    chordal_distance,
    chordal_to_geodesic,
    check_unit,
    geodesic_to_chordal,
    in_cap,
    min_pairwise_distance,
    normalize,
    pairwise_sq_distances,
    project_tangent,
    rotation_z,
    sample_cap,
    sample_uniform,
    singular_moment_integral,
    tangent_basis,
)


def test_normalize_unit_output():
    v = normalize(np.array([3.0, 4.0, 0.0]))
    assert abs(np.linalg.norm(v) - 1.0) < 1e-15
    np.testing.assert_allclose(v, [0.6, 0.8, 0.0])


def test_normalize_rejects_zero():
    with pytest.raises(ConfigError):
        normalize(np.zeros(3))


def test_check_unit_accepts_and_rejects():
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert check_unit(pts) is pts
    with pytest.raises(ConfigError):
        check_unit(np.array([[0.0, 0.0, 1.1]]))


def test_chordal_geodesic_roundtrip():
    for r in (0.0, 0.3, 1.0, 1.9999, 2.0):
        assert abs(geodesic_to_chordal(chordal_to_geodesic(r)) - r) < 1e-12
    assert abs(chordal_to_geodesic(2.0) - math.pi) < 1e-15


def test_cross_norm_identity():
    # |x ^ y| = |x - y| sqrt(1 - |x - y|^2 / 4) on the unit sphere
    rng = substream(0, 1)
    for _ in range(100):
        x, y = sample_uniform(rng), sample_uniform(rng)
        d = chordal_distance(x, y)
        lhs = np.linalg.norm(np.cross(x, y))
        assert abs(lhs - d * math.sqrt(max(0.0, 1.0 - d * d / 4.0))) < 1e-12


def test_pairwise_sq_distances_matches_loop():
    rng = substream(0, 2)
    pts = np.array([sample_uniform(rng) for _ in range(5)])
    d2 = pairwise_sq_distances(pts)
    for i in range(5):
        for j in range(5):
            expect = np.sum((pts[i] - pts[j]) ** 2)
            assert abs(d2[i, j] - expect) < 1e-14


def test_min_pairwise_distance_pair():
    pts = np.array([E3, -E3, [1.0, 0.0, 0.0], [0.999999995, 1e-4, 0.0]])
    pts[3] = normalize(pts[3])
    dist, pair = min_pairwise_distance(pts)
    assert pair == (2, 3)
    assert dist < 1e-3


def test_rotation_z_action():
    theta = 0.7
    rot = rotation_z(theta)
    np.testing.assert_allclose(rot @ E1,
                               [math.cos(theta), math.sin(theta), 0.0],
                               atol=1e-15)
    np.testing.assert_allclose(rot @ rot.T, np.eye(3), atol=1e-15)
    with pytest.raises(ConfigError):
        rotation_z(float("nan"))


def test_project_tangent_orthogonal():
    rng = substream(0, 3)
    for _ in range(20):
        x = sample_uniform(rng)
        v = rng.standard_normal(3)
        assert abs(np.dot(project_tangent(x, v), x)) < 1e-14


def test_tangent_basis_poles():
    north = tangent_basis(E3)
    np.testing.assert_array_equal(north.b1, E1)
    np.testing.assert_array_equal(north.b2, E2)
    south = tangent_basis(-E3)
    np.testing.assert_array_equal(south.b1, E1)
    np.testing.assert_array_equal(south.b2, -E2)


def test_tangent_basis_roundtrip():
    rng = substream(0, 4)
    for _ in range(20):
        x = sample_uniform(rng)
        frame = tangent_basis(x)
        v = project_tangent(x, rng.standard_normal(3))
        back = frame.from_coords(frame.coords(v))
        np.testing.assert_allclose(back, v, atol=1e-14)


def test_cap_area_and_domain():
    assert abs(cap_area(1.0) - math.pi) < 1e-15
    assert cap_area(2.0) == pytest.approx(4.0 * math.pi)
    with pytest.raises(ConfigError):
        cap_area(2.5)


def test_in_cap_mask():
    pts = np.array([E3, [0.0, 1.0, 0.0], -E3])
    mask = in_cap(pts, E3, 1.5)
    assert mask.tolist() == [True, True, False]


def test_sample_uniform_unit_norm():
    rng = substream(0, 5)
    pts = np.array([sample_uniform(rng) for _ in range(500)])
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    # isotropy: componentwise mean is O(1/sqrt(n))
    assert np.max(np.abs(pts.mean(axis=0))) < 0.1


def test_sample_cap_containment_and_height():
    rng = substream(0, 6)
    center = sample_uniform(rng)
    r = 0.4
    pts = np.array([sample_cap(center, r, rng) for _ in range(2000)])
    assert np.all(in_cap(pts, center, r * (1.0 + 1e-12)))
    # uniform cap law: mean height above center is 1 - r^2/4
    heights = pts @ center
    assert abs(heights.mean() - (1.0 - r * r / 4.0)) < 5e-3


def test_singular_moment_integral_values():
    assert singular_moment_integral(0.0) == pytest.approx(4.0 * math.pi,
                                                          rel=1e-15)
    assert singular_moment_integral(1.0) == pytest.approx(4.0 * math.pi,
                                                          rel=1e-15)
    assert singular_moment_integral(0.5) == pytest.approx(
        2.0 ** 2.5 * math.pi / 1.5, rel=1e-15)
    with pytest.raises(ConfigError):
        singular_moment_integral(2.0)
