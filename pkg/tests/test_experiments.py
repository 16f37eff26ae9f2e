"""Sweeps, Monte Carlo collision counts, and blob clouds."""

import math

import numpy as np
import pytest

from spherevortex.equilibria import four_vortex, polar_pair
from spherevortex.errors import ConfigError, OverlappingCaps
from spherevortex.experiments import (
    BlobCloud,
    blob_evolve,
    blob_initialize,
    montecarlo_collisions,
    stability_sweep,
    substream,
)
from spherevortex.sphere import E3, in_cap


def test_substream_reproducible_and_distinct():
    a = substream(3, 1, 2).standard_normal(4)
    b = substream(3, 1, 2).standard_normal(4)
    c = substream(3, 1, 3).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


# --- stability sweeps ---


def test_sweep_four_vortex_grid():
    rows = stability_sweep("four-vortex", a_values=(0.3, 0.6),
                           gamma_values=(0.0, 0.5))
    assert len(rows) == 4
    for row in rows:
        assert row.family == "four_vortex"
        assert row.N == 4
        assert row.error == ""
        assert row.eq_residual < 1e-10
        assert math.isfinite(row.max_real_part)
        # kappa column echoes the solved polar strength
        assert math.isfinite(row.kappa)


def test_sweep_polar_pair_rows():
    rows = stability_sweep("polar-pair", gamma_values=(0.0, 1.0))
    assert len(rows) == 2
    assert all(row.N == 2 for row in rows)
    assert all(row.max_real_part < 1e-10 for row in rows)


def test_sweep_crystal_requires_kappa_and_n():
    with pytest.raises(ConfigError):
        stability_sweep("vortex-crystal", a_values=(0.5,),
                        gamma_values=(0.0,))
    rows = stability_sweep("vortex-crystal", a_values=(0.5,),
                           gamma_values=(0.0,), kappa_values=(1.0, 2.0),
                           n=6)
    assert len(rows) == 2
    assert all(row.N == 6 for row in rows)


def test_sweep_bad_family():
    with pytest.raises(ConfigError):
        stability_sweep("unknown-family", a_values=(0.5,),
                        gamma_values=(0.0,))


def test_sweep_failed_rows_carry_error_text():
    rows = stability_sweep("four-vortex", a_values=(0.5, 1.5),
                           gamma_values=(0.0,))
    good, bad = rows
    assert good.error == ""
    assert bad.error != ""
    assert math.isnan(bad.max_real_part)
    assert math.isnan(bad.eq_residual)


# --- Monte Carlo collisions ---


def test_montecarlo_validation():
    strengths = np.array([1.0, 1.0, -2.0])
    with pytest.raises(ConfigError):
        montecarlo_collisions(3, strengths, 0.0, (0.01, 0.05), 1.0, 4, 0.1)
    with pytest.raises(ConfigError):
        montecarlo_collisions(3, strengths, 0.0, (2.5,), 1.0, 4, 0.1)
    with pytest.raises(ConfigError):
        montecarlo_collisions(3, np.array([1.0, 1.0, -1.0]), 0.0, (0.1,),
                              1.0, 4, 0.1)


def test_montecarlo_replay_bit_identical():
    strengths = np.array([1.0, 1.0, -2.0])
    kwargs = dict(tau=0.2, trials=30, dt=0.02, master_seed=11)
    one = montecarlo_collisions(3, strengths, 0.0, (0.3, 0.1), **kwargs)
    two = montecarlo_collisions(3, strengths, 0.0, (0.3, 0.1), **kwargs)
    np.testing.assert_array_equal(one.fractions, two.fractions)
    np.testing.assert_array_equal(one.collided, two.collided)
    assert one.collided.shape == (2, 30)


def test_montecarlo_eps_independent_streams():
    # trial t sees the same initial condition under every eps
    strengths = np.array([1.0, -1.0])
    wide = montecarlo_collisions(2, strengths, 0.0, (1.9,), tau=0.05,
                                 trials=200, dt=0.05, master_seed=0)
    # chordal distance of two uniform points is below 1.9 with mass
    # 1.9^2/4, so near-saturation is expected at the top of the range
    assert wide.fractions[0] >= 0.85
    assert wide.stderrs[0] == pytest.approx(
        math.sqrt(wide.fractions[0] * (1 - wide.fractions[0]) / 200),
        abs=1e-12)


def test_montecarlo_strict_floor_counts_from_start():
    # eps larger than the polar-pair distance flags immediately at t=0
    strengths = np.array([1.0, 1.0, -2.0])
    stats = montecarlo_collisions(3, strengths, 0.5, (1.999,), tau=0.02,
                                  trials=50, dt=0.01, master_seed=3)
    assert stats.fractions[0] == 1.0


# --- blob clouds ---


def test_blob_initialize_layout():
    cfg = polar_pair(1.0, 0.0)
    cloud = blob_initialize(cfg, eps=0.1, particles_per_blob=25, beta=0.4,
                            rng=substream(0, 40))
    assert cloud.positions.shape == (50, 3)
    assert cloud.blob_ids.tolist() == [1] * 25 + [2] * 25
    np.testing.assert_allclose(np.linalg.norm(cloud.positions, axis=1), 1.0,
                               atol=1e-12)
    assert np.all(in_cap(cloud.positions[:25], E3, 0.1 * (1 + 1e-12)))
    assert np.all(in_cap(cloud.positions[25:], -E3, 0.1 * (1 + 1e-12)))
    # equal split of each vortex strength across its particles
    np.testing.assert_allclose(cloud.circulations[:25], 1.0 / 25, atol=1e-15)


def test_blob_initialize_rejects_overlap_and_zero_strengths():
    with pytest.raises(OverlappingCaps):
        blob_initialize(four_vortex(0.05, 0.0), eps=0.2,
                        particles_per_blob=10, beta=0.4,
                        rng=substream(0, 41))
    from spherevortex.dynamics import VortexConfig

    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    cfg = VortexConfig(points=pts, strengths=np.array([1.0, 0.0, -1.0]))
    with pytest.raises(ConfigError):
        blob_initialize(cfg, eps=0.1, particles_per_blob=10, beta=0.4,
                        rng=substream(0, 42))


def test_blob_initialize_validation():
    cfg = polar_pair(1.0, 0.0)
    rng = substream(0, 43)
    with pytest.raises(ConfigError):
        blob_initialize(cfg, eps=0.0, particles_per_blob=10, beta=0.4,
                        rng=rng)
    with pytest.raises(ConfigError):
        blob_initialize(cfg, eps=0.1, particles_per_blob=0, beta=0.4,
                        rng=rng)
    with pytest.raises(ConfigError):
        blob_initialize(cfg, eps=0.1, particles_per_blob=10, beta=1.0,
                        rng=rng)


def test_blob_evolve_initial_moment_bounds():
    cfg = polar_pair(1.0, 0.0)
    eps = 0.1
    cloud = blob_initialize(cfg, eps=eps, particles_per_blob=60, beta=0.4,
                            rng=substream(0, 44))
    report = blob_evolve(cloud, dt=0.01, t_end=0.0)
    assert report.times.tolist() == [0.0]
    gaps = np.linalg.norm(report.centers[0] - cfg.points, axis=1)
    assert np.max(gaps) <= eps
    assert np.max(report.second_moment[0]) <= 4.0 * eps * eps
    for order, series in report.higher_moments.items():
        assert np.max(series[0]) <= 16.0 ** order * eps ** (4 * order)
    # the second moment never exceeds the squared support radius
    assert np.all(report.second_moment <= report.support_radius ** 2 + 1e-15)


def test_blob_evolve_diagnostic_cadence_and_confinement():
    cfg = polar_pair(1.0, 0.5)
    cloud = blob_initialize(cfg, eps=0.1, particles_per_blob=40, beta=0.4,
                            rng=substream(0, 45))
    report = blob_evolve(cloud, dt=0.01, t_end=0.25)
    # every 10th step plus the endpoint
    np.testing.assert_allclose(report.times, [0.0, 0.1, 0.2, 0.25],
                               atol=1e-12)
    assert report.exit_time is None
    assert report.exit_blob is None
    assert report.exit_radius == pytest.approx(0.1 ** 0.4, abs=1e-15)
    assert np.max(report.support_radius) < 0.2


def test_blob_evolve_explicit_diagnostics_and_outside_mass():
    cfg = polar_pair(1.0, 0.0)
    cloud = blob_initialize(cfg, eps=0.1, particles_per_blob=30, beta=0.4,
                            rng=substream(0, 46))
    report = blob_evolve(cloud, dt=0.01, t_end=0.1,
                         diagnostic_times=(0.05,), outside_radii=(0.5,))
    np.testing.assert_allclose(report.times, [0.0, 0.05, 0.1], atol=1e-12)
    # polar blobs stay in their caps, far inside radius 0.5
    assert np.max(report.mass_outside[0.5]) == 0.0


def test_blob_evolve_detects_exit_immediately():
    # hand-built cloud far from its reference: the support check must
    # flag the very first diagnostic and stop when asked to
    reference = polar_pair(1.0, 0.0)
    rng = substream(0, 47)
    cloud = blob_initialize(reference, eps=0.1, particles_per_blob=10,
                            beta=0.5, rng=rng)
    rolled = BlobCloud(
        positions=cloud.positions[::-1].copy(),
        circulations=cloud.circulations,
        blob_ids=cloud.blob_ids,
        eps=cloud.eps,
        beta=cloud.beta,
        reference=reference,
        particles_per_blob=10,
    )
    report = blob_evolve(rolled, dt=0.01, t_end=0.5, stop_on_exit=True)
    assert report.exit_time == 0.0
    assert report.exit_blob == 1
    assert report.times.tolist() == [0.0]


def test_blob_moments_are_particle_order_invariant():
    cfg = polar_pair(1.0, 0.0)
    cloud = blob_initialize(cfg, eps=0.1, particles_per_blob=30, beta=0.4,
                            rng=substream(0, 48))
    shuffled_positions = cloud.positions.copy()
    shuffled_positions[:30] = shuffled_positions[:30][::-1]
    shuffled = BlobCloud(
        positions=shuffled_positions,
        circulations=cloud.circulations,
        blob_ids=cloud.blob_ids,
        eps=cloud.eps,
        beta=cloud.beta,
        reference=cfg,
        particles_per_blob=30,
    )
    one = blob_evolve(cloud, dt=0.01, t_end=0.0)
    two = blob_evolve(shuffled, dt=0.01, t_end=0.0)
    np.testing.assert_array_equal(one.centers, two.centers)
    np.testing.assert_array_equal(one.second_moment, two.second_moment)
