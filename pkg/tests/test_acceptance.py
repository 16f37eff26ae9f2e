"""Acceptance gate: one test per reproduction criterion.

Each check carries its tolerance and runtime budget internally; the
full battery is also available from the command line as
`spherevortex verify`.  The two long statistical checks (confinement
contrast and the collision trend) dominate the runtime of this module.
"""

import pytest

from spherevortex import verify


def _run(check):
    result = check(0)
    line = f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: " \
           f"{result.detail} ({result.seconds:.2f}s)"
    print(line)
    assert result.passed, line


def test_criterion_01_polar_pair_stationarity():
    _run(verify.check_polar_stationarity)


def test_criterion_02_stationary_strength_ratio_family():
    _run(verify.check_kappa_family)


def test_criterion_03_four_vortex_spectrum():
    _run(verify.check_four_vortex_spectrum)


def test_criterion_04_polar_pair_jacobian():
    _run(verify.check_polar_jacobian)


def test_criterion_05_jacobian_finite_differences():
    _run(verify.check_jacobian_fd)


def test_criterion_06_conservation_and_order():
    _run(verify.check_conservation)


def test_criterion_07_geometry_oracles():
    _run(verify.check_geometry_oracles)


def test_criterion_08_blob_initial_moments():
    _run(verify.check_blob_initial_moments)


@pytest.mark.slow
def test_criterion_09_confinement_contrast():
    _run(verify.check_confinement_contrast)


@pytest.mark.slow
def test_criterion_10_collision_trend():
    _run(verify.check_collision_trend)
