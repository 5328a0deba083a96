import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elaa_channel.scenario import (SPEED_OF_LIGHT, Density, ScenarioParams, UserLayout, build_ula,
                                   build_ura, distance_2d, distance_3d, place_users)

LAMBDA_35 = SPEED_OF_LIGHT / 3.5e9


def test_default_params_are_umi():
    p = ScenarioParams()
    assert (p.d_cor, p.mu_kappa, p.sigma_kappa) == (5000, 2.07, 1.15)
    assert (p.sigma_nlos, p.sigma_los, p.d1_bar, p.d2_bar) == (1.80, 0.92, 18, 36)
    assert (p.alpha, p.beta, p.rho, p.q) == (0.020, 0.007, 1.765, 1.050)
    assert p.wavelength == pytest.approx(0.085655, abs=1e-6)
    assert p.antenna_height == 10.0


@pytest.mark.parametrize("bad", [dict(d_cor=0), dict(wavelength=-1), dict(rho=0),
                                 dict(sigma_los=-0.1), dict(p_los_override=1.5)])
def test_params_reject_invalid(bad):
    with pytest.raises(ValueError):
        ScenarioParams(**bad)


def test_ula_aperture_2000_elements():
    g = build_ula(2000, LAMBDA_35 / 2)
    length = g.positions[-1, 0] - g.positions[0, 0]
    assert length == pytest.approx(1999 * LAMBDA_35 / 2)
    assert length == pytest.approx(85.61, abs=0.01)


def test_ula_small_cases():
    g = build_ula(1, 0.3, origin=(2.0, 3.0))
    np.testing.assert_array_equal(g.positions, [[2.0, 3.0, 10.0]])
    g = build_ula(3, 1.0, height=0.0)
    np.testing.assert_array_equal(g.positions[:, 0], [0, 1, 2])
    assert np.all(g.positions[:, 2] == 0.0)
    assert g.M == 3


def test_ula_default_spacing_is_half_wavelength():
    g = build_ula(4, wavelength=0.1)
    assert g.spacing == pytest.approx(0.05)


@pytest.mark.parametrize("M, s", [(0, 1.0), (-2, 1.0), (3, 0.0), (3, -1.0), (2.5, 1.0)])
def test_ula_invalid(M, s):
    with pytest.raises(ValueError):
        build_ula(M, s)


@given(st.integers(1, 500), st.floats(1e-3, 10.0))
def test_ula_length_is_exact(M, s):
    g = build_ula(M, s)
    assert np.allclose(np.diff(g.positions[:, 0]), s)
    assert g.length == pytest.approx((M - 1) * s)


def test_ura_degenerates_to_ula():
    a = build_ura(1, 7, 0.4, height=5.0)
    b = build_ula(7, 0.4, height=5.0)
    np.testing.assert_array_equal(a.positions, b.positions)


def test_ura_unit_square_and_ordering():
    g = build_ura(2, 2, 1.0, height=0.0)
    np.testing.assert_array_equal(g.positions, [[0, 0, 0], [1, 0, 0], [0, 0, 1], [1, 0, 1]])


def test_ura_columns_share_horizontal_coordinate():
    g = build_ura(10, 200, 0.05)
    assert g.M == 2000
    grid = g.positions.reshape(10, 200, 3)
    assert np.all(grid[:, :, 0] == grid[0:1, :, 0])
    assert np.all(np.diff(grid[:, 0, 2]) > 0)  # row 0 lowest


@pytest.mark.parametrize("rows, cols", [(0, 3), (2, 0)])
def test_ura_invalid(rows, cols):
    with pytest.raises(ValueError):
        build_ura(rows, cols, 1.0)


def test_distance_examples():
    assert distance_3d((1, 2, 3), (1, 2, 3)) == 0
    assert distance_3d((0, 0, 0), (3, 4, 0)) == 5
    assert distance_2d((0, 0, 1.5), (0, 0, 10)) == 0
    assert distance_2d((10, 0, 1.5), (10, 20, 10)) == 20
    assert distance_2d((3, 4, 1.5), (0, 0, 10)) == 5


def test_spherical_wavefront_varies_across_aperture():
    g = build_ula(2000, LAMBDA_35 / 2, height=0.0)
    user = np.array([g.center[0], 20.0, 0.0])
    d = distance_3d(g.positions, user)
    assert d.min() == pytest.approx(20.0, abs=0.03)
    assert d[0] == pytest.approx(math.hypot(20.0, 1999 * LAMBDA_35 / 4), rel=1e-9)
    assert d[0] == pytest.approx(47.24, abs=0.01)


points = st.tuples(*[st.floats(-1e3, 1e3)] * 3)


@given(points, points, points)
def test_distance_metric_properties(a, b, c):
    assert distance_3d(a, b) == distance_3d(b, a)
    assert distance_3d(a, c) <= distance_3d(a, b) + distance_3d(b, c) + 1e-9
    assert distance_2d(a, b) <= distance_3d(a, b) + 1e-12


def test_line_range_by_density():
    assert UserLayout(K=5, density="high").line_range == 1.0
    assert UserLayout(K=5, density=Density.LOW).line_range == 20.0


def test_place_users_on_parallel_segment():
    layout = UserLayout(K=5, density="high", distance=30.0, center_x=42.0, height=1.5)
    pos = place_users(layout, np.random.default_rng(1))
    assert pos.shape == (5, 3)
    assert np.all(pos[:, 1] == 30.0) and np.all(pos[:, 2] == 1.5)
    assert np.ptp(pos[:, 0]) <= 1.0
    assert np.all(np.abs(pos[:, 0] - 42.0) <= 0.5)

    one = place_users(UserLayout(K=1, density="low"), np.random.default_rng(2))
    assert abs(one[0, 0]) <= 10.0


def test_place_users_uniform_mean():
    layout = UserLayout(K=100_000, density="low", center_x=5.0)
    x = place_users(layout, np.random.default_rng(3))[:, 0]
    se = 20.0 / math.sqrt(12) / math.sqrt(x.size)
    assert abs(x.mean() - 5.0) < 3 * se


def test_user_layout_rejects_empty():
    with pytest.raises(ValueError):
        UserLayout(K=0)
