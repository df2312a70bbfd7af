import numpy as np
import pytest

from mgrit_advect.core import (Grid1D, Grid2D, TimeGrid, get_wave_speed,
                               initial_condition, random_state,
                               space_time_norm)


def test_grid1d_spacing_and_nodes():
    g = Grid1D(8)
    assert g.h == pytest.approx(0.25)
    nodes = g.nodes()
    assert nodes[0] == -1.0
    assert nodes[-1] == pytest.approx(1.0 - g.h)  # no duplicated endpoint
    assert len(nodes) == 8


def test_grid1d_wrap_periodic():
    g = Grid1D(16)
    coords = np.array([-1.0, 1.0, 2.5, -3.0])
    wrapped = g.wrap(coords)
    assert np.all(wrapped >= -1.0) and np.all(wrapped < 1.0)
    assert wrapped[1] == pytest.approx(-1.0)  # x = 1 identifies with x = -1


def test_grid2d_layout_x_fastest():
    g = Grid2D(4)
    X, Y = g.nodes()
    assert g.n_points == 16
    # flat index j*n + i: x cycles fastest
    assert np.allclose(X[:4], g.axis.nodes())
    assert np.allclose(Y[:4], -1.0)
    assert Y[4] == pytest.approx(-1.0 + g.h)


def test_time_grid():
    tg = TimeGrid(4, 0.25)
    assert tg.t_final == pytest.approx(1.0)
    assert np.allclose(tg.times(), [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        TimeGrid(0, 0.1)


def test_wave_speed_catalog():
    c1 = get_wave_speed("C1")
    assert c1.constant and c1.dim == 1
    x = np.linspace(-1, 1, 5)
    assert np.allclose(c1.alpha(x, 0.3), 1.0)

    c2 = get_wave_speed("C2")
    assert not c2.constant
    assert np.allclose(c2.alpha(x, 0.0), 1.0)
    assert np.allclose(c2.alpha(x, 0.25), np.cos(np.pi / 2))

    c3 = get_wave_speed("C3")
    assert np.allclose(c3.alpha(x, 0.0), np.cos(2 * np.pi * x))

    c4 = get_wave_speed("C4")
    assert c4.constant and c4.dim == 2
    assert np.allclose(c4.alpha(x, x, 0.1), 1.0)
    assert np.allclose(c4.beta(x, x, 0.1), 1.0)

    c5 = get_wave_speed("C5")
    y = np.linspace(-1, 1, 5)
    assert np.allclose(c5.alpha(x, y, 0.0), np.sin(np.pi * y) ** 2)
    assert np.allclose(c5.beta(x, y, 0.0), -np.cos(np.pi * x) ** 2)

    with pytest.raises(ValueError):
        get_wave_speed("C9")


def test_wave_speed_beta_only_2d():
    with pytest.raises(ValueError):
        get_wave_speed("C1").beta(0.0, 0.0)


def test_initial_condition_periodic_smooth():
    g = Grid1D(64)
    u = initial_condition(g)
    assert u.shape == (64,)
    assert np.all(u >= 0.0)
    # sin^4(pi x) vanishes at integer x
    assert u[0] == pytest.approx(0.0, abs=1e-14)

    g2 = Grid2D(16)
    u2 = initial_condition(g2)
    assert u2.shape == (256,)
    # vanishes on the whole boundary line x = -1
    assert np.allclose(u2[::16], 0.0, atol=1e-14)


def test_space_time_norm():
    states = np.ones((3, 4))
    assert space_time_norm(states) == pytest.approx(np.sqrt(12.0))
    as_list = [np.ones(4) for _ in range(3)]
    assert space_time_norm(as_list) == pytest.approx(np.sqrt(12.0))
    with pytest.raises(ValueError):
        space_time_norm(np.empty((0, 4)))


def test_random_state_deterministic():
    g = Grid1D(32)
    a = random_state(g, seed=7)
    b = random_state(g, seed=7)
    c = random_state(g, seed=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all((a >= 0.0) & (a < 1.0))
