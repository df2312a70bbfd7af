import numpy as np
import pytest

from mgrit_advect.core import Grid1D, Grid2D, get_wave_speed
from mgrit_advect.semi_lagrangian import (DepartureSet1D, decompose,
                                          erk_departures, erk_scheme,
                                          erk_trace_back, interp_weights,
                                          sl_step, stencil_extents)


def test_stencil_extents():
    assert stencil_extents(1) == (1, 0)
    assert stencil_extents(3) == (2, 1)
    assert stencil_extents(5) == (3, 2)
    with pytest.raises(ValueError):
        stencil_extents(2)


def test_erk_tableaux_consistency():
    for order in (1, 3, 5):
        s = erk_scheme(order)
        assert s.b.sum() == pytest.approx(1.0)
        # row-sum condition c_i = sum_j a_ij
        assert np.allclose(s.a.sum(axis=1), s.c, atol=1e-12)
    with pytest.raises(ValueError):
        erk_scheme(2)


@pytest.mark.parametrize("order", [1, 3, 5])
def test_erk_order_of_accuracy(order):
    """Convergence order against a near-exact reference on y' = cos(2 pi t)."""
    from mgrit_advect.oracle import trace_back_exact

    speed = get_wave_speed("C2")
    scheme = erk_scheme(order)
    arrival = np.array([0.3])
    exact = trace_back_exact(speed, arrival, 0.1, 0.2, substeps=4096)
    errs, dts = [], []
    for k in range(4):
        dt = 0.2 / 2**k
        # compose 2^k ERK steps to span the same interval
        x = arrival.copy()
        for j in range(2**k - 1, -1, -1):
            x = erk_trace_back(speed, x, 0.1 + j * dt, dt, scheme)
        errs.append(abs(float(x[0] - exact[0])))
        dts.append(dt)
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    # at least the nominal order (quadrature superconvergence can exceed it
    # for space-independent speeds)
    assert slope >= order - 0.5


def test_decompose_basic():
    g = Grid1D(8)  # h = 0.25, nodes -1, -0.75, ...
    east, eps = decompose(g, np.array([-0.8]))
    # east neighbor of -0.8 is -0.75 (index 1), eps = 0.05/0.25 = 0.2
    assert east[0] == 1
    assert eps[0] == pytest.approx(0.2)


def test_decompose_on_node_and_wrap():
    g = Grid1D(8)
    east, eps = decompose(g, g.nodes())
    assert np.array_equal(east, np.arange(8))
    assert np.allclose(eps, 0.0)
    # periodic wrap: a coordinate below the domain maps inside
    east, eps = decompose(g, np.array([-1.0 - 0.25 * 0.5]))
    assert east[0] == 0
    assert eps[0] == pytest.approx(0.5)
    assert np.all((eps >= 0.0) & (eps < 1.0))


def test_interp_weights_partition_of_unity():
    rng = np.random.default_rng(0)
    eps = rng.random(50)
    for p in (1, 3, 5):
        w = interp_weights(p, eps)
        assert w.shape == (50, p + 1)
        assert np.allclose(w.sum(axis=1), 1.0, atol=1e-12)


def test_interp_weights_nodal():
    # eps = 0 means the departure point is the east node itself
    for p in (1, 3, 5):
        w = interp_weights(p, np.array([0.0]))[0]
        ell, _ = stencil_extents(p)
        expected = np.zeros(p + 1)
        expected[ell] = 1.0
        assert np.allclose(w, expected, atol=1e-12)


def test_interp_weights_reproduce_polynomials():
    """Degree-p interpolation is exact on polynomials of degree <= p."""
    for p in (1, 3, 5):
        ell, r = stencil_extents(p)
        offsets = np.arange(-ell, r + 1)
        for eps in (0.2, 0.5, 0.9):
            w = interp_weights(p, np.array([eps]))[0]
            for deg in range(p + 1):
                assert np.dot(w, offsets.astype(float) ** deg) == pytest.approx(
                    (-eps) ** deg, abs=1e-10)


def test_sl_step_constant_shift_exact():
    """An integer-cell displacement is a pure index shift for any p."""
    g = Grid1D(32)
    rng = np.random.default_rng(1)
    u = rng.random(32)
    for p in (1, 3, 5):
        nodes = g.nodes()
        dep = DepartureSet1D.from_coords(g, nodes, nodes - 3 * g.h, 0.0, 0.1)
        v = sl_step(g, dep, p, u)
        assert np.allclose(v, np.roll(u, 3), atol=1e-12)


def test_sl_step_translation_accuracy():
    """Fractional constant shift: interpolation error decays as h^{p+1}."""
    shift = 0.4
    for p in (1, 3, 5):
        errs, hs = [], []
        for k in (6, 7, 8, 9):
            g = Grid1D(2**k)
            x = g.nodes()
            u = np.sin(np.pi * x) ** 4
            dep = DepartureSet1D.from_coords(g, x, x - shift * g.h, 0.0, 0.1)
            v = sl_step(g, dep, p, u)
            exact = np.sin(np.pi * (x - shift * g.h)) ** 4
            errs.append(np.max(np.abs(v - exact)))
            hs.append(g.h)
        slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
        assert slope == pytest.approx(p + 1, abs=0.4)


def test_sl_step_2d_separable_shift():
    """2D step with an axis-aligned integer shift acts as a 2D roll."""
    g = Grid2D(16)
    rng = np.random.default_rng(2)
    u = rng.random(g.n_points)
    x, y = g.nodes()
    from mgrit_advect.semi_lagrangian import DepartureSet2D

    dep = DepartureSet2D.from_coords(g, x, y, x - 2 * g.h, y - 5 * g.h, 0.0, 0.1)
    v = sl_step(g, dep, 3, u)
    expected = np.roll(u.reshape(16, 16), (5, 2), axis=(0, 1)).ravel()
    assert np.allclose(v, expected, atol=1e-12)


def test_sl_step_2d_matches_tensor_of_1d():
    """For a separable state and axis shifts, the 2D step is the tensor
    product of 1D steps."""
    n = 32
    g2, g1 = Grid2D(n), Grid1D(n)
    xs = g1.nodes()
    ux = np.sin(np.pi * xs) ** 2
    uy = np.cos(np.pi * xs) + 2.0
    u = np.outer(uy, ux).ravel()
    sx, sy = 0.3, 0.7
    x, y = g2.nodes()
    from mgrit_advect.semi_lagrangian import DepartureSet2D

    dep2 = DepartureSet2D.from_coords(g2, x, y, x - sx * g2.h, y - sy * g2.h, 0.0, 0.1)
    dep_x = DepartureSet1D.from_coords(g1, xs, xs - sx * g1.h, 0.0, 0.1)
    dep_y = DepartureSet1D.from_coords(g1, xs, xs - sy * g1.h, 0.0, 0.1)
    for p in (1, 3, 5):
        v2 = sl_step(g2, dep2, p, u)
        vx = sl_step(g1, dep_x, p, ux)
        vy = sl_step(g1, dep_y, p, uy)
        assert np.allclose(v2, np.outer(vy, vx).ravel(), atol=1e-12)


def test_erk_departures_constant_speed():
    g = Grid1D(64)
    speed = get_wave_speed("C1")
    dep = erk_departures(g, speed, 0.0, 0.85 * g.h, erk_scheme(1))
    assert np.allclose(dep.displacement, 0.85 * g.h, atol=1e-14)
    assert np.allclose(dep.eps, 0.85, atol=1e-12)


def test_sl_step_rejects_wrong_size():
    g = Grid1D(16)
    dep = erk_departures(g, get_wave_speed("C1"), 0.0, 0.1, erk_scheme(1))
    with pytest.raises(ValueError):
        sl_step(g, dep, 1, np.ones(17))
