import itertools
import warnings

import numpy as np
import pytest

from analogbf.arrays import (AngleGrid, ArrayGeometry, PsfSpec,
                             chebyshev_target, chebyshev_window, db,
                             mainlobe_width, measurement_matrix,
                             measurement_matrix_kron, mra7, sidelobe_levels,
                             steering, sum_coarray, ula, uniform_grid)

from conftest import crandn


def brute_sums(tx, rx):
    return sorted({a + b for a, b in itertools.product(tx, rx)})


def test_ula11_positions():
    assert list(ula(11).positions) == list(range(-5, 6))


def test_ula_small():
    assert list(ula(1).positions) == [0.0]
    assert list(ula(2).positions) == [-0.5, 0.5]


def test_ula_zero_elements():
    with pytest.raises(ValueError):
        ula(0)


def test_mra7_positions_and_aperture():
    assert list(mra7().positions) == [-5, -4, -2, 0, 2, 4, 5]
    assert mra7().aperture == ula(11).aperture == 10


def test_geometry_must_increase():
    with pytest.raises(ValueError):
        ArrayGeometry([0, 0, 1])
    with pytest.raises(ValueError):
        ArrayGeometry([])


def test_geometry_is_immutable():
    g = ula(3)
    with pytest.raises(ValueError):
        g.positions[0] = 7


def test_angle_grid_validation():
    with pytest.raises(ValueError):
        AngleGrid([0.1, 0.0])
    with pytest.raises(ValueError):
        AngleGrid([0.0, 2.0])


def test_steering_broadside_is_ones():
    assert np.allclose(steering(ula(11), 0.0), 1)


def test_steering_endfire():
    a = steering(ula(11), np.pi / 2)
    assert np.allclose(a, np.exp(1j * np.pi * np.arange(-5, 6)))
    assert np.isclose(a[0], -1)


def test_steering_unit_modulus(rng):
    for phi in rng.uniform(-np.pi / 2, np.pi / 2, 10):
        assert np.allclose(np.abs(steering(mra7(), phi)), 1)


@pytest.mark.parametrize("tx,rx", [(ula(11), ula(11)), (mra7(), mra7())])
def test_sum_coarray_contiguous(tx, rx):
    expected = brute_sums(tx.positions, rx.positions)
    assert list(sum_coarray(tx, rx)) == expected == list(range(-10, 11))


def test_sum_coarray_single():
    g = ArrayGeometry([0])
    assert list(sum_coarray(g, g)) == [0]


def test_measurement_matrix_matches_direct_psf(rng):
    tx, rx = ula(4), mra7()
    grid = uniform_grid(13)
    w_t, w_r = crandn(rng, tx.size), crandn(rng, rx.size)
    a = measurement_matrix(tx, rx, grid)
    w = np.outer(w_r, w_t)
    direct = (steering(tx, grid.angles) @ w_t) * (steering(rx, grid.angles)
                                                  @ w_r)
    assert np.allclose(a @ w.reshape(-1, order="F"), direct)


def test_measurement_matrix_kron_rows():
    tx, rx, grid = mra7(), ula(3), uniform_grid(9)
    assert np.allclose(measurement_matrix(tx, rx, grid),
                       measurement_matrix_kron(tx, rx, grid))


def test_measurement_matrix_shapes():
    g = ArrayGeometry([0])
    a = measurement_matrix(g, g, AngleGrid([0.3]))
    assert a.shape == (1, 1) and np.isclose(abs(a[0, 0]), 1)
    big = measurement_matrix(ula(11), ula(11), uniform_grid(99))
    assert big.shape == (99, 121)
    assert np.allclose(np.abs(big), 1)


def test_psf_spec_validation():
    grid = uniform_grid(3)
    with pytest.raises(ValueError):
        PsfSpec(grid, np.zeros(3), np.zeros((2, 4)))
    PsfSpec(grid, np.zeros(3), np.zeros((3, 4)))


def test_uniform_grid():
    g = uniform_grid(99)
    assert len(g) == 99
    assert g.angles[49] == 0.0
    assert np.ptp(np.diff(g.angles)) < 1e-12
    assert np.isclose(g.angles[0], -np.pi / 2 + np.pi / 198)
    assert list(uniform_grid(1).angles) == [0.0]


@pytest.mark.parametrize("n", [2, 3, 4, 11, 21, 22])
@pytest.mark.parametrize("sl", [20, 40, 60])
def test_chebyshev_window_matches_scipy(n, sl):
    from scipy.signal.windows import chebwin
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ref = chebwin(n, sl)
    assert np.allclose(chebyshev_window(n, sl), ref, atol=1e-12)


def test_chebyshev_sidelobes_equiripple():
    grid = AngleGrid(np.linspace(-np.pi / 2, np.pi / 2, 20001))
    lv = sidelobe_levels(chebyshev_target(21, 40, grid))
    assert lv.size > 10
    assert np.all(np.abs(lv + 40) < 0.5)


def test_chebyshev_peak_normalized():
    p = chebyshev_target(21, 40, AngleGrid([0.0]))
    assert np.isclose(p[0], 1)


def test_chebyshev_window_normalization_scale():
    g = uniform_grid(99)
    ratio = chebyshev_target(21, 40, g, "window") / chebyshev_target(21, 40,
                                                                     g)
    assert np.allclose(ratio, chebyshev_window(21, 40).sum())


def test_chebyshev_conjugate_symmetric():
    g = uniform_grid(101)
    p = chebyshev_target(21, 40, g)
    assert np.allclose(p, np.conj(p[::-1]), atol=1e-14)


def test_chebyshev_mainlobe_narrows_with_less_attenuation():
    grid = AngleGrid(np.linspace(-np.pi / 2, np.pi / 2, 4001))
    widths = [mainlobe_width(chebyshev_target(21, sl, grid), grid)
              for sl in (20, 30, 40, 60, 80)]
    assert all(a < b for a, b in zip(widths, widths[1:]))


def test_chebyshev_errors():
    with pytest.raises(ValueError):
        chebyshev_target(1, 40, uniform_grid(5))
    with pytest.raises(ValueError):
        chebyshev_target(21, 0, uniform_grid(5))
    with pytest.raises(ValueError):
        chebyshev_target(21, 40, uniform_grid(5), normalize="max")


def test_db_floor():
    assert np.all(db(np.zeros(4)) == -80)
    assert np.allclose(db([1.0, 0.01]), [0, -40])
