"""
Linear array geometries, steering vectors and desired point spread functions.

Element positions are expressed in half-wavelength units, so the steering
vector of an array with positions ``d`` toward azimuth ``phi`` is
``exp(1j * pi * d * sin(phi))``.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import kronecker


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions of a linear array, in half-wavelengths.

    Positions must be strictly increasing and non-empty.
    """

    positions: np.ndarray
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        d = np.array(self.positions, dtype=float).ravel()
        if d.size == 0:
            raise ValueError("an array needs at least one element")
        if not np.all(np.isfinite(d)):
            raise ValueError("element positions must be finite")
        if np.any(np.diff(d) <= 0):
            raise ValueError("element positions must be strictly increasing")
        d.setflags(write=False)
        object.__setattr__(self, "positions", d)

    @property
    def size(self):
        return self.positions.size

    @property
    def aperture(self):
        return float(self.positions[-1] - self.positions[0])

    def __len__(self):
        return self.size


@dataclass(frozen=True)
class AngleGrid:
    """Strictly increasing azimuth angles in radians within [-pi/2, pi/2]."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float).ravel()
        if a.size == 0:
            raise ValueError("angle grid is empty")
        if np.any(np.abs(a) > np.pi / 2):
            raise ValueError("angles must lie in [-pi/2, pi/2]")
        if np.any(np.diff(a) <= 0):
            raise ValueError("angles must be strictly increasing")
        a.setflags(write=False)
        object.__setattr__(self, "angles", a)

    def __len__(self):
        return self.angles.size

    @property
    def degrees(self):
        return np.degrees(self.angles)


@dataclass(frozen=True)
class PsfSpec:
    """Desired PSF samples together with the measurement matrix."""

    grid: AngleGrid
    target: np.ndarray
    measurement: np.ndarray

    def __post_init__(self):
        if self.measurement.shape[0] != len(self.grid):
            raise ValueError("measurement rows must match the grid length")
        if self.target.shape != (len(self.grid),):
            raise ValueError("target length must match the grid length")


def ula(n):
    """Uniform linear array of ``n`` elements centred on the origin."""
    if n < 1:
        raise ValueError("a ULA needs at least one element")
    return ArrayGeometry(np.arange(n) - (n - 1) / 2, name=f"ula{n}")


def mra7():
    """Seven-element minimum-redundancy array spanning 10 half-wavelengths."""
    return ArrayGeometry([-5, -4, -2, 0, 2, 4, 5], name="mra7")


def uniform_grid(v):
    """``v`` angles at the centres of ``v`` equal subintervals of the
    open interval (-pi/2, pi/2).

    An odd ``v`` places broadside (0 rad) on the grid.
    """
    if v < 1:
        raise ValueError("grid needs at least one point")
    step = np.pi / v
    return AngleGrid(-np.pi / 2 + (np.arange(v) + 0.5) * step)


def steering(geom, angle):
    """Steering vector ``exp(j*pi*d*sin(angle))``.

    A 1-D array of angles returns a matrix with one row per angle.
    """
    angle = np.asarray(angle, dtype=float)
    return np.exp(1j * np.pi * np.multiply.outer(np.sin(angle),
                                                 geom.positions))


def steering_sin(positions, s):
    """Steering vectors evaluated directly at direction sines ``s``.

    Unlike :func:`steering`, ``s`` is not restricted to [-1, 1]; this is
    what a focused scan needs when the steering and scatterer directions
    are combined.
    """
    return np.exp(1j * np.pi * np.multiply.outer(np.asarray(s, dtype=float),
                                                 np.asarray(positions)))


def sum_coarray(tx, rx):
    """Sorted unique pairwise sums of transmit and receive positions."""
    return np.unique(np.add.outer(tx.positions, rx.positions).ravel())


def measurement_matrix(tx, rx, grid):
    """Matrix ``A`` mapping ``vec(W)`` to PSF samples on ``grid``.

    Row ``i`` is ``kron(a_t(v_i), a_r(v_i))`` so that
    ``A @ vec(w_r @ w_t.T)`` equals ``(a_t.T @ w_t) * (a_r.T @ w_r)``.

    Returns
    -------
    ndarray, shape (len(grid), rx.size * tx.size)
    """
    angles = grid.angles if isinstance(grid, AngleGrid) else grid
    at = steering(tx, np.atleast_1d(angles))
    ar = steering(rx, np.atleast_1d(angles))
    return (at[:, :, None] * ar[:, None, :]).reshape(at.shape[0], -1)


def measurement_matrix_kron(tx, rx, grid):
    """Row-by-row Kronecker construction of :func:`measurement_matrix`."""
    rows = [kronecker(steering(tx, v)[None, :], steering(rx, v)[None, :])
            for v in grid.angles]
    return np.vstack(rows)


def _chebyshev_poly(order, x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    inside = np.abs(x) <= 1
    out[inside] = np.cos(order * np.arccos(x[inside]))
    hi = x > 1
    out[hi] = np.cosh(order * np.arccosh(x[hi]))
    lo = x < -1
    out[lo] = (-1) ** order * np.cosh(order * np.arccosh(-x[lo]))
    return out


def chebyshev_window(n, sidelobe_db):
    """Dolph-Chebyshev taper of ``n`` taps, normalized to unit maximum.

    The equiripple pattern ``T_{n-1}(x0 cos(u/2))`` is sampled at ``n``
    points of one period of ``u`` and inverted with a direct DFT onto the
    taps at positions ``-(n-1)/2 .. (n-1)/2``.
    """
    if n < 2:
        raise ValueError("Chebyshev window needs at least two taps")
    if sidelobe_db <= 0:
        raise ValueError("sidelobe_db must be positive")
    order = n - 1
    ratio = 10 ** (sidelobe_db / 20)
    x0 = np.cosh(np.arccosh(ratio) / order)
    u = 2 * np.pi * np.arange(n) / n
    samples = _chebyshev_poly(order, x0 * np.cos(u / 2))
    m = np.arange(n) - order / 2
    w = (np.exp(-1j * np.outer(m, u)) @ samples).real / n
    return w / w.max()


def chebyshev_target(coarray_size, sidelobe_db, grid, normalize="peak"):
    """Dolph-Chebyshev beampattern of a virtual half-wavelength array.

    Parameters
    ----------
    coarray_size : int
        Number of virtual elements; 21 for an aperture of 10 half-wavelengths.
    sidelobe_db : float
        Sidelobe attenuation relative to the main lobe, in dB (positive).
    grid : AngleGrid or array_like
        Angles at which to sample the pattern.
    normalize : {'peak', 'window'}
        ``'peak'`` scales the pattern to unit main-lobe peak. ``'window'``
        keeps the taper at unit maximum tap, so the peak equals the sum of
        the taps.

    Returns
    -------
    ndarray of complex, shape (len(grid),)
    """
    w = chebyshev_window(coarray_size, sidelobe_db)
    if normalize == "peak":
        w = w / w.sum()
    elif normalize != "window":
        raise ValueError(f"unknown normalization {normalize!r}")
    angles = grid.angles if isinstance(grid, AngleGrid) else grid
    m = np.arange(coarray_size) - (coarray_size - 1) / 2
    return steering_sin(m, np.sin(np.atleast_1d(angles))) @ w.astype(complex)


def db(x, floor=-80.0, ref=None):
    """Magnitude in dB relative to ``ref`` (default: max), clipped at floor."""
    mag = np.abs(np.asarray(x))
    if ref is None:
        ref = mag.max() if mag.size else 0.0
    if ref == 0:
        return np.full(mag.shape, floor)
    with np.errstate(divide="ignore"):
        out = 20 * np.log10(mag / ref)
    return np.maximum(out, floor)


def sidelobe_levels(pattern):
    """Levels in dB (relative to the peak) of all interior sidelobe maxima.

    The main lobe is the run of samples around the global maximum that
    decreases monotonically on both sides.
    """
    a = np.abs(np.asarray(pattern))
    i0 = int(np.argmax(a))
    lo = i0
    while lo > 0 and a[lo - 1] < a[lo]:
        lo -= 1
    hi = i0
    while hi < a.size - 1 and a[hi + 1] < a[hi]:
        hi += 1
    idx = np.arange(1, a.size - 1)
    peaks = idx[(a[idx] >= a[idx - 1]) & (a[idx] >= a[idx + 1])]
    peaks = peaks[(peaks < lo) | (peaks > hi)]
    return 20 * np.log10(a[peaks] / a[i0])


def mainlobe_width(pattern, grid):
    """Angular distance between the first nulls around the peak, radians."""
    a = np.abs(np.asarray(pattern))
    angles = grid.angles if isinstance(grid, AngleGrid) else np.asarray(grid)
    i0 = int(np.argmax(a))
    lo = i0
    while lo > 0 and a[lo - 1] < a[lo]:
        lo -= 1
    hi = i0
    while hi < a.size - 1 and a[hi + 1] < a[hi]:
        hi += 1
    return float(angles[hi] - angles[lo])
