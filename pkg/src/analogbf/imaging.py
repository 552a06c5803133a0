"""
Sequential-scan imaging simulation with image addition.

Each measurement follows ``y = w_r^T H w_t + w_r^T n``. A scan steers the
designed weights toward every image direction ``u`` by multiplying them with
the conjugate steering phases, acquires one measurement per component image
and sums the ``Q`` component images into the composite image.
"""

from dataclasses import dataclass, field

import numpy as np

from .arrays import AngleGrid, measurement_matrix, steering, steering_sin
from .factorize import AnalogFactorization, reconstruct
from .linalg import vec


@dataclass(frozen=True)
class Scene:
    """Point scatterers ``(angle, reflectivity)`` plus receiver noise level."""

    scatterers: tuple = ()
    noise_std: float = 0.0

    def __post_init__(self):
        sc = tuple((float(v), complex(g)) for v, g in self.scatterers)
        for v, _ in sc:
            if abs(v) > np.pi / 2:
                raise ValueError(f"scatterer angle {v} outside [-pi/2, pi/2]")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        object.__setattr__(self, "scatterers", sc)


@dataclass(frozen=True)
class CompositeImage:
    grid: AngleGrid
    components: np.ndarray
    pixels: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "pixels", self.components.sum(axis=0))

    @property
    def q(self):
        return self.components.shape[0]


def channel_matrix(scene, tx, rx):
    """``H = sum_k gamma_k a_r(v_k) a_t(v_k)^T``."""
    h = np.zeros((rx.size, tx.size), dtype=complex)
    for v, gamma in scene.scatterers:
        h += gamma * np.outer(steering(rx, v), steering(tx, v))
    return h


def measure(h, w_t, w_r, noise=None):
    """Beamformed, matched-filtered output ``w_r^T H w_t + w_r^T n``."""
    h = np.asarray(h)
    w_t = np.asarray(w_t).ravel()
    w_r = np.asarray(w_r).ravel()
    if h.shape != (w_r.size, w_t.size):
        raise ValueError(
            f"H has shape {h.shape}, weights imply {(w_r.size, w_t.size)}")
    y = w_r @ h @ w_t
    if noise is not None:
        noise = np.asarray(noise).ravel()
        if noise.size != w_r.size:
            raise ValueError("noise length must equal the receive size")
        y = y + w_r @ noise
    return complex(y)


def _factorization(solution):
    if isinstance(solution, AnalogFactorization):
        return solution
    return solution.factorization


def scan(scene, tx, rx, solution, grid, seed=0):
    """Steer every component image over ``grid`` and add them up.

    Noise for direction ``i`` and component ``q`` is drawn from a generator
    seeded with ``(seed, i, q)``, so the result does not depend on the
    order in which measurements are taken.

    Returns
    -------
    CompositeImage
    """
    fact = _factorization(solution)
    h = channel_matrix(scene, tx, rx)
    at = steering(tx, grid.angles).conj()
    ar = steering(rx, grid.angles).conj()
    comps = np.zeros((fact.q, len(grid)), dtype=complex)
    for i in range(len(grid)):
        for q in range(fact.q):
            w_t = fact.c_t[q] * fact.f_t[:, q] * at[i]
            w_r = fact.c_r[q] * fact.f_r[:, q] * ar[i]
            noise = None
            if scene.noise_std > 0:
                rng = np.random.default_rng((seed, i, q))
                noise = scene.noise_std / np.sqrt(2) * (
                    rng.standard_normal(rx.size)
                    + 1j * rng.standard_normal(rx.size))
            comps[q, i] = measure(h, w_t, w_r, noise)
    return CompositeImage(grid, comps)


def realized_psf(tx, rx, w, grid):
    """PSF of co-array matrix ``w`` at broadside focus: ``A vec(W)``."""
    return measurement_matrix(tx, rx, grid) @ vec(w)


def psf_at_sines(tx, rx, w, s):
    """PSF of ``w`` at direction sines ``s`` (any real values)."""
    return np.einsum("kt,kr,rt->k",
                     steering_sin(tx.positions, np.atleast_1d(s)),
                     steering_sin(rx.positions, np.atleast_1d(s)),
                     np.asarray(w))


def expected_image(scene, tx, rx, w, grid):
    """Noise-free composite image computed from the PSF in closed form.

    Focusing at ``u`` shifts the broadside PSF in the sine domain, so a
    scatterer at ``v`` contributes ``gamma * psi(sin v - sin u)``.
    """
    sin_u = np.sin(grid.angles)
    img = np.zeros(len(grid), dtype=complex)
    for v, gamma in scene.scatterers:
        img += gamma * psf_at_sines(tx, rx, w, np.sin(v) - sin_u)
    return img


def solution_matrix(solution):
    """Co-array weight matrix realized by a solution or factorization."""
    return reconstruct(_factorization(solution))
