"""Analog transmit/receive beamformer design for image addition."""

from .arrays import (AngleGrid, ArrayGeometry, PsfSpec, chebyshev_target,
                     measurement_matrix, mra7, steering, sum_coarray, ula,
                     uniform_grid)
from .factorize import (AnalogFactorization, DigitalFactorization,
                        analog_factorize, digital_factorize, min_rank_fit,
                        reconstruct, split_two_phase)
from .imaging import CompositeImage, Scene, channel_matrix, measure, scan
from .solver import (BeamformerSolution, DivergenceError, SolverConfig,
                     finite_diff_grad, grad_descent, grad_J, minimize_q,
                     objective, random_phase_init)

__version__ = "0.1.0"
