"""
Gradient descent design of analog transmit/receive phases.

For a fixed number of component images ``Q`` the design problem is

    minimize_{F_t, F_r, c}  || psi - A (F_t <> F_r) c ||^2

with unit-modulus ``F_t = exp(j Phi_t)``, ``F_r = exp(j Phi_r)``. Eliminating
the least-squares gains ``c = K^+ psi`` with ``K = A (F_t <> F_r)`` leaves the
projected residual ``J(Phi_t, Phi_r) = ||(I - K K^+) psi||^2``, which is
minimized by plain gradient descent over the phases.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .factorize import AnalogFactorization
from .linalg import as_matrix, khatri_rao, kronecker, mat, pinv, vec

log = logging.getLogger(__name__)


class DivergenceError(ArithmeticError):
    """Raised when the objective or gradient stops being finite."""


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`grad_descent` and :func:`minimize_q`.

    ``tol`` is an absolute bound on ``||psi - K c||``; when it is None the
    bound is ``rel_tol * ||psi||``.
    """

    step: float = 1e-3
    max_iter: int = 10_000
    tol: float | None = None
    rel_tol: float = 1e-4
    restarts: int = 1
    seed: int = 0
    rank_tol: float | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step size must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.tol is not None and self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be nonnegative")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")

    def abs_tol(self, psi):
        if self.tol is not None:
            return self.tol
        return self.rel_tol * float(np.linalg.norm(psi))


@dataclass(frozen=True)
class SolverState:
    """Iterate of the descent: phases, ``K``, gains and residual norm."""

    f_t: np.ndarray
    f_r: np.ndarray
    k_matrix: np.ndarray
    gains: np.ndarray
    residual: float
    iteration: int


@dataclass(frozen=True)
class BeamformerSolution:
    factorization: AnalogFactorization
    residual: float
    iterations: int
    converged: bool
    history: np.ndarray = field(repr=False)
    seed: object = None

    @property
    def q(self):
        return self.factorization.q

    @property
    def f_t(self):
        return self.factorization.f_t

    @property
    def f_r(self):
        return self.factorization.f_r

    @property
    def c_t(self):
        return self.factorization.c_t

    @property
    def c_r(self):
        return self.factorization.c_r


def _check(a, psi, f_t, f_r):
    a = as_matrix(a, "A")
    psi = np.asarray(psi, dtype=complex).ravel()
    f_t = as_matrix(f_t, "F_t")
    f_r = as_matrix(f_r, "F_r")
    if f_t.shape[1] != f_r.shape[1]:
        raise ValueError("F_t and F_r must have the same number of columns")
    if a.shape[1] != f_t.shape[0] * f_r.shape[0]:
        raise ValueError(
            f"A has {a.shape[1]} columns, expected "
            f"{f_t.shape[0]} * {f_r.shape[0]}")
    if a.shape[0] != psi.size:
        raise ValueError("A rows must match the length of psi")
    return a, psi, f_t, f_r


def _project(k, psi, rank_tol):
    """Least-squares gains and signed residual ``(K K^+ - I) psi``."""
    c = pinv(k, rank_tol) @ psi
    return c, k @ c - psi


def _partials(a, r, c, n_t, n_r):
    """``sum_i A[i, (m, n)] conj(r_i) c_q`` arranged as (N_t, N_r, Q)."""
    d = np.conj(r)[:, None] * c[None, :]
    return (a.T @ d).reshape(n_t, n_r, c.size)


def objective(a, psi, f_t, f_r, rank_tol=None):
    """Projected residual ``||(I - K K^+) psi||^2`` with ``K = A (F_t <> F_r)``."""
    a, psi, f_t, f_r = _check(a, psi, f_t, f_r)
    _, r = _project(a @ khatri_rao(f_t, f_r), psi, rank_tol)
    return float(np.vdot(r, r).real)


def grad_J(a, psi, f_t, f_r, rank_tol=None):
    """Gradient of :func:`objective` with respect to the phases.

    Uses the Khatri-Rao structure of ``K`` instead of materializing the
    ``VQ x N_x Q`` derivative matrices; :func:`grad_J_literal` is the
    unstructured form.

    Returns
    -------
    g_t : ndarray, shape (N_t, Q)
    g_r : ndarray, shape (N_r, Q)
    """
    a, psi, f_t, f_r = _check(a, psi, f_t, f_r)
    c, r = _project(a @ khatri_rao(f_t, f_r), psi, rank_tol)
    t = _partials(a, r, c, f_t.shape[0], f_r.shape[0])
    g_t = -2 * np.imag(f_t * np.einsum("mnq,nq->mq", t, f_r))
    g_r = -2 * np.imag(f_r * np.einsum("mnq,mq->nq", t, f_t))
    return g_t, g_r


def grad_J_literal(a, psi, f_t, f_r, rank_tol=None):
    """Gradient assembled from the explicit complex matrix derivatives.

    ``dJ/dK = vec^H((K K^+ - I) psi (K^+ psi)^H)``,
    ``dK/dF_r = (I_Q kron A)((I_Q <> F_t) kron I_{N_r})`` and
    ``dK/dF_t = (I_Q kron A)(I_{N_t Q} <> (F_r kron 1^T_{N_t}))``.
    Memory grows as ``V Q^2 N_t N_r``; intended for small checks.
    """
    a, psi, f_t, f_r = _check(a, psi, f_t, f_r)
    n_t, q = f_t.shape
    n_r = f_r.shape[0]
    k = a @ khatri_rao(f_t, f_r)
    k_pinv = pinv(k, rank_tol)
    c = k_pinv @ psi
    r = k @ c - psi
    d_k = vec(np.outer(r, c.conj())).conj()[None, :]
    big_a = kronecker(np.eye(q), a)
    d_fr = big_a @ kronecker(khatri_rao(np.eye(q), f_t), np.eye(n_r))
    d_ft = big_a @ khatri_rao(np.eye(n_t * q),
                              kronecker(f_r, np.ones((1, n_t))))
    g_t = -2 * np.imag(f_t * mat(d_k @ d_ft, n_t, q))
    g_r = -2 * np.imag(f_r * mat(d_k @ d_fr, n_r, q))
    return g_t, g_r


def finite_diff_grad(a, psi, f_t, f_r, h=1e-6, rank_tol=None):
    """Central-difference phase gradient, one entry at a time."""
    if h <= 0:
        raise ValueError("h must be positive")
    a, psi, f_t, f_r = _check(a, psi, f_t, f_r)

    def one(f, other, is_tx):
        g = np.empty(f.shape)
        for idx in np.ndindex(f.shape):
            vals = []
            for s in (h, -h):
                fp = f.copy()
                fp[idx] *= np.exp(1j * s)
                pair = (fp, other) if is_tx else (other, fp)
                vals.append(objective(a, psi, *pair, rank_tol=rank_tol))
            g[idx] = (vals[0] - vals[1]) / (2 * h)
        return g

    return one(f_t, f_r, True), one(f_r, f_t, False)


def random_phase_init(n, q, seed=None):
    """``n x q`` matrix ``exp(j Phi)`` with ``Phi`` i.i.d. uniform on
    [0, 2 pi).

    ``seed`` may be anything accepted by :func:`numpy.random.default_rng`,
    including an existing Generator.
    """
    rng = np.random.default_rng(seed)
    return np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=(n, q)))


def random_start(n_t, n_r, q, seed=None):
    """Random transmit and receive phases drawn from one generator."""
    rng = np.random.default_rng(seed)
    return random_phase_init(n_t, q, rng), random_phase_init(n_r, q, rng)


def iterate(a, psi, f_t, f_r, step, rank_tol=None):
    """Yield descent iterates, starting with the initial point.

    Each step computes ``dJ/dK`` once, updates ``F_t`` and then ``F_r``
    (the receive derivative uses the freshly updated ``F_t``), and finally
    refreshes ``K``, the gains and the residual. The generator never
    stops on its own.
    """
    a, psi, f_t, f_r = _check(a, psi, f_t, f_r)
    n_t, n_r = f_t.shape[0], f_r.shape[0]
    k = a @ khatri_rao(f_t, f_r)
    c, r = _project(k, psi, rank_tol)
    it = 0
    while True:
        eps = float(np.linalg.norm(r))
        if not np.isfinite(eps):
            raise DivergenceError(
                f"residual became non-finite at iteration {it}; "
                f"step size {step:g} is too large")
        yield SolverState(f_t, f_r, k, c, eps, it)
        t = _partials(a, r, c, n_t, n_r)
        with np.errstate(over="ignore", invalid="ignore"):
            g_t = -2 * np.imag(f_t * np.einsum("mnq,nq->mq", t, f_r))
            f_t = np.exp(1j * (np.angle(f_t) - step * g_t))
            g_r = -2 * np.imag(f_r * np.einsum("mnq,mq->nq", t, f_t))
            f_r = np.exp(1j * (np.angle(f_r) - step * g_r))
        if not (np.all(np.isfinite(f_t)) and np.all(np.isfinite(f_r))):
            raise DivergenceError(
                f"phase update became non-finite at iteration {it}; "
                f"step size {step:g} is too large")
        k = a @ khatri_rao(f_t, f_r)
        c, r = _project(k, psi, rank_tol)
        it += 1


def grad_descent(a, psi, f_t, f_r, cfg=SolverConfig(), seed=None):
    """Run gradient descent from ``(f_t, f_r)`` for a fixed ``Q``.

    Stops once the residual ``||psi - K c||`` reaches ``cfg.abs_tol(psi)``
    or after ``cfg.max_iter`` updates. The returned gains are
    ``c_r = K^+ psi`` and ``c_t = 1``.

    Raises
    ------
    DivergenceError
        If the objective or gradient becomes non-finite.
    """
    tol = cfg.abs_tol(psi)
    history = []
    for state in iterate(a, psi, f_t, f_r, cfg.step, cfg.rank_tol):
        history.append(state.residual)
        if state.residual <= tol or state.iteration >= cfg.max_iter:
            break
    fact = AnalogFactorization(state.f_t, state.f_r,
                               np.ones(state.gains.size, dtype=complex),
                               state.gains)
    converged = state.residual <= tol
    log.debug("Q=%d: residual %.3e after %d iterations (converged=%s)",
              fact.q, state.residual, state.iteration, converged)
    return BeamformerSolution(fact, state.residual, state.iteration,
                              converged, np.array(history), seed)


def _run_restart(a, psi, n_t, n_r, q, cfg, r):
    seed = (cfg.seed, q, r)
    f_t, f_r = random_start(n_t, n_r, q, seed)
    return grad_descent(a, psi, f_t, f_r, cfg, seed=seed)


def solve_fixed_q(a, psi, n_t, n_r, q, cfg=SolverConfig()):
    """Best of ``cfg.restarts`` random starts at a fixed ``Q``.

    Restart ``r`` is seeded with ``(cfg.seed, q, r)``. Ties in residual go
    to the lower restart index.
    """
    runs = range(cfg.restarts)
    if cfg.workers > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            sols = list(pool.map(
                lambda r: _run_restart(a, psi, n_t, n_r, q, cfg, r), runs))
    else:
        sols = [_run_restart(a, psi, n_t, n_r, q, cfg, r) for r in runs]
    return min(sols, key=lambda s: s.residual)


def minimize_q(a, psi, n_t, n_r, q_max, cfg=SolverConfig()):
    """Smallest ``Q <= q_max`` whose descent reaches the tolerance.

    If no ``Q`` converges, the lowest-residual solution over all tried
    ``Q`` is returned with ``converged=False``.
    """
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    best = None
    for q in range(1, q_max + 1):
        sol = solve_fixed_q(a, psi, n_t, n_r, q, cfg)
        log.info("Q=%d: residual %.3e converged=%s", q, sol.residual,
                 sol.converged)
        if sol.converged:
            return sol
        if best is None or sol.residual < best.residual:
            best = sol
    return best
