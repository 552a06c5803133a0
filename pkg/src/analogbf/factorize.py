"""
Factorizations of the co-array weight matrix ``W`` (N_r x N_t).

A fully-digital beamformer realizes ``W = sum_q w_r[:, q] w_t[:, q]^T`` with
arbitrary complex weights, needing ``rank(W)`` component images. A fully
analog beamformer only controls element phases, ``W = F_r diag(c) F_t^T``
with unit-modulus ``F_r``, ``F_t``. Every complex vector is the scaled sum of
two unit-modulus vectors, so each digital component expands into four analog
ones and ``4 * rank(W)`` analog component images always suffice.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, numerical_rank

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DigitalFactorization:
    """Complex transmit/receive weight pairs, one column per component."""

    tx: np.ndarray
    rx: np.ndarray

    def __post_init__(self):
        if self.tx.shape[1] != self.rx.shape[1]:
            raise ValueError("tx and rx must have the same number of columns")

    @property
    def count(self):
        return self.tx.shape[1]

    def matrix(self):
        return self.rx @ self.tx.T


@dataclass(frozen=True)
class AnalogFactorization:
    """Unit-modulus phase matrices and per-component digital gains."""

    f_t: np.ndarray
    f_r: np.ndarray
    c_t: np.ndarray
    c_r: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        q = self.f_t.shape[1]
        if self.f_r.shape[1] != q or self.c_t.shape != (q,) \
                or self.c_r.shape != (q,):
            raise ValueError("inconsistent number of component images")

    @property
    def q(self):
        return self.f_t.shape[1]

    @property
    def gains(self):
        return self.c_t * self.c_r

    def with_unit_tx_gain(self):
        """Move all gain to the receiver, setting ``c_t`` to ones."""
        return AnalogFactorization(self.f_t, self.f_r,
                                   np.ones(self.q, dtype=complex), self.gains,
                                   self.degenerate)


def digital_factorize(w, rank_tol=None):
    """SVD-based fully-digital factorization of ``w``.

    The singular values are folded into the receive weights; transmit
    weights are the conjugated right singular vectors. The number of
    components is the numerical rank of ``w``.
    """
    w = as_matrix(w, "W")
    u, s, vh = np.linalg.svd(w, full_matrices=False)
    k = numerical_rank(w, rank_tol)
    return DigitalFactorization(tx=vh[:k].T.copy(),
                                rx=u[:, :k] * s[:k])


def split_two_phase(w):
    """Write ``w`` as ``c * (f1 + f2)`` with unit-modulus ``f1``, ``f2``.

    Returns
    -------
    f1, f2 : ndarray
        Unit-modulus vectors ``exp(j(angle(w) +/- arccos(|w| / max|w|)))``.
    c : float
        ``max|w| / 2``.
    degenerate : bool
        True when ``w`` is identically zero; then ``c = 0`` and both phase
        vectors are all ones.
    """
    w = np.asarray(w, dtype=complex).ravel()
    peak = np.max(np.abs(w)) if w.size else 0.0
    if peak == 0:
        ones = np.ones(w.size, dtype=complex)
        return ones, ones.copy(), 0.0, True
    # |w|/peak may exceed 1 by rounding at the maximizing element
    spread = np.arccos(np.clip(np.abs(w) / peak, 0.0, 1.0))
    base = np.angle(w)
    return np.exp(1j * (base + spread)), np.exp(1j * (base - spread)), \
        peak / 2, False


def _sign_pattern(q):
    """Receive/transmit branch indices (1 or 2) for 1-based component q."""
    r = (q - 1) % 4
    i_r = -(-(1 + r) // 2)
    i_t = 1 + (q - 1) % 2
    return i_r, i_t


def analog_factorize(digital):
    """Fully-analog factorization with four components per digital one.

    Component ``q`` (1-based) uses digital component ``ceil(q/4)``; its
    receive and transmit phase vectors take the ``+`` or ``-`` branch of
    :func:`split_two_phase` in the order (+,+), (+,-), (-,+), (-,-).
    """
    n_t, n_r = digital.tx.shape[0], digital.rx.shape[0]
    qd = digital.count
    f_t = np.empty((n_t, 4 * qd), dtype=complex)
    f_r = np.empty((n_r, 4 * qd), dtype=complex)
    c_t = np.empty(4 * qd, dtype=complex)
    c_r = np.empty(4 * qd, dtype=complex)
    degenerate = False
    for k in range(qd):
        t1, t2, ct, dt = split_two_phase(digital.tx[:, k])
        r1, r2, cr, dr = split_two_phase(digital.rx[:, k])
        degenerate |= dt or dr
        for q in range(4 * k + 1, 4 * k + 5):
            i_r, i_t = _sign_pattern(q)
            f_r[:, q - 1] = r1 if i_r == 1 else r2
            f_t[:, q - 1] = t1 if i_t == 1 else t2
            c_r[q - 1] = cr
            c_t[q - 1] = ct
    if degenerate:
        log.warning("zero digital component; analog gains set to zero")
    return AnalogFactorization(f_t, f_r, c_t, c_r, degenerate)


def reconstruct(f):
    """Co-array weight matrix ``F_r diag(c_t * c_r) F_t^T``."""
    return (f.f_r * f.gains) @ f.f_t.T


def fit_digital(a, psi, n_tx, n_rx, q, seed=0, max_iter=5000, tol=1e-13):
    """Least-squares rank-``q`` co-array matrix matching ``psi``.

    Minimizes ``||psi - a vec(W_r W_t^T)||`` by alternating linear least
    squares over the receive and transmit weights.

    Returns
    -------
    DigitalFactorization
    residual : float
        Relative residual ``||psi - a vec(W)|| / ||psi||``.
    """
    a3 = np.asarray(a, dtype=complex).reshape(-1, n_tx, n_rx)
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        z = np.zeros((n_tx, 0), dtype=complex)
        return DigitalFactorization(z, np.zeros((n_rx, 0), complex)), 0.0
    rng = np.random.default_rng(seed)
    w_t = rng.standard_normal((n_tx, q)) + 1j * rng.standard_normal((n_tx, q))
    w_r = None
    prev = res = np.finfo(float).max
    for _ in range(max_iter):
        m = np.einsum("imn,mq->inq", a3, w_t).reshape(a3.shape[0], -1)
        w_r = np.linalg.lstsq(m, psi, rcond=None)[0].reshape(n_rx, q)
        m = np.einsum("imn,nq->imq", a3, w_r).reshape(a3.shape[0], -1)
        w_t = np.linalg.lstsq(m, psi, rcond=None)[0].reshape(n_tx, q)
        res = np.linalg.norm(m @ w_t.ravel() - psi) / norm
        if res <= tol or prev - res <= 1e-10 * prev:
            break
        prev = res
    return DigitalFactorization(w_t, w_r), float(res)


def min_rank_fit(a, psi, n_tx, n_rx, tol=1e-4, q_max=None, restarts=3,
                 seed=0):
    """Smallest-rank digital co-array matrix reaching relative residual
    ``tol``.

    Tries ranks ``1 .. q_max`` (default ``min(n_tx, n_rx)``) with several
    random starts each. If no rank reaches ``tol`` the best fit at
    ``q_max`` is returned.

    Returns
    -------
    DigitalFactorization
    residual : float
    """
    if q_max is None:
        q_max = min(n_tx, n_rx)
    if np.linalg.norm(psi) == 0:
        return fit_digital(a, psi, n_tx, n_rx, 0)
    best = None
    for q in range(1, q_max + 1):
        best = None
        for r in range(restarts):
            fit = fit_digital(a, psi, n_tx, n_rx, q, seed=(seed, q, r))
            if best is None or fit[1] < best[1]:
                best = fit
        log.debug("digital rank %d: residual %.3e", q, best[1])
        if best[1] <= tol:
            return best
    return best
