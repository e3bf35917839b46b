"""Quantum maximal f-divergence for operator-convex f, and measured divergences.

For operator-convex ``f`` and strictly positive states the maximal
f-divergence has the closed form ``tr sigma f(sigma^-1/2 rho sigma^-1/2)``.
Any measurement can only decrease it; :func:`measurement_gap_scan` measures
how far the best qubit projective measurement falls short.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NotOperatorConvex,
    SingularState,
    UnsupportedDimension,
)
from .fdiv import f_divergence
from .matcore import commutator_norm, density, matrix_function, trace_norm
from .reverse_test import POVM, measure
from .tvmax import dmax_tv_sdp

SINGULAR_CUTOFF = 1e-12
COMMUTING_TOL = 1e-10

_PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=np.complex128
)


def _pair(rho, sigma):
    rho, sigma = density(rho), density(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"dimensions differ: {rho.shape[0]} vs {sigma.shape[0]}")
    return rho, sigma


def dmax_operator_convex(rho, sigma, f):
    """``tr sigma f(sigma^-1/2 rho sigma^-1/2)`` for full-rank states.

    No regularization is attempted: a state with smallest eigenvalue at or
    below ``1e-12`` raises :class:`SingularState`.
    """
    if not f.operator_convex:
        raise NotOperatorConvex(f"{f.name} is not operator convex")
    rho, sigma = _pair(rho, sigma)
    for name, x in (("rho", rho), ("sigma", sigma)):
        low = float(np.linalg.eigvalsh(x)[0])
        if low <= SINGULAR_CUTOFF:
            raise SingularState(f"{name} has smallest eigenvalue {low:.3e}")
    s = matrix_function(sigma, lambda w: w**-0.5)
    inner = matrix_function(s @ rho @ s, f.func)
    return float(np.trace(sigma @ inner).real)


def trace_distance(rho, sigma):
    """``||rho - sigma||_1``, in ``[0, 2]``."""
    rho, sigma = _pair(rho, sigma)
    return trace_norm(rho - sigma)


def helstrom_measurement(rho, sigma):
    """Two-outcome projective measurement onto the positive part of ``rho - sigma``."""
    rho, sigma = _pair(rho, sigma)
    w, v = np.linalg.eigh(rho - sigma)
    plus = v[:, w > 0.0]
    proj = plus @ plus.conj().T
    return POVM((proj, np.eye(rho.shape[0]) - proj))


def measured_divergence(rho, sigma, povm, f):
    """Classical ``D_f`` between the outcome distributions of ``povm``."""
    rho, sigma = _pair(rho, sigma)
    return f_divergence(measure(rho, povm), measure(sigma, povm), f)


def _bloch_vector(rho):
    """Real 3-vector ``(tr rho X, tr rho Y, tr rho Z)``."""
    return np.einsum("kab,ba->k", _PAULI, rho).real


def direction_povm(n):
    """Projective qubit measurement ``(I +- n.sigma) / 2`` along unit ``n``."""
    n = np.asarray(n, dtype=np.float64)
    n = n / np.linalg.norm(n)
    half = 0.5 * np.einsum("k,kab->ab", n, _PAULI)
    return POVM((0.5 * np.eye(2) + half, 0.5 * np.eye(2) - half))


def _binary_divergences(p0, q0, f):
    """Vectorized ``D_f`` of ``(p0, 1-p0)`` vs ``(q0, 1-q0)`` over arrays."""
    total = np.zeros_like(p0)
    for p, q in ((p0, q0), (1.0 - p0, 1.0 - q0)):
        p, q = np.clip(p, 0.0, 1.0), np.clip(q, 0.0, 1.0)
        safe_q = np.where(q > 0.0, q, 1.0)
        ratio = np.where(p > 0.0, p / safe_q, 1.0)
        with np.errstate(all="ignore"):
            interior = q * f(ratio)
            at_zero_p = q * f.f_at_0 if math.isfinite(f.f_at_0) else np.full_like(q, math.inf)
            at_zero_q = p * f.f_hat_0 if math.isfinite(f.f_hat_0) else np.full_like(p, math.inf)
        term = np.where(q > 0.0, np.where(p > 0.0, interior, at_zero_p), np.where(p > 0.0, at_zero_q, 0.0))
        total = total + term
    return total


def _grid_directions(n_grid):
    theta = np.linspace(0.0, np.pi, n_grid)
    phi = np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1).reshape(-1, 3)


def _unit_or_z(v):
    norm = np.linalg.norm(v)
    return v / norm if norm > 1e-15 else np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class GapScanReport:
    dmax: float
    best_measured: float
    best_measurement: POVM
    gap: float
    grid_size: int
    commuting: bool


def measurement_gap_scan(rho, sigma, f, n_grid=100):
    """Compare ``D_f^max`` with the best qubit projective measurement.

    Candidates are an ``n_grid x n_grid`` grid in ``(theta, phi)`` followed by
    the eigenbases of ``rho``, ``sigma`` and ``rho - sigma``. Ties go to the
    first candidate in that order. ``f = tv`` is routed to the SDP solver.
    """
    rho, sigma = _pair(rho, sigma)
    if rho.shape[0] != 2:
        raise UnsupportedDimension(f"gap scan supports qubits only, got dim {rho.shape[0]}")
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    if f.name == "tv":
        dmax = dmax_tv_sdp(rho, sigma).value
    else:
        dmax = dmax_operator_convex(rho, sigma, f)
    v_rho, v_sigma = _bloch_vector(rho), _bloch_vector(sigma)
    extra = np.array([_unit_or_z(v_rho), _unit_or_z(v_sigma), _unit_or_z(v_rho - v_sigma)])
    dirs = np.vstack([_grid_directions(n_grid), extra])
    values = _binary_divergences(0.5 * (1.0 + dirs @ v_rho), 0.5 * (1.0 + dirs @ v_sigma), f)
    best = int(np.argmax(values))
    best_value = float(values[best])
    return GapScanReport(
        dmax=float(dmax),
        best_measured=best_value,
        best_measurement=direction_povm(dirs[best]),
        gap=float(dmax - best_value),
        grid_size=n_grid * n_grid,
        commuting=commutator_norm(rho, sigma) <= COMMUTING_TOL,
    )

