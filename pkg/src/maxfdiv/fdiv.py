"""Classical f-divergences on finite alphabets.

Boundary terms follow the usual convention: a symbol with ``q_x = 0``
contributes ``p_x * fhat0`` where ``fhat0 = lim_{r->inf} f(r)/r``, and
contributes nothing when ``p_x = 0`` as well. Infinite results are returned
as ``math.inf``; ``0 * inf`` never reaches floating-point arithmetic.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatch,
    InfiniteDivergence,
    LengthMismatch,
    NotStrictlyConvex,
)

RATIO_RTOL = 1e-12
PRESERVE_TOL = 1e-10
BLOCK_TOL = 1e-12
_CONVEXITY_GRID = np.geomspace(1e-3, 1e3, 61)


@dataclass(frozen=True)
class FDivFunction:
    """A convex function ``f`` on ``(0, inf)`` plus its boundary data.

    ``func`` must be vectorized over numpy arrays. ``f_at_0`` is the limit
    ``f(0+)`` and ``f_hat_0`` the asymptotic slope; either may be ``inf``.
    The flags are asserted by the caller for user-defined functions.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    f_at_0: float
    f_hat_0: float
    strictly_convex: bool
    operator_convex: bool

    def __post_init__(self):
        r = _CONVEXITY_GRID
        mid = self.func(0.5 * (r[:-1] + r[1:]))
        chord = 0.5 * (self.func(r[:-1]) + self.func(r[1:]))
        if np.any(mid > chord + 1e-12 * np.maximum(1.0, np.abs(chord))):
            raise ValueError(f"{self.name}: convexity spot-check failed")
        if math.isfinite(self.f_hat_0):
            big = np.array([1e3, 1e4, 1e5])
            dev = np.abs(self.func(big) / big - self.f_hat_0)
            if not (dev[1] <= dev[0] and dev[2] <= dev[1]):
                raise ValueError(f"{self.name}: f(r)/r does not approach f_hat_0={self.f_hat_0}")

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=np.float64))

    @property
    def f_at_1(self):
        return float(self.func(np.array(1.0)))


def tv_function():
    """``f(r) = |1 - r|``; total variation."""
    return FDivFunction("tv", lambda r: np.abs(1.0 - r), 1.0, 1.0, False, False)


def _xlogx(r):
    r = np.asarray(r, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = r * np.log(r)
    return np.where(r == 0.0, 0.0, out)


def kl_function():
    """``f(r) = r ln r``; relative entropy."""
    return FDivFunction("kl", _xlogx, 0.0, math.inf, True, True)


def alpha_function(alpha):
    """``f(r) = +r^alpha`` for ``alpha in (-1, 0)``, ``-r^alpha`` for ``(0, 1)``."""
    alpha = float(alpha)
    if not (-1.0 < alpha < 1.0) or alpha == 0.0:
        raise ValueError(f"alpha must lie in (-1, 1) excluding 0, got {alpha}")
    if alpha < 0.0:
        return FDivFunction(f"alpha:{alpha:g}", lambda r: np.power(r, alpha), math.inf, 0.0, True, True)
    return FDivFunction(f"alpha:{alpha:g}", lambda r: -np.power(r, alpha), 0.0, 0.0, True, True)


def parse_function(spec):
    """Parse ``tv``, ``kl`` or ``alpha:<a>``."""
    if spec == "tv":
        return tv_function()
    if spec == "kl":
        return kl_function()
    if spec.startswith("alpha:"):
        return alpha_function(float(spec.split(":", 1)[1]))
    raise ValueError(f"unknown f-divergence {spec!r}")


def as_prob(x, strict=False, tol=1e-12):
    """Return ``x`` as a float vector of nonnegative weights.

    Entries in ``[-tol, 0)`` are rounding noise and clipped to zero. With
    ``strict=True`` the weights must also sum to 1 within ``tol``.
    """
    p = np.asarray(x, dtype=np.float64).reshape(-1)
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise ValueError("probability vector must be non-empty and finite")
    if np.any(p < -tol):
        raise ValueError(f"negative weight {p.min()!r}")
    p = np.maximum(p, 0.0)
    if strict and abs(p.sum() - 1.0) > tol:
        raise ValueError(f"weights sum to {p.sum()!r}, not 1")
    return p


def _pair(p, q):
    p, q = as_prob(p), as_prob(q)
    if p.shape != q.shape:
        raise LengthMismatch(f"lengths differ: {p.size} vs {q.size}")
    return p, q


def f_divergence(p, q, f):
    """``sum_x q_x f(p_x / q_x)`` with the ``q_x = 0`` convention."""
    p, q = _pair(p, q)
    total = 0.0
    for px, qx in zip(p, q):
        if qx > 0.0:
            if px == 0.0:
                if math.isinf(f.f_at_0):
                    return math.inf
                total += qx * f.f_at_0
            else:
                total += qx * float(f(px / qx))
        elif px > 0.0:
            if math.isinf(f.f_hat_0):
                return math.inf
            total += px * f.f_hat_0
    return float(total)


def total_variation(p, q):
    p, q = _pair(p, q)
    return float(np.sum(np.abs(p - q)))


def _ratios(p, q):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(q > 0.0, p / np.where(q > 0.0, q, 1.0), math.inf)


def _same_ratio(a, b, rtol=RATIO_RTOL):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rtol * max(abs(a), abs(b))


@dataclass(frozen=True)
class RatioPartition:
    classes: dict  # ratio (float or inf) -> tuple of indices
    zero_set: frozenset  # indices with q_x = 0

    def ratio_of(self, index):
        for r, members in self.classes.items():
            if index in members:
                return r
        raise KeyError(index)


def ratio_partition(p, q, rtol=RATIO_RTOL):
    """Group indices by likelihood ratio ``p_x / q_x`` (``inf`` when ``q_x = 0``)."""
    p, q = _pair(p, q)
    r = _ratios(p, q)
    classes = {}
    for x in np.argsort(r, kind="stable"):
        x = int(x)
        for key in classes:
            if _same_ratio(key, r[x], rtol):
                classes[key].append(x)
                break
        else:
            classes[float(r[x])] = [x]
    return RatioPartition(
        {k: tuple(sorted(v)) for k, v in classes.items()},
        frozenset(int(x) for x in np.flatnonzero(q == 0.0)),
    )


def as_channel(matrix, tol=1e-12):
    """Validate a column-stochastic matrix ``P[y, x] = P(y|x)``."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch("channel must be a 2-d matrix")
    if np.any(m < 0.0):
        raise ValueError("channel has negative entries")
    if np.any(np.abs(m.sum(axis=0) - 1.0) > tol):
        raise ValueError("channel columns must sum to 1")
    return m


def merge_channel(assignment, n_out=None):
    """Deterministic channel sending input ``x`` to output ``assignment[x]``."""
    assignment = list(assignment)
    n_out = max(assignment) + 1 if n_out is None else n_out
    m = np.zeros((n_out, len(assignment)))
    m[assignment, np.arange(len(assignment))] = 1.0
    return m


def channel_apply(channel, p):
    m = as_channel(channel)
    p = as_prob(p)
    if m.shape[1] != p.size:
        raise DimensionMismatch(f"channel expects {m.shape[1]} inputs, got {p.size}")
    return m @ p


@dataclass(frozen=True)
class Lemma1Report:
    divergence_preserved: bool
    block_condition_holds: bool
    violations: list
    divergence_in: float
    divergence_out: float

    @property
    def implication_holds(self):
        """Preservation of the divergence forces the block structure."""
        return self.block_condition_holds or not self.divergence_preserved


def lemma1_check(p, q, channel, f):
    """Check the ratio-block structure forced by divergence preservation.

    A strictly convex ``f`` and a channel that leaves ``D_f`` unchanged must
    satisfy ``P(y|x) = 0`` whenever ``r_x != r'_y``. This reports both sides
    rather than asserting the implication.
    """
    if not f.strictly_convex:
        raise NotStrictlyConvex(f"{f.name} is not strictly convex")
    p, q = _pair(p, q)
    m = as_channel(channel)
    d_in = f_divergence(p, q, f)
    if math.isinf(d_in):
        raise InfiniteDivergence("D_f(p||q) is infinite")
    p_out, q_out = channel_apply(m, p), channel_apply(m, q)
    d_out = f_divergence(p_out, q_out, f)
    r_in, r_out = _ratios(p, q), _ratios(p_out, q_out)
    violations = [
        (x, y)
        for y in range(m.shape[0])
        for x in range(m.shape[1])
        if m[y, x] > BLOCK_TOL and not _same_ratio(float(r_in[x]), float(r_out[y]))
    ]
    return Lemma1Report(
        divergence_preserved=bool(abs(d_in - d_out) <= PRESERVE_TOL),
        block_condition_holds=not violations,
        violations=violations,
        divergence_in=d_in,
        divergence_out=d_out,
    )
