"""Qubit geometry: Bloch vectors, the reversibility spheroid, conjugate pairs.

Convention: ``rho = (I + x X + y Y + z Z) / 2``, so ``x = 2 Re rho[1,0]``,
``y = 2 Im rho[1,0]`` and ``z = rho[0,0] - rho[1,1]``. Only norms of sums
and differences enter the geometry, so results do not depend on it.

For a qubit pair the trace distance is reversible exactly when
``||v_sigma - v_rho|| + ||v_sigma + v_rho|| <= 2``, a prolate spheroid with
foci ``+-v_rho`` and semi-major axis 1. Its share of the unit ball is
``1 - ||v_rho||^2``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters, NotQubit, OutsideBall
from .matcore import hermitian

BALL_TOL = 1e-12
SPHEROID_BAND = 1e-9
PARAM_TOL = 1e-12
SHARD_SIZE = 1 << 16

INSIDE, BOUNDARY, OUTSIDE = "inside", "boundary", "outside"


def _ball_vector(v):
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise ValueError(f"expected a finite 3-vector, got {v!r}")
    if np.linalg.norm(v) > 1.0 + BALL_TOL:
        raise OutsideBall(f"||v|| = {np.linalg.norm(v)!r} exceeds 1")
    return v


def to_bloch(rho):
    """Bloch vector ``(x, y, z)`` of a qubit density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise NotQubit(f"expected a 2x2 matrix, got shape {rho.shape}")
    rho = hermitian(rho)
    v = np.array([2.0 * rho[1, 0].real, 2.0 * rho[1, 0].imag, (rho[0, 0] - rho[1, 1]).real])
    return _ball_vector(v)


def from_bloch(v):
    """Qubit density matrix with Bloch vector ``v``."""
    x, y, z = _ball_vector(v)
    return np.array([[1.0 + z, x - 1j * y], [x + 1j * y, 1.0 - z]], dtype=np.complex128) / 2.0


def spheroid_value(v_rho, v_sigma):
    """``s = ||v_sigma - v_rho|| + ||v_sigma + v_rho||``; broadcasts over rows of ``v_sigma``."""
    v_sigma = np.asarray(v_sigma, dtype=np.float64)
    return np.linalg.norm(v_sigma - v_rho, axis=-1) + np.linalg.norm(v_sigma + v_rho, axis=-1)


@dataclass(frozen=True)
class SpheroidVerdict:
    member: str  # inside, boundary or outside
    s: float
    margin: float  # 2 - s


def spheroid_membership(v_rho, v_sigma, band=SPHEROID_BAND):
    """Classify ``v_sigma`` against the spheroid with foci ``+-v_rho``."""
    v_rho, v_sigma = _ball_vector(v_rho), _ball_vector(v_sigma)
    s = float(spheroid_value(v_rho, v_sigma))
    if abs(s - 2.0) <= band:
        member = BOUNDARY
    elif s < 2.0:
        member = INSIDE
    else:
        member = OUTSIDE
    return SpheroidVerdict(member, s, 2.0 - s)


def _shard_points(seed, shard):
    """The ``SHARD_SIZE`` uniform ball points of one shard, from its own stream."""
    ss = np.random.SeedSequence(seed, spawn_key=(shard,))
    rng = np.random.Generator(np.random.Philox(ss))
    out = np.empty((0, 3))
    while out.shape[0] < SHARD_SIZE:
        cube = rng.uniform(-1.0, 1.0, size=(SHARD_SIZE, 3))
        out = np.vstack([out, cube[np.einsum("ij,ij->i", cube, cube) <= 1.0]])
    return out[:SHARD_SIZE]


def ball_samples(samples, seed=0):
    """Deterministic uniform samples from the unit ball.

    Sample indices ``[k * SHARD_SIZE, (k + 1) * SHARD_SIZE)`` come from shard
    ``k``, each with an independent Philox stream keyed by ``(seed, k)``, so
    shards can be generated in any order or in parallel.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    n_shards = -(-samples // SHARD_SIZE)
    return np.vstack([_shard_points(seed, k) for k in range(n_shards)])[:samples]


@dataclass(frozen=True)
class MonteCarloSample:
    points: np.ndarray  # (n, 3)
    s_values: np.ndarray
    members: np.ndarray  # bool, inside or boundary

    @property
    def fraction(self):
        return float(np.mean(self.members))

    def csv_rows(self):
        """Rows ``sample_index, x, y, z, s_value, member``."""
        for i, (p, s, m) in enumerate(zip(self.points, self.s_values, self.members)):
            yield i, float(p[0]), float(p[1]), float(p[2]), float(s), int(m)


def monte_carlo_sample(v_rho, samples, seed=0):
    v_rho = _ball_vector(v_rho)
    points = ball_samples(samples, seed)
    s = spheroid_value(v_rho, points)
    return MonteCarloSample(points, s, s <= 2.0 + SPHEROID_BAND)


def region_volume_fraction(v_rho, mode="analytic", samples=1_000_000, seed=0):
    """Fraction of the Bloch ball on which the trace distance to ``rho`` is reversible.

    ``mode="analytic"`` gives ``1 - ||v_rho||^2``; ``mode="monte_carlo"``
    estimates it from ``samples`` uniform points.
    """
    v_rho = _ball_vector(v_rho)
    if mode == "analytic":
        return float(max(0.0, 1.0 - float(np.dot(v_rho, v_rho))))
    if mode == "monte_carlo":
        return monte_carlo_sample(v_rho, samples, seed).fraction
    raise ValueError(f"unknown mode {mode!r}")


def conjugate_pair_states(a, b, c):
    """``rho = [[a, conj c], [c, b]]`` and ``sigma = [[a, -conj c], [-c, b]]``."""
    c = complex(c)
    rho = np.array([[a, c.conjugate()], [c, b]], dtype=np.complex128)
    sigma = np.array([[a, -c.conjugate()], [-c, b]], dtype=np.complex128)
    return rho, sigma


@dataclass(frozen=True)
class ConjugatePairResult:
    dmax: float
    A_opt: np.ndarray
    case: str  # "b_ge_c" or "c_ge_b"


def conjugate_pair_dmax(a, b, c):
    """Closed-form ``D^max_{|1-r|}`` for the conjugate pair with ``a >= b``.

    With ``b >= |c|`` the optimum ``A = diag(a - |c|, b - |c|)`` gives
    ``4|c|``, the trace distance. Otherwise ``A = diag(a - |c|^2/b, 0)`` and
    the value ``2(b + |c|^2/b)`` strictly exceeds it.
    """
    a, b, c = float(a), float(b), complex(c)
    m = abs(c)
    if not (a >= b >= 0.0):
        raise InvalidParameters(f"need a >= b >= 0, got a={a}, b={b}")
    if abs(a + b - 1.0) > PARAM_TOL:
        raise InvalidParameters(f"a + b = {a + b!r}, not 1")
    if a * b < m * m - PARAM_TOL:
        raise InvalidParameters(f"ab = {a * b!r} < |c|^2 = {m * m!r}; state not PSD")
    if b == 0.0 and m > 0.0:
        raise InvalidParameters("b = 0 forces c = 0")
    if b >= m:
        return ConjugatePairResult(4.0 * m, np.diag([a - m, b - m]).astype(np.complex128), "b_ge_c")
    ratio = m * m / b
    return ConjugatePairResult(2.0 * (b + ratio), np.diag([a - ratio, 0.0]).astype(np.complex128), "c_ge_b")


def pair_geometry(rho, sigma):
    """Spheroid verdict for a qubit pair given as density matrices."""
    return spheroid_membership(to_bloch(rho), to_bloch(sigma))


__all__ = [
    "BOUNDARY",
    "INSIDE",
    "OUTSIDE",
    "ConjugatePairResult",
    "MonteCarloSample",
    "SpheroidVerdict",
    "ball_samples",
    "conjugate_pair_dmax",
    "conjugate_pair_states",
    "from_bloch",
    "monte_carlo_sample",
    "pair_geometry",
    "region_volume_fraction",
    "spheroid_membership",
    "spheroid_value",
    "to_bloch",
]
