"""Maximal total-variation divergence and reversibility of the trace distance.

``D^max_{|1-r|}(rho||sigma) = tr rho + tr sigma - 2 max{tr A : 0 <= A <= rho, A <= sigma}``.

The maximization is solved by a primal log-barrier method after restricting
``A`` to the intersection ``S`` of the supports of ``rho`` and ``sigma``. On
``S`` the constraint ``A <= rho`` is equivalent to ``A <= rho_S`` where
``rho_S`` is the Schur complement (shorted operator) of ``rho`` onto ``S``,
which is positive definite, so the reduced problem is strictly feasible.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotNormalized, NotPSD
from .matcore import (
    abs_op,
    density,
    generalized_inverse,
    hermitian,
    is_psd,
    op_norm,
    positive_part,
    range_basis,
    support_intersection_basis,
    trace_norm,
)

SDP_TOL = 1e-8
MAX_NEWTON = 500
MU0 = 1.0
MU_FACTOR = 4.0
ARMIJO_SLOPE = 0.01
REVERSIBLE_TOL = 1e-9
BOUNDARY_BAND = 1e-9
CENTERING_TOL = 1e-13
QUADRATIC_REGION = 0.25
MAX_CENTERING = 60
FLOOR_LEVEL = 1e-8
POLISH_START = 1e-5
FEASIBILITY_MARGIN = 1e-14
POLISH_PASSES = 3
POLISH_RESIDUAL = 1e-6


@dataclass(frozen=True)
class SdpResult:
    value: float
    A_opt: np.ndarray
    dual_Y: np.ndarray
    dual_Z: np.ndarray
    gap: float
    iterations: int
    reduced_dim: int
    basis: np.ndarray = field(repr=False)
    history: tuple = field(default=(), repr=False)  # (mu, primal tr A, dual bound) per Newton step
    converged: bool = True

    @property
    def reduced_dual_sum(self):
        """``Y + Z`` compressed to the reduced support; dominates the identity."""
        b = self.basis
        return hermitian(b.conj().T @ (self.dual_Y + self.dual_Z) @ b)


def _pair(rho, sigma):
    try:
        rho, sigma = density(rho, normalized=False), density(sigma, normalized=False)
    except NotNormalized:  # pragma: no cover - normalized=False never raises this
        raise
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    return rho, sigma


def shorted_operator(x, basis):
    """Schur complement of PSD ``x`` onto ``span(basis)`` (inside ``range(x)``).

    Returns the largest ``T`` on the subspace with ``basis T basis^dagger <= x``.
    """
    r = range_basis(x)
    xr = hermitian(r.conj().T @ x @ r)
    c = r.conj().T @ basis  # subspace in range coordinates
    w, v = np.linalg.eigh(np.eye(r.shape[1]) - c @ c.conj().T)
    cperp = v[:, w > 0.5]
    top = hermitian(c.conj().T @ xr @ c)
    if cperp.shape[1] == 0:
        return top
    off = c.conj().T @ xr @ cperp
    low = hermitian(cperp.conj().T @ xr @ cperp)
    return hermitian(top - off @ np.linalg.solve(low, off.conj().T))


def _hermitian_basis(k):
    """Orthonormal basis (Frobenius inner product) of k x k Hermitian matrices."""
    mats = []
    for i in range(k):
        e = np.zeros((k, k), dtype=np.complex128)
        e[i, i] = 1.0
        mats.append(e)
    s = 1.0 / math.sqrt(2.0)
    for i in range(k):
        for j in range(i + 1, k):
            e = np.zeros((k, k), dtype=np.complex128)
            e[i, j] = e[j, i] = s
            mats.append(e)
            e = np.zeros((k, k), dtype=np.complex128)
            e[i, j], e[j, i] = -1j * s, 1j * s
            mats.append(e)
    return np.array(mats)


def _chol_logdet(m):
    try:
        c = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(c).real
    if np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        return None
    return 2.0 * float(np.sum(np.log(d)))


def _inv(m):
    return hermitian(np.linalg.inv(m))


def _dual_certificate(mu, rho_s, sigma_s, slack_r, slack_s):
    """Feasible ``(Y, Z)`` for the reduced dual, from the barrier point.

    Starts from ``Y = mu (rho_s - A)^{-1}``, ``Z = mu (sigma_s - A)^{-1}`` and
    adds the deficit ``[I - Y - Z]_+`` to whichever of the two it costs less,
    so that ``Y + Z >= I`` holds exactly. Returns ``(Y, Z, dual objective)``.
    """
    y = mu * _inv(slack_r)
    z = mu * _inv(slack_s)
    y, z = _patch_deficit(y, z, rho_s, sigma_s)
    dual = float(np.trace(y @ rho_s).real + np.trace(z @ sigma_s).real)
    return y, z, dual


def _patch_deficit(y, z, rho_s, sigma_s):
    """Add ``[I - Y - Z]_+`` to the cheaper of ``Y``, ``Z`` so ``Y + Z >= I``."""
    deficit = positive_part(np.eye(y.shape[0]) - y - z)
    if np.any(deficit):
        if np.trace(deficit @ rho_s).real <= np.trace(deficit @ sigma_s).real:
            y = y + deficit
        else:
            z = z + deficit
    return y, z


def _newton_step(hess, grad):
    # symmetric diagonal scaling keeps the solve accurate as mu -> 0
    scale = 1.0 / np.sqrt(np.diag(hess))
    scaled = hess * np.outer(scale, scale)
    try:
        c = np.linalg.cholesky(scaled)
        u = np.linalg.solve(c.T.conj(), np.linalg.solve(c, grad * scale))
    except np.linalg.LinAlgError:
        u = np.linalg.lstsq(scaled, grad * scale, rcond=None)[0]
    return u * scale


def _relative_rates(slacks, direction):
    """Eigenvalues of ``L^{-1} (+-direction) L^{-dagger}`` for each barrier term.

    With ``X = L L^dagger``, ``logdet(X + t D) - logdet(X) = sum log1p(t e)``,
    which stays accurate when the increment is far below ``logdet(X)``.
    """
    rates = []
    for x, sign in zip(slacks, (1.0, -1.0, -1.0)):
        c = np.linalg.cholesky(x)
        m = np.linalg.solve(c, np.linalg.solve(c, sign * direction).conj().T)
        rates.append(np.linalg.eigvalsh(hermitian(m)))
    return np.concatenate(rates)


def _barrier_gain(rates, t):
    shifted = t * rates
    if np.any(shifted <= -1.0):
        return None
    return float(np.sum(np.log1p(shifted)))


def _coords(basis, m):
    return np.einsum("iab,ba->i", basis, m).real


def _active(x, threshold):
    w, v = np.linalg.eigh(x)
    return v[:, w < threshold], v[:, w >= threshold]


def _min_eigs(a, rho_s, sigma_s):
    return np.array([np.linalg.eigvalsh(m)[0] for m in (a, rho_s - a, sigma_s - a)])


def _polish(rho_s, sigma_s, a, slack_r, slack_s, y, z, mu):
    """Refine a near-optimal barrier point using complementary slackness.

    Eigenvalues below ``sqrt(mu)`` mark the active subspaces ``U_A``,
    ``U_R``, ``U_S`` of ``A``, ``rho_s - A`` and ``sigma_s - A``. The primal
    is corrected (least-norm) so that these products vanish exactly, the dual
    is re-solved on ``range(U_R)``, ``range(U_S)`` so that ``Y + Z - I``
    vanishes off ``U_A``, and the primal is then pulled back toward the
    strictly feasible barrier point just enough to be feasible again.
    Returns ``(A, Y, Z, primal, dual)`` or ``None`` if the guess fails.
    """
    k = a.shape[0]
    threshold = math.sqrt(mu)
    basis = _hermitian_basis(k)
    a_p = a
    for _ in range(POLISH_PASSES):
        # active subspaces are re-estimated from the corrected point
        u_a, q_a = _active(a_p, threshold)
        u_r, _ = _active(rho_s - a_p, threshold)
        u_s, _ = _active(sigma_s - a_p, threshold)
        rows, rhs = [], []
        for u, const, sign in ((u_a, None, 1.0), (u_r, rho_s, -1.0), (u_s, sigma_s, -1.0)):
            if u.shape[1] == 0:
                continue
            rows.append(sign * np.einsum("iab,bc->iac", basis, u).reshape(len(basis), -1).T)
            rhs.append(np.zeros(k * u.shape[1]) if const is None else -(const @ u).reshape(-1))
        if not rows:
            return None
        m = np.vstack(rows)
        b = np.concatenate(rhs)
        m_real = np.vstack([m.real, m.imag])
        b_real = np.concatenate([b.real, b.imag])
        x0 = _coords(basis, a_p)
        dx = np.linalg.lstsq(m_real, b_real - m_real @ x0, rcond=None)[0]
        if np.linalg.norm(m_real @ (x0 + dx) - b_real) > POLISH_RESIDUAL:
            return None
        a_p = hermitian(np.einsum("i,iab->ab", x0 + dx, basis))

    n_r, n_s = u_r.shape[1], u_s.shape[1]
    if q_a.shape[1] and n_r + n_s == 0:
        return None
    basis_r, basis_s = _hermitian_basis(n_r), _hermitian_basis(n_s)
    cols = [np.einsum("ab,ibc,dc,de->iae", u_r, basis_r, u_r.conj(), q_a) for _ in [0] if n_r]
    cols += [np.einsum("ab,ibc,dc,de->iae", u_s, basis_s, u_s.conj(), q_a) for _ in [0] if n_s]
    coeff = np.concatenate(cols).reshape(-1, k * q_a.shape[1]).T if q_a.shape[1] else None
    y0 = _coords(basis_r, u_r.conj().T @ y @ u_r) if n_r else np.zeros(0)
    z0 = _coords(basis_s, u_s.conj().T @ z @ u_s) if n_s else np.zeros(0)
    v0 = np.concatenate([y0, z0])
    if coeff is not None:
        target = q_a.reshape(-1)
        c_real = np.vstack([coeff.real, coeff.imag])
        t_real = np.concatenate([target.real, target.imag])
        v0 = v0 + np.linalg.lstsq(c_real, t_real - c_real @ v0, rcond=None)[0]
        if np.linalg.norm(c_real @ v0 - t_real) > POLISH_RESIDUAL:
            return None

    def clip(coords, bas, u):
        if u.shape[1] == 0:
            return np.zeros((k, k), dtype=np.complex128)
        small = positive_part(np.einsum("i,iab->ab", coords, bas))
        return hermitian(u @ small @ u.conj().T)

    y_p = clip(v0[: len(basis_r)], basis_r, u_r)
    z_p = clip(v0[len(basis_r):], basis_s, u_s)
    y_p, z_p = _patch_deficit(y_p, z_p, rho_s, sigma_s)
    dual = float(np.trace(y_p @ rho_s).real + np.trace(z_p @ sigma_s).real)

    low_p = _min_eigs(a_p, rho_s, sigma_s)
    low_b = _min_eigs(a, rho_s, sigma_s)
    if np.any(low_b <= FEASIBILITY_MARGIN):
        return None
    need = low_p < FEASIBILITY_MARGIN
    mix = 0.0
    if np.any(need):
        mix = float(np.max((FEASIBILITY_MARGIN - low_p[need]) / (low_b[need] - low_p[need])))
    a_f = hermitian((1.0 - mix) * a_p + mix * a)
    return a_f, y_p, z_p, float(np.trace(a_f).real), dual


def _solve_reduced(rho_s, sigma_s, tol, max_newton):
    """Barrier path for ``max tr A`` s.t. ``0 < A < rho_s``, ``A < sigma_s``.

    The three slacks ``A``, ``rho_s - A`` and ``sigma_s - A`` are carried as
    separate iterates and updated with the same direction. Recomputing them by
    subtraction would leave their O(mu) eigenvalues with only ~eps/mu relative
    accuracy, which is what the dual certificate is built from.
    """
    k = rho_s.shape[0]
    eye = np.eye(k)
    basis = _hermitian_basis(k)
    start = 0.5 * min(np.linalg.eigvalsh(rho_s)[0], np.linalg.eigvalsh(sigma_s)[0])
    a = start * eye
    slack_r, slack_s = hermitian(rho_s - a), hermitian(sigma_s - a)
    mu = MU0
    history = []
    best = None
    steps = 0

    def certify():
        y, z, dual = _dual_certificate(mu, rho_s, sigma_s, slack_r, slack_s)
        return (a, y, z, float(np.trace(a).real), dual)

    while True:
        inner = 0
        previous = np.inf
        in_quadratic = False
        while True:  # centering at fixed mu
            inv_a, inv_r, inv_s = _inv(a), _inv(slack_r), _inv(slack_s)
            grad_m = eye + mu * (inv_a - inv_r - inv_s)
            # the dual certificate inherits this residual, so centre on it
            scale = 1.0 + mu * max(np.linalg.norm(inv_a), np.linalg.norm(inv_r), np.linalg.norm(inv_s))
            residual = np.linalg.norm(grad_m) / scale
            if residual <= CENTERING_TOL or inner >= MAX_CENTERING:
                break
            if in_quadratic and residual <= FLOOR_LEVEL and residual > 0.5 * previous:
                break  # rounding floor reached
            previous = residual
            grad = np.einsum("iab,ba->i", basis, grad_m).real
            hess = np.zeros((len(basis), len(basis)))
            for n in (inv_a, inv_r, inv_s):
                t = np.einsum("ab,jbc,cd->jad", n, basis, n)
                hess += np.einsum("iab,jba->ij", basis, t).real
            hess *= mu
            step = _newton_step(hess, grad)
            decrement = float(grad @ step)
            if not decrement > 0.0:
                break
            direction = hermitian(np.einsum("i,iab->ab", step, basis))
            rates = _relative_rates((a, slack_r, slack_s), direction)
            t = 1.0
            in_quadratic = decrement <= QUADRATIC_REGION * mu
            if not in_quadratic:
                while t >= 1e-20:
                    gain = _barrier_gain(rates, t)
                    if gain is not None:
                        gain = t * float(np.trace(direction).real) + mu * gain
                        if gain >= ARMIJO_SLOPE * t * decrement:
                            break
                    t *= 0.5
            elif _barrier_gain(rates, t) is None:
                t = 0.0
            if t < 1e-20:
                break
            inner += 1
            a = hermitian(a + t * direction)
            slack_r = hermitian(slack_r - t * direction)
            slack_s = hermitian(slack_s - t * direction)
            steps += 1
            current = certify()
            history.append((mu, current[3], current[4]))
            if best is None or current[4] - current[3] < best[4] - best[3]:
                best = current
            if steps >= max_newton:
                return best, history, steps, False
        current = certify()
        if best is None or current[4] - current[3] <= best[4] - best[3]:
            best = current
        if current[4] - current[3] <= tol:
            return current, history, steps, True
        if current[4] - current[3] <= POLISH_START:
            polished = _polish(rho_s, sigma_s, a, slack_r, slack_s, current[1], current[2], mu)
            if polished is not None and polished[4] - polished[3] < best[4] - best[3]:
                best = polished
                if polished[4] - polished[3] <= tol:
                    return polished, history, steps, True
        mu /= MU_FACTOR


def dmax_tv_sdp(rho, sigma, tol=SDP_TOL, max_newton=MAX_NEWTON):
    """Solve ``inf{tr(rho + sigma - 2A) : 0 <= A <= rho, A <= sigma}``.

    Returns an :class:`SdpResult` whose ``gap`` bounds ``tr A* - tr A_opt``.
    Raises :class:`NoConvergence` (carrying the best result) after
    ``max_newton`` Newton steps.
    """
    rho, sigma = _pair(rho, sigma)
    d = rho.shape[0]
    total = float(np.trace(rho).real + np.trace(sigma).real)
    b = support_intersection_basis(rho, sigma)
    k = b.shape[1]
    zero = np.zeros((d, d), dtype=np.complex128)
    if k == 0:
        return SdpResult(total, zero, zero.copy(), zero.copy(), 0.0, 0, 0, b)
    rho_s, sigma_s = shorted_operator(rho, b), shorted_operator(sigma, b)
    best, history, steps, ok = _solve_reduced(rho_s, sigma_s, tol, max_newton)
    a, y, z, primal, dual = best

    def lift(m):
        return hermitian(b @ m @ b.conj().T)

    result = SdpResult(
        value=total - 2.0 * primal,
        A_opt=lift(a),
        dual_Y=lift(y),
        dual_Z=lift(z),
        gap=dual - primal,
        iterations=steps,
        reduced_dim=k,
        basis=b,
        history=tuple(history),
        converged=ok,
    )
    if not ok:
        raise NoConvergence(f"no certificate within {max_newton} Newton steps", result)
    return result


def dmax_tv_pure(rho, psi):
    """``D^max`` against the pure state ``|psi><psi|``.

    For full-rank ``rho`` the optimal ``A`` is ``lambda |psi><psi|`` with
    ``lambda = 1 / <psi|rho^{-1}|psi>``, giving ``2 - 2 / <psi|rho^{-1}|psi>``.
    Rank-deficient ``rho`` is delegated to :func:`dmax_tv_sdp`.
    """
    rho = density(rho)
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.size != rho.shape[0]:
        raise DimensionMismatch(f"psi has length {psi.size}, rho is {rho.shape[0]}-dimensional")
    psi = psi / np.linalg.norm(psi)
    w = np.linalg.eigvalsh(rho)
    if w[0] <= 1e-12 * w[-1]:
        return dmax_tv_sdp(rho, np.outer(psi, psi.conj())).value
    quad = float((psi.conj() @ np.linalg.solve(rho, psi)).real)
    return 2.0 - 2.0 / quad


def dmax_tv_pure_half(rho, psi):
    """The pure-state expression without the overall factor 2.

    ``1 - <psi|rho|psi> + <psi|rho rho22^- rho|psi>`` with
    ``rho22 = (I - P) rho (I - P)`` and ``^-`` the generalized inverse. It is
    exactly half of :func:`dmax_tv_pure`; kept for comparison only.
    """
    rho = density(rho)
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    comp = np.eye(rho.shape[0]) - np.outer(psi, psi.conj())
    rho22 = comp @ rho @ comp
    v = rho @ psi
    return float(1.0 - (psi.conj() @ v).real + (v.conj() @ generalized_inverse(rho22) @ v).real)


@dataclass(frozen=True)
class ReversibilityReport:
    reversible: bool
    boundary: bool
    A: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    min_eig_A: float
    tv: float
    dmax: float | None = None
    sdp_gap: float | None = None


def reversibility_check(rho, sigma, tol=REVERSIBLE_TOL, with_sdp=False):
    """Test ``A = (rho + sigma - |rho - sigma|) / 2 >= 0``.

    This holds exactly when ``D^max`` equals the trace distance. The
    decomposition ``rho = A + delta1``, ``sigma = A + delta2`` uses the
    positive and negative parts of ``rho - sigma``.
    """
    rho, sigma = density(rho), density(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    a = hermitian(0.5 * (rho + sigma - abs_op(diff)))
    lam = float(np.linalg.eigvalsh(a)[0])
    dmax = gap = None
    if with_sdp:
        res = dmax_tv_sdp(rho, sigma)
        dmax, gap = res.value, res.gap
    return ReversibilityReport(
        reversible=lam >= -tol,
        boundary=abs(lam) <= BOUNDARY_BAND,
        A=a,
        delta1=positive_part(diff),
        delta2=positive_part(-diff),
        min_eig_A=lam,
        tv=trace_norm(diff),
        dmax=dmax,
        sdp_gap=gap,
    )


def _same_dim(rho, sigma):
    rho, sigma = hermitian(rho), hermitian(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    return rho, sigma


def sufficient_close(rho, sigma):
    """``|| |rho - sigma| ||_op <= lambda_min(rho + sigma)``."""
    rho, sigma = _same_dim(rho, sigma)
    return op_norm(rho - sigma) <= float(np.linalg.eigvalsh(rho + sigma)[0]) + 1e-12


def sufficient_anticommutator(rho, sigma):
    """``rho sigma + sigma rho >= 0``."""
    rho, sigma = _same_dim(rho, sigma)
    return is_psd(rho @ sigma + sigma @ rho, 1e-10)


def decomposition_check(a, delta1, delta2, rho, sigma, tol=1e-9):
    """Verify ``rho = A + d1``, ``sigma = A + d2``, ``d1 d2 = 0``, all PSD."""
    a, delta1, delta2 = hermitian(a), hermitian(delta1), hermitian(delta2)
    rho, sigma = hermitian(rho), hermitian(sigma)
    return (
        all(float(np.linalg.eigvalsh(m)[0]) >= -tol for m in (a, delta1, delta2))
        and float(np.max(np.abs(rho - a - delta1))) <= tol
        and float(np.max(np.abs(sigma - a - delta2))) <= tol
        and float(np.linalg.norm(delta1 @ delta2)) <= tol
    )
