"""Dense Hermitian linear algebra at small dimension.

Matrices are plain ``numpy`` complex arrays. Every public function
symmetrizes its input with :func:`hermitian`, so callers may pass
anything array-like that is Hermitian up to rounding.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError, NotNormalized, NotPSD

MAX_DIM = 64
PSD_TOL = 1e-10
GINV_CUTOFF = 1e-12
INTERSECTION_CUTOFF = 2.0 - 1e-8


def hermitian(x):
    """Return ``(x + x^dagger) / 2`` as a complex128 square array."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {a.shape[0]} exceeds {MAX_DIM}")
    return 0.5 * (a + a.conj().T)


def density(x, normalized=True, tol=PSD_TOL):
    """Validate and return a density matrix.

    With ``normalized=False`` any PSD operator is accepted (subnormalized
    intermediates); otherwise the trace must be 1 within ``tol``.
    """
    rho = hermitian(x)
    if not is_psd(rho, tol):
        raise NotPSD(f"matrix is not PSD (min eigenvalue {np.linalg.eigvalsh(rho)[0]:.3e})")
    if normalized and abs(np.trace(rho).real - 1.0) > tol:
        raise NotNormalized(f"trace {np.trace(rho).real!r} differs from 1")
    return rho


def op_norm(x):
    """Largest absolute eigenvalue of a Hermitian matrix."""
    return float(np.max(np.abs(np.linalg.eigvalsh(hermitian(x)))))


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # unitary, columns

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def jacobi_eig(h, tol=1e-14, max_sweeps=100):
    """Cyclic complex Jacobi eigensolver.

    Each rotation first removes the phase of the pivot ``h[p, q]`` and then
    applies a real Givens rotation to the resulting real 2x2 block. Sweeps
    stop once the off-diagonal Frobenius norm drops below ``tol * ||h||_F``.
    Returns ``(eigenvalues, eigenvectors)`` unsorted.
    """
    a = hermitian(h).copy()
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, app - aqq)
                c, s = np.cos(theta), np.sin(theta)
                # columns: [1, 0; 0, conj(phase)] @ [[c, -s], [s, c]]
                g = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise DomainError("Jacobi iteration did not converge")
    return np.diag(a).real.copy(), v


def hermitian_eig(h, method="lapack"):
    """Eigendecomposition with eigenvalues sorted in descending order.

    ``method`` selects LAPACK (``numpy.linalg.eigh``) or the in-house
    cyclic Jacobi solver; both are deterministic.
    """
    h = hermitian(h)
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = jacobi_eig(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    return EigenSystem(w[order], v[:, order])


def _apply_spectral(h, g):
    w, v = np.linalg.eigh(hermitian(h))
    return hermitian((v * g(w)) @ v.conj().T)


def matrix_function(h, f):
    """Return ``V f(Lambda) V^dagger`` for a vectorized real function ``f``.

    Raises :class:`DomainError` when ``f`` is not finite on the spectrum.
    """
    w, v = np.linalg.eigh(hermitian(h))
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=np.float64)
    if fw.shape != w.shape or not np.all(np.isfinite(fw)):
        raise DomainError(f"function undefined on spectrum {w}")
    return hermitian((v * fw) @ v.conj().T)


def positive_part(x):
    return _apply_spectral(x, lambda w: np.maximum(w, 0.0))


def abs_op(x):
    return _apply_spectral(x, np.abs)


def trace_norm(x):
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian(x)))))


def is_psd(h, tol=PSD_TOL):
    w = np.linalg.eigvalsh(hermitian(h))
    return bool(w[0] >= -tol * max(1.0, float(np.max(np.abs(w)))))


def generalized_inverse(h, cutoff=GINV_CUTOFF):
    """Invert eigenvalues above ``cutoff * lambda_max``; zero the rest."""
    w, v = np.linalg.eigh(hermitian(h))
    top = float(np.max(w))
    if top <= 0.0:
        return np.zeros_like(v)
    keep = w > cutoff * top
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return hermitian((v * inv) @ v.conj().T)


def range_basis(h, cutoff=GINV_CUTOFF):
    """Orthonormal columns spanning the range of a PSD matrix."""
    w, v = np.linalg.eigh(hermitian(h))
    top = float(np.max(np.abs(w)))
    if top == 0.0:
        return v[:, :0]
    return v[:, w > cutoff * top]


def range_projector(h, cutoff=GINV_CUTOFF):
    b = range_basis(h, cutoff)
    return b @ b.conj().T


def support_intersection_basis(p, q):
    """Orthonormal basis of ``range(p) ∩ range(q)``."""
    s = range_projector(p) + range_projector(q)
    w, v = np.linalg.eigh(hermitian(s))
    return v[:, w > INTERSECTION_CUTOFF]


def support_intersection(p, q):
    """Orthogonal projector onto ``range(p) ∩ range(q)``."""
    b = support_intersection_basis(p, q)
    return hermitian(b @ b.conj().T)


def commutator_norm(a, b):
    """Frobenius norm of ``[a, b]``."""
    a, b = hermitian(a), hermitian(b)
    return float(np.linalg.norm(a @ b - b @ a))


def matrix_to_json(m):
    """``{"dim", "re", "im"}`` with full float precision, so parsing is lossless."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj):
    """Inverse of :func:`matrix_to_json`; ``"im"`` may be omitted.

    The entries are returned unchanged (no symmetrization) so that a matrix
    written by :func:`matrix_to_json` round-trips bit for bit.
    """
    if not isinstance(obj, dict) or "re" not in obj:
        raise ValueError('matrix JSON needs at least a "re" field')
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj["im"], dtype=np.float64) if "im" in obj else np.zeros_like(re)
    if re.ndim != 2 or re.shape[0] != re.shape[1] or im.shape != re.shape:
        raise DimensionMismatch(f"re/im must be matching square arrays, got {re.shape} and {im.shape}")
    if "dim" in obj and int(obj["dim"]) != re.shape[0]:
        raise DimensionMismatch(f'"dim" is {obj["dim"]} but the matrix is {re.shape[0]}x{re.shape[0]}')
    if re.shape[0] > MAX_DIM:
        raise DimensionMismatch(f"dimension {re.shape[0]} exceeds {MAX_DIM}")
    out = np.empty(re.shape, dtype=np.complex128)
    out.real, out.imag = re, im
    return out
