"""Dense Hermitian eigensolver (cyclic Jacobi) and a PCG linear solver.

Desk-scale by design (orders <= 256).  The Jacobi sweep annihilates each
off-diagonal entry with a complex plane rotation; convergence is quadratic
once the off-diagonal mass is small.  Eigenvalues come out real; optional
eigenvectors are accumulated as the product of rotations.

The conjugate-gradient solver targets the Hermitian positive definite Gram
systems of the control synthesis, with a Jacobi (diagonal) preconditioner.
"""

from __future__ import annotations

import numpy as np

from .config import NumericalError

_MAX_SWEEPS = 100


def _check_hermitian(a: np.ndarray, tol: float = 1e-10) -> None:
    dev = np.max(np.abs(a - a.conj().T))
    scale = max(1.0, float(np.max(np.abs(a))))
    if dev > tol * scale:
        raise NumericalError(f"matrix is not Hermitian (deviation {dev:.3e})")


def jacobi_eigh(matrix: np.ndarray, need_vectors: bool = True,
                tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray | None]:
    """Full spectrum of a Hermitian matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvector columns or None).  The
    rotations make ||A v - w v|| <= ~1e-14 ||A|| for every pair.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise NumericalError("eigensolver expects a square matrix")
    _check_hermitian(a)
    v = np.eye(n, dtype=complex) if need_vectors else None
    if n == 1:
        return a.real.diagonal().copy(), v
    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return np.zeros(n), v
    gate = 1e-300
    for _ in range(_MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(np.diagonal(a))))
        if off <= tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                beta = a[p, q]
                ab = abs(beta)
                if ab <= gate * fro:
                    continue
                u = beta / ab
                d = (a[q, q] - a[p, p]).real
                s_hyp = np.hypot(d, 2.0 * ab)
                if d == 0.0:
                    t = 1.0
                else:
                    t = -np.sign(d) * 2.0 * ab / (abs(d) + s_hyp)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                su = s * u
                # column update: A <- A R
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + np.conj(su) * col_q
                a[:, q] = -su * col_p + c * col_q
                # row update: A <- R^H A
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + su * row_q
                a[q, :] = -np.conj(su) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if v is not None:
                    vcol_p = v[:, p].copy()
                    vcol_q = v[:, q].copy()
                    v[:, p] = c * vcol_p + np.conj(su) * vcol_q
                    v[:, q] = -su * vcol_p + c * vcol_q
    else:
        raise NumericalError(f"Jacobi eigensolver did not converge in {_MAX_SWEEPS} sweeps")
    w = np.real(np.diagonal(a)).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    if v is not None:
        v = v[:, order]
    return w, v


def extreme_eigen_report(matrix: np.ndarray) -> dict:
    """lambda_min / lambda_max with residual checks on the extreme pairs."""
    w, v = jacobi_eigh(matrix)
    norm = max(float(np.linalg.norm(matrix, 2) if matrix.size < 4 else np.linalg.norm(matrix)), 1e-300)
    res_min = float(np.linalg.norm(matrix @ v[:, 0] - w[0] * v[:, 0]))
    res_max = float(np.linalg.norm(matrix @ v[:, -1] - w[-1] * v[:, -1]))
    if max(res_min, res_max) > 1e-8 * norm:
        raise NumericalError(
            f"eigenpair residual too large ({max(res_min, res_max):.3e} vs "
            f"1e-8 * {norm:.3e})"
        )
    return {
        "lambda_min": float(w[0]),
        "lambda_max": float(w[-1]),
        "eigenvalues": w,
        "vec_min": v[:, 0],
        "vec_max": v[:, -1],
        "residual_min": res_min,
        "residual_max": res_max,
    }


def pcg_solve(a: np.ndarray, b: np.ndarray, rtol: float = 1e-10,
              max_iter: int | None = None) -> tuple[np.ndarray, dict]:
    """Jacobi-preconditioned conjugate gradients for Hermitian PD systems.

    Returns (x, info) with info = {iterations, rel_residual}.  Raises
    NumericalError on stagnation, attaching a condition-number estimate.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = len(b)
    _check_hermitian(a)
    diag = np.real(np.diagonal(a)).copy()
    if np.any(diag <= 0):
        raise NumericalError("PCG needs a positive diagonal (matrix not PD?)")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros(n, dtype=complex), {"iterations": 0, "rel_residual": 0.0}
    x = np.zeros(n, dtype=complex)
    r = b.copy()
    z = r / diag
    p = z.copy()
    rz = np.vdot(r, z).real
    if max_iter is None:
        max_iter = max(200, 20 * n)
    best = np.inf
    stagnant = 0
    for it in range(1, max_iter + 1):
        ap = a @ p
        denom = np.vdot(p, ap).real
        if denom <= 0:
            raise NumericalError("PCG breakdown: matrix is not positive definite")
        alpha = rz / denom
        x += alpha * p
        r -= alpha * ap
        rel = float(np.linalg.norm(r)) / bnorm
        if rel <= rtol:
            return x, {"iterations": it, "rel_residual": rel}
        if rel < best * 0.999:
            best = rel
            stagnant = 0
        else:
            stagnant += 1
            if stagnant > 60:
                break
        z = r / diag
        rz_new = np.vdot(r, z).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    cond = float(np.max(diag) / np.min(diag))
    raise NumericalError(
        f"PCG stagnated at relative residual {best:.3e} (target {rtol:.1e}); "
        f"diagonal condition estimate {cond:.3e}"
    )
