"""Small dense linear algebra and fixed-step integration.

Everything here works on plain numpy float arrays: vectors are 1-d arrays,
matrices 2-d. Sizes are tiny (n <= 10), so the routines favour verifiable
code over asymptotic cleverness: the Lyapunov equation is solved through
its Kronecker vectorization, definiteness through explicit Cholesky pivots,
and symmetric eigenvalues through cyclic Jacobi sweeps.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

SYMMETRY_TOL = 1e-9
PD_PIVOT_TOL = 1e-12
ZERO_COLUMN_TOL = 1e-14


class NonFiniteDerivative(ArithmeticError):
    """A derivative evaluation produced NaN or infinity."""


class SingularSystem(ArithmeticError):
    """The vectorized Lyapunov system is numerically singular."""


class NotSymmetric(ValueError):
    """Matrix asymmetry exceeds the symmetry tolerance."""


class NoConvergence(ArithmeticError):
    """Jacobi sweeps failed to drive the off-diagonal norm down."""


class ZeroColumn(ValueError):
    """Column vector has (numerically) zero norm."""


def rk4_step(deriv: Callable[[float, np.ndarray], np.ndarray],
             t: float, x: np.ndarray, h: float) -> np.ndarray:
    """Advance x by one classical 4th-order Runge-Kutta step of size h.

    Raises NonFiniteDerivative if any of the four stage evaluations is
    non-finite; the state itself then stays untouched.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = np.asarray(deriv(t, x), dtype=float)
        k2 = np.asarray(deriv(t + h / 2.0, x + (h / 2.0) * k1), dtype=float)
        k3 = np.asarray(deriv(t + h / 2.0, x + (h / 2.0) * k2), dtype=float)
        k4 = np.asarray(deriv(t + h, x + h * k3), dtype=float)
        for k in (k1, k2, k3, k4):
            if not np.all(np.isfinite(k)):
                raise NonFiniteDerivative(f"non-finite derivative near t={t!r}")
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def solve_lyapunov(A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Solve A^T P + P A = -Q for symmetric P.

    Vectorizes to the n^2 x n^2 system (I (x) A^T + A^T (x) I) vec(P) =
    -vec(Q) and solves it densely with partial pivoting. Fine for the
    small n used here; requires no eigenvalue pair of A summing to zero
    (always true for Hurwitz A).
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise ValueError("A and Q must be square with matching size")
    _require_symmetric(Q, "Q")

    eye = np.eye(n)
    K = np.kron(eye, A.T) + np.kron(A.T, eye)
    try:
        vec_p = np.linalg.solve(K, -Q.flatten(order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    P = vec_p.reshape((n, n), order="F")
    P = 0.5 * (P + P.T)

    residual = np.max(np.abs(A.T @ P + P @ A + Q))
    if not np.isfinite(residual) or residual > 1e-10:
        raise SingularSystem(
            f"Lyapunov solve residual {residual:.3e} exceeds 1e-10; "
            "system is numerically singular")
    return P


def cholesky_pivots(M: np.ndarray) -> list[float]:
    """Diagonal pivots d_j = M[j,j] - sum_k L[j,k]^2 of a Cholesky sweep.

    Stops at the first pivot <= PD_PIVOT_TOL (the factorization cannot
    continue past it); the offending pivot is the last list entry.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    L = np.zeros((n, n))
    pivots = []
    for j in range(n):
        d = M[j, j] - np.dot(L[j, :j], L[j, :j])
        pivots.append(float(d))
        if d <= PD_PIVOT_TOL:
            break
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, n):
            L[i, j] = (M[i, j] - np.dot(L[i, :j], L[j, :j])) / L[j, j]
    return pivots


def is_positive_definite(M: np.ndarray) -> bool:
    """True iff all Cholesky pivots of (the symmetrized) M exceed 1e-12.

    Raises NotSymmetric when the asymmetry of M is larger than 1e-9.
    """
    M = np.asarray(M, dtype=float)
    _require_symmetric(M, "M")
    M = 0.5 * (M + M.T)
    pivots = cholesky_pivots(M)
    return len(pivots) == M.shape[0] and pivots[-1] > PD_PIVOT_TOL


def eig_symmetric(M: np.ndarray, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi.

    Sweeps rotate away each off-diagonal entry in turn until the
    off-diagonal Frobenius norm drops below 1e-12. Raises NoConvergence
    if that has not happened after max_sweeps sweeps, NotSymmetric if M
    is not symmetric to 1e-9.
    """
    M = np.asarray(M, dtype=float)
    _require_symmetric(M, "M")
    A = 0.5 * (M + M.T)
    n = A.shape[0]
    if n == 1:
        return A[0, :].copy()

    def off_norm() -> float:
        return float(np.sqrt(2.0 * np.sum(np.tril(A, -1) ** 2)))

    for _ in range(max_sweeps):
        if off_norm() < 1e-12:
            return np.sort(np.diag(A))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # Rotation angle that zeroes A[p,q] (Golub & Van Loan form,
                # smaller-magnitude tangent root for stability).
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                idx = [p, q]
                jt = np.array([[c, -s], [s, c]])
                A[idx, :] = jt @ A[idx, :]
                A[:, idx] = A[:, idx] @ jt.T
                A[p, q] = A[q, p] = 0.0
    if off_norm() < 1e-12:
        return np.sort(np.diag(A))
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def left_pinv_col(b: np.ndarray) -> np.ndarray:
    """Left pseudo-inverse b^T / (b^T b) of a nonzero column vector."""
    b = np.asarray(b, dtype=float).reshape(-1)
    nrm2 = float(np.dot(b, b))
    if np.sqrt(nrm2) < ZERO_COLUMN_TOL:
        raise ZeroColumn("column vector is numerically zero")
    return b / nrm2


def _require_symmetric(M: np.ndarray, name: str) -> None:
    asym = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    if asym > SYMMETRY_TOL:
        raise NotSymmetric(f"{name} is not symmetric (max asymmetry {asym:.3e})")
