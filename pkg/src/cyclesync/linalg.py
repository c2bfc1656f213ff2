"""Symmetric eigensolvers.

``jacobi_eigh`` is the full solver (values and vectors): cyclic Jacobi with
rotations applied in round-robin order, so each round annihilates
``n // 2`` disjoint off-diagonal pairs with whole-row/column updates.

``tridiagonal_eigvals`` is a values-only path for large Monte Carlo runs:
Householder reduction to tridiagonal form followed by implicit QL with
Wilkinson-style shifts.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

MAX_SWEEPS = 100
REL_TOL = 1e-12
QL_MAX_ITER = 30


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering every (p, q), p < q, exactly once over the rounds."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_diagonal_max(a: np.ndarray) -> float:
    return float(np.abs(a - np.diag(np.diag(a))).max())


def _check_square(matrix) -> np.ndarray:
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (a + a.T)


def jacobi_eigh(
    matrix, max_sweeps: int = MAX_SWEEPS, rel_tol: float = REL_TOL
) -> tuple[np.ndarray, np.ndarray, int]:
    """Diagonalise a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors, sweeps)`` with eigenvectors as
    columns, in no particular order. Converged when the largest
    off-diagonal magnitude drops below ``rel_tol * max|diag|``. Raises
    ConvergenceError if ``max_sweeps`` sweeps are not enough.
    """
    a = _check_square(matrix)
    n = a.shape[0]
    v = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), v, 0

    rounds = _round_robin(n)
    for sweep in range(max_sweeps + 1):
        scale = float(np.abs(np.diag(a)).max())
        if _off_diagonal_max(a) <= rel_tol * scale:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.all():
                if not active.any():
                    continue
                p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            cols_p, cols_q = a[:, p], a[:, q]
            a[:, p] = cols_p * c - cols_q * s
            a[:, q] = cols_p * s + cols_q * c
            rows_p, rows_q = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp, vq = v[:, p], v[:, q]
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    raise ConvergenceError(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps "
        f"(off-diagonal {_off_diagonal_max(a):.3e})"
    )


def householder_tridiagonal(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Reduce a symmetric matrix to tridiagonal form by Householder reflections.

    Returns ``(diagonal, offdiagonal)``; ``offdiagonal[k]`` couples k and k+1.
    Similar to the input, so the spectrum is unchanged.
    """
    a = _check_square(matrix)
    n = a.shape[0]
    off = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        x = a[k + 1 :, k]
        norm = float(np.linalg.norm(x))
        if norm == 0.0:
            continue
        alpha = -math.copysign(norm, x[0])
        u = x.copy()
        u[0] -= alpha
        u /= np.linalg.norm(u)
        sub = a[k + 1 :, k + 1 :]
        p = sub @ u
        w = p - (u @ p) * u
        sub -= 2.0 * (np.outer(u, w) + np.outer(w, u))
        a[k + 1 :, k] = 0.0
        a[k, k + 1 :] = 0.0
        off[k] = alpha
    if n >= 2:
        off[n - 2] = a[n - 1, n - 2]
    return np.diag(a).copy(), off


def tridiagonal_ql(diagonal, offdiagonal, max_iter: int = QL_MAX_ITER) -> np.ndarray:
    """Eigenvalues of a symmetric tridiagonal matrix by implicit QL.

    Raises ConvergenceError if any eigenvalue needs more than ``max_iter``
    iterations.
    """
    d = [float(x) for x in diagonal]
    n = len(d)
    e = [float(x) for x in offdiagonal] + [0.0]
    if len(e) != n and n > 0:
        raise ValueError("offdiagonal must have length len(diagonal) - 1")
    eps = np.finfo(float).eps
    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if iterations == max_iter:
                raise ConvergenceError(f"QL iteration did not converge for eigenvalue {l}")
            iterations += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d)


def tridiagonal_eigvals(matrix) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending."""
    diag, off = householder_tridiagonal(matrix)
    return np.sort(tridiagonal_ql(diag, off))[::-1]
