"""Phase-I simplex for feasibility of {x >= 0 : A x = b}.

Bland's rule for both the entering and the leaving variable, so the method
terminates on degenerate problems.
"""
from __future__ import annotations

import numpy as np


def phase_one(A, b, tol: float = 1e-9, max_iter: int = 10_000):
    """Return ``(feasible, x)``; ``x`` is a basic feasible point when feasible, else None."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).ravel()
    m, n = A.shape
    if b.shape[0] != m:
        raise ValueError("A and b disagree on the row count")
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # tableau [A | I | b], artificial basis
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    # reduced costs of min sum(artificials): row = -sum of constraint rows
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()

    for _ in range(max_iter):
        cost = T[m, :n + m]
        entering = next((j for j in range(n + m) if cost[j] < -tol), None)
        if entering is None:
            break
        col = T[:m, entering]
        best = None
        for i in range(m):
            if col[i] > tol:
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best[0] - tol or (abs(ratio - best[0]) <= tol and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            break  # unbounded direction; cannot happen for a phase-I objective bounded below
        r = best[1]
        T[r] /= T[r, entering]
        for i in range(m + 1):
            if i != r and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[r]
        basis[r] = entering
    else:
        raise RuntimeError("simplex iteration limit reached")

    if -T[m, -1] > tol * max(1.0, float(np.abs(b).max(initial=0.0))):
        return False, None
    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    return True, np.maximum(x[:n], 0.0)
