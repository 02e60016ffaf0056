from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class GMRESStats:
    iterations: int = 0
    converged: bool = False
    breakdown: bool = False
    residual_norms: list[float] = field(default_factory=list)  # estimated, one per iteration
    restart_starts: list[int] = field(default_factory=list)  # index into residual_norms of each cycle
    final_residual: float = 0.0


def _identity(v):
    return v


def gmres_solve(apply_A, b, precond=None, restart=30, rtol=1e-6, max_its=300, x0=None, atol=0.0):
    """Restarted, right-preconditioned GMRES(m) with modified Gram-Schmidt.

    Stops when ``||b - A x|| <= max(rtol * ||b||, atol)`` or after ``max_its``
    Arnoldi steps. Returns ``(x, stats)``.
    """
    b = np.asarray(b, dtype=float)
    M = precond or _identity
    n = b.shape[0]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    stats = GMRESStats()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        stats.converged = True
        return np.zeros(n), stats
    target = max(rtol * bnorm, atol)
    r = b - apply_A(x) if x0 is not None else b.copy()
    beta = float(np.linalg.norm(r))
    m = max(1, min(int(restart), n))
    tiny = np.finfo(float).eps

    while True:
        stats.final_residual = beta
        if beta <= target:
            stats.converged = True
            return x, stats
        if stats.iterations >= max_its or stats.breakdown or not np.isfinite(beta):
            return x, stats
        V = np.zeros((m + 1, n))
        H = np.zeros((m + 1, m))
        cs = np.zeros(m)
        sn = np.zeros(m)
        g = np.zeros(m + 1)
        V[0] = r / beta
        g[0] = beta
        stats.restart_starts.append(len(stats.residual_norms))
        stats.residual_norms.append(beta)
        k = 0
        for j in range(m):
            w = apply_A(M(V[j]))
            stats.iterations += 1
            for i in range(j + 1):
                H[i, j] = np.dot(w, V[i])
                w = w - H[i, j] * V[i]
            h_next = float(np.linalg.norm(w))
            H[j + 1, j] = h_next
            lucky = h_next <= tiny * max(1.0, float(np.abs(H[: j + 1, j]).max()))
            if not lucky:
                V[j + 1] = w / h_next
            for i in range(j):
                hij = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = hij
            denom = np.hypot(H[j, j], H[j + 1, j])
            if denom == 0.0:
                stats.breakdown = True
                break
            cs[j] = H[j, j] / denom
            sn[j] = H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            stats.residual_norms.append(float(abs(g[j + 1])))
            if lucky:
                stats.breakdown = True
                break
            if abs(g[j + 1]) <= target or stats.iterations >= max_its:
                break
        if k > 0:
            y = np.zeros(k)
            for i in range(k - 1, -1, -1):
                y[i] = (g[i] - np.dot(H[i, i + 1 : k], y[i + 1 : k])) / H[i, i]
            x = x + M(V[:k].T @ y)
        r = b - apply_A(x)
        beta = float(np.linalg.norm(r))
        if stats.breakdown and beta <= target:
            stats.breakdown = False
