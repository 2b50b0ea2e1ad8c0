"""Independent numerical oracles used by the tests.

Everything here is deliberately written without touching the package's
integration or estimation code paths, so that comparisons are genuine
two-route checks: Taylor matrix exponential for affine flows, dense-grid
maximization for Lipschitz constants and velocity-to-decrease ratios.
"""

import numpy as np


def expm_taylor(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a Taylor series."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    b = a / (2.0 ** s)
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, 40):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def affine_flow(a: np.ndarray, c: np.ndarray, x0: np.ndarray, t: float) -> np.ndarray:
    """Exact solution of ``xdot = A x + c`` via the augmented exponential."""
    n = x0.size
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = a
    aug[:n, n] = c
    phi = expm_taylor(aug * t)
    return phi[:n, :n] @ x0 + phi[:n, n]


def acc_frozen_matrices(k: float, tau: float, u: float):
    """State matrix and offset of the cruise-control model with the input
    frozen at ``u`` (constant lag)."""
    a = np.array([
        [-k, 1.0, 0.0],
        [0.0, -k, 1.0],
        [k ** 3 - k ** 2 / tau, -3.0 * k ** 2 + 2.0 * k / tau, 2.0 * k - 1.0 / tau],
    ])
    c = np.array([0.0, 0.0, -u / tau])
    return a, c


def grid_pairwise_lipschitz(map_fn, lo, hi, n_side: int, keep=None) -> float:
    """Brute-force max of ``|f(x1)-f(x2)|/|x1-x2|`` over a dense grid,
    optionally filtered to ``keep(x)`` (e.g. membership in a sublevel set)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    axes = [np.linspace(lo[i], hi[i], n_side) for i in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    if keep is not None:
        pts = np.array([p for p in pts if keep(p)])
    vals = np.array([np.atleast_1d(map_fn(p)) for p in pts])
    best = 0.0
    for i in range(len(pts)):
        dx = np.linalg.norm(pts[i + 1:] - pts[i], axis=1)
        dv = np.linalg.norm(vals[i + 1:] - vals[i], axis=1)
        mask = dx > 0
        if mask.any():
            best = max(best, float(np.max(dv[mask] / dx[mask])))
    return best


def grid_ratio_max(sys, cert, pts) -> float:
    """Dense-sample max of ``(|V'||Fbar| + |Fbar|^2)/|V' Fbar|``."""
    best = 0.0
    for p in pts:
        g = cert.grad(p)
        fbar = sys.f(p, cert.u(p))
        w = float(g @ fbar)
        if w == 0.0:
            continue
        num = np.linalg.norm(g) * np.linalg.norm(fbar) + np.linalg.norm(fbar) ** 2
        best = max(best, float(num / abs(w)))
    return best
