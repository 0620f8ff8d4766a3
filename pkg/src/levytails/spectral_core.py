"""Spectral abscissa machinery for Metzler matrices.

For real s the assembled A(s) is Metzler (nonnegative off-diagonal), so its
spectral abscissa zeta = max Re eig is itself an eigenvalue, carried by
nonnegative Perron vectors of the shifted matrix B = A + dI with
d = 1 + max|a_nn| (which makes B nonnegative with diagonal >= 1).  zeta is
computed by power iteration with Collatz-Wielandt bounds plus shifted
inverse-iteration refinement; no general eigensolver enters this path.  The
complex-argument variant delegates to LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._errors import ConvergenceError

_MAX_ITER = 10_000


@dataclass(frozen=True)
class SpectralResult:
    zeta: float
    right: np.ndarray
    left: np.ndarray
    right_residual: float
    left_residual: float
    simple: bool
    iterations: int


def _reaches_all(adj: np.ndarray, start: int) -> bool:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for i in frontier:
            for j in np.nonzero(adj[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    nxt.append(int(j))
        frontier = nxt
    return bool(seen.all())


def is_irreducible(A) -> bool:
    """Strong connectivity of the off-diagonal support graph (doubled BFS)."""
    M = np.asarray(A, dtype=float)
    n = M.shape[0]
    if n == 1:
        return True
    adj = (np.abs(M) > 0) & ~np.eye(n, dtype=bool)
    return _reaches_all(adj, 0) and _reaches_all(adj.T, 0)


def spectral_abscissa_metzler(A, check_simple: bool = True) -> SpectralResult:
    """Perron root and vectors of a real Metzler matrix.

    Returns zeta(A) = max Re eig(A), right/left vectors x, y normalized to
    ||x||_1 = 1 and y^T x = 1 (y falls back to ||y||_1 = 1 with simple=False
    when the pairing is numerically degenerate), the eigen-equation residuals
    measured on A itself, and the iteration count.  With check_simple the
    Perron pair is deflated and `simple` records whether the remaining
    abscissa drops below zeta - 1e-9 (1 + ||A||_inf); pass check_simple=False
    on repeated root-scan evaluations to keep the path eigensolver-free
    (simple is then None).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape != (n, n) or n == 0:
        raise ValueError("need a nonempty square matrix")
    norm_a = float(np.abs(A).sum(axis=1).max())
    off_min = float((A - np.diag(np.diag(A))).min()) if n > 1 else 0.0
    if off_min < -1e-12 * (1.0 + norm_a):
        raise ValueError("matrix is not Metzler (negative off-diagonal entry)")
    if n == 1:
        one = np.ones(1)
        return SpectralResult(float(A[0, 0]), one, one, 0.0, 0.0, True, 0)

    d = 1.0 + float(np.abs(np.diag(A)).max())
    B = np.maximum(A + d * np.eye(n), 0.0)  # clips only roundoff noise
    norm_b = float(np.abs(B).sum(axis=1).max())
    target = 1e-13 * (1.0 + norm_b)

    x = np.full(n, 1.0 / n)
    y = np.full(n, 1.0 / n)
    lam = d
    iters = 0
    while iters < _MAX_ITER:
        iters += 1
        Bx = B @ x
        Bty = B.T @ y
        ratios = Bx / x
        lo, hi = float(ratios.min()), float(ratios.max())
        yx = float(y @ x)
        if yx > 1e-8:
            # two-sided Rayleigh estimate, clamped into the certified
            # Collatz-Wielandt interval [lo, hi]
            lam = min(max(float(y @ Bx) / yx, lo), hi)
        else:
            lam = 0.5 * (lo + hi)
        if (np.abs(Bx - lam * x).max() <= target
                and np.abs(Bty - lam * y).max() <= target):
            break
        # inverse-iteration refinement with a shift certified above the
        # Perron root; (theta I - B)^{-1} is nonnegative, preserving x, y > 0
        delta = max(0.05 * (hi - lo), 1e-12 * (1.0 + hi))
        theta = hi + delta
        M = theta * np.eye(n) - B
        try:
            w = np.linalg.solve(M, x)
            v = np.linalg.solve(M.T, y)
        except np.linalg.LinAlgError:
            w, v = Bx, Bty
        if not (np.all(np.isfinite(w)) and w.max() > 0):
            w = Bx
        if not (np.all(np.isfinite(v)) and v.max() > 0):
            v = Bty
        # floor tiny/negative components: keeps the CW ratios finite without
        # disturbing the direction beyond the residual target
        w = np.maximum(w, 1e-16 * float(w.max()))
        v = np.maximum(v, 1e-16 * float(v.max()))
        x = w / w.sum()
        y = v / v.sum()

    zeta = lam - d
    res_x = float(np.abs(A @ x - zeta * x).max())
    res_y = float(np.abs(A.T @ y - zeta * y).max())
    accept = 1e-9 * (1.0 + norm_a)
    if res_x > accept or res_y > accept:
        raise ConvergenceError(
            f"Perron iteration stalled after {iters} iterations: residuals "
            f"({res_x:.3e}, {res_y:.3e}) above {accept:.3e}"
        )

    yx = float(y @ x)
    degenerate_pair = yx <= 1e-10
    if degenerate_pair:
        y = y / float(np.abs(y).sum())
        simple = False
    else:
        y = y / yx
        simple = True
    if check_simple and simple:
        # Hotelling deflation of the converged pair; any remaining eigenvalue
        # this close to zeta means the root is not algebraically simple
        Bdef = B - (zeta + d) * np.outer(x, y)
        sec = float(np.linalg.eigvals(Bdef).real.max())
        simple = sec < (zeta + d) - 1e-9 * (1.0 + norm_a)
    if not check_simple:
        simple = None

    return SpectralResult(zeta, x, y, res_x, res_y, simple, iters)


def spectral_abscissa_complex(A) -> float:
    """max Re eig for a general (complex) matrix, via LAPACK."""
    M = np.asarray(A, dtype=complex)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigenvalue computation failed: {exc}") from exc
    return float(ev.real.max())
