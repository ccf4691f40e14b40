"""Shared numerical machinery: tolerances, quadrature, root finding, 1-D maximization."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from mechgap.errors import ConvergenceError, DomainError


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerances shared by every numeric routine in the package.

    Attributes:
        series_tol: absolute bound on a truncated series tail.
        quad_tol: absolute quadrature tolerance.
        root_tol: absolute width at which bisection stops.
        max_iter: cap on series terms, bisection steps, bracket doublings and
            quadrature refinement levels.
        grid_resolution: price-scan points per unit length.
    """

    series_tol: float = 1e-12
    quad_tol: float = 1e-9
    root_tol: float = 1e-10
    max_iter: int = 200
    grid_resolution: int = 1000

    def __post_init__(self):
        for name in ("series_tol", "quad_tol", "root_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.max_iter < 50:
            raise DomainError("max_iter must be at least 50")
        if self.grid_resolution < 1:
            raise DomainError("grid_resolution must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOL = ToleranceConfig()


# ---------------------------------------------------------------------------
# Adaptive Simpson (scalar integrands)
# ---------------------------------------------------------------------------

def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
    max_depth: int = 200,
    fa: float | None = None,
    fb: float | None = None,
    min_depth: int = 4,
    max_evals: int = 2_000_000,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with Richardson correction.

    ``fa`` and ``fb`` replace the endpoint evaluations, which lets callers
    supply analytic limits where ``f`` itself is singular or indeterminate.

    Returns:
        ``(value, error_estimate)``.

    Raises:
        ConvergenceError: if any subinterval needs more than ``max_depth``
            halvings or the evaluation budget is exhausted.
    """
    if a == b:
        return 0.0, 0.0
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    err = 0.0
    evals = 3
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if depth >= min_depth and abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
            err += abs(delta) / 15.0
            continue
        if depth >= max_depth or evals > max_evals:
            raise ConvergenceError(
                f"adaptive Simpson did not converge on [{lo!r}, {hi!r}] at depth {depth}"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total, err


# ---------------------------------------------------------------------------
# Vectorized adaptive Gauss-Legendre over many pieces
# ---------------------------------------------------------------------------

_GL_LO = np.polynomial.legendre.leggauss(10)
_GL_HI = np.polynomial.legendre.leggauss(21)
_CHUNK = 1 << 14


def _eval_chunked(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> np.ndarray:
    if x.size <= _CHUNK:
        return np.asarray(f(x), dtype=float)
    out = np.empty_like(x)
    for start in range(0, x.size, _CHUNK):
        out[start:start + _CHUNK] = f(x[start:start + _CHUNK])
    return out


def integrate_pieces(
    f: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    tol: float,
    max_rounds: int = 200,
) -> tuple[np.ndarray, float]:
    """Integrate a vectorized ``f`` over each interval ``[edges[k], edges[k+1]]``.

    Each piece is integrated with a 10/21-point Gauss-Legendre pair; pieces
    whose estimates disagree by more than their share of ``tol`` (share
    proportional to length) are bisected and retried. Nodes are interior, so
    ``f`` is never evaluated at an edge.

    Returns:
        ``(per_piece_integrals, total_error_estimate)``.
    """
    edges = np.asarray(edges, dtype=float)
    npieces = max(edges.size - 1, 0)
    result = np.zeros(npieces)
    if npieces == 0:
        return result, 0.0
    a = edges[:-1].copy()
    b = edges[1:].copy()
    if np.any(b < a):
        raise DomainError("integration edges must be nondecreasing")
    owner = np.arange(npieces)
    live = b > a
    a, b, owner = a[live], b[live], owner[live]
    total_len = float(np.sum(b - a))
    err_total = 0.0
    x_lo, w_lo = _GL_LO
    x_hi, w_hi = _GL_HI
    for _ in range(max_rounds):
        if a.size == 0:
            return result, err_total
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes = np.concatenate([
            (mid[:, None] + half[:, None] * x_lo[None, :]).ravel(),
            (mid[:, None] + half[:, None] * x_hi[None, :]).ravel(),
        ])
        vals = _eval_chunked(f, nodes)
        split = a.size * x_lo.size
        i_lo = half * (vals[:split].reshape(a.size, -1) @ w_lo)
        i_hi = half * (vals[split:].reshape(a.size, -1) @ w_hi)
        est = np.abs(i_hi - i_lo)
        if not np.all(np.isfinite(i_hi)):
            raise ConvergenceError("non-finite integrand encountered")
        budget = np.maximum(tol * (b - a) / total_len, 1e-15 * np.abs(i_hi))
        # Pieces at floating-point resolution cannot be split further.
        tiny = half <= 4.0 * np.finfo(float).eps * np.maximum(np.abs(mid), 1.0)
        ok = (est <= budget) | tiny
        np.add.at(result, owner[ok], i_hi[ok])
        err_total += float(np.sum(est[ok]))
        bad = ~ok
        a_bad, b_bad, m_bad, o_bad = a[bad], b[bad], mid[bad], owner[bad]
        a = np.concatenate([a_bad, m_bad])
        b = np.concatenate([m_bad, b_bad])
        owner = np.concatenate([o_bad, o_bad])
    raise ConvergenceError(f"quadrature did not converge within {max_rounds} refinements")


def integrate_to_infinity(
    f: Callable[[np.ndarray], np.ndarray],
    start: float,
    tol: float,
    max_rounds: int = 200,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[start, inf)`` through the substitution ``z = 1/x``."""
    if not start > 0:
        raise DomainError("tail integration needs a positive lower limit")

    def g(z):
        return f(1.0 / z) / (z * z)

    zmax = 1.0 / start
    # Geometric pieces toward z = 0 keep each piece well resolved.
    edges = np.concatenate([[0.0], zmax * np.logspace(-12, 0, 25)])
    vals, err = integrate_pieces(g, edges, tol, max_rounds)
    return float(vals.sum()), err


# ---------------------------------------------------------------------------
# Root finding and maximization
# ---------------------------------------------------------------------------

def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_iter: int = 200,
) -> float:
    """Find a root of ``f`` in ``[lo, hi]`` given a sign change on the bracket."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ConvergenceError(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid in (lo, hi):
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    if hi - lo <= tol * max(1.0, abs(lo)):
        return 0.5 * (lo + hi)
    raise ConvergenceError("bisection exceeded max_iter")


def invert_decreasing(
    f: Callable[[float], float],
    y: float,
    lower: float,
    tol: float,
    max_iter: int = 200,
    start: float = 2.0,
) -> float:
    """Solve ``f(p) = y`` for ``f`` strictly decreasing on ``(lower, inf)``.

    The bracket grows by doubling the distance to ``lower`` (upward) or
    halving it (downward) from ``start``; each direction may take at most
    ``max_iter`` steps.
    """
    lo = hi = start
    if f(start) >= y:
        for _ in range(max_iter):
            hi = lower + 2.0 * (hi - lower)
            if f(hi) <= y:
                break
            lo = hi
        else:
            raise ConvergenceError(f"no upper bracket for level {y!r}")
    else:
        for _ in range(max_iter):
            lo = lower + 0.5 * (lo - lower)
            if lo <= lower:
                raise ConvergenceError(f"no lower bracket for level {y!r}")
            if f(lo) >= y:
                break
            hi = lo
        else:
            raise ConvergenceError(f"no lower bracket for level {y!r}")
    return bisect(lambda p: f(p) - y, lo, hi, tol, max_iter)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``. Returns ``(argmax, max)``."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc = f(c)
    fd = f(d)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    else:
        if hi - lo > tol:
            raise ConvergenceError("golden-section search exceeded max_iter")
    return (c, fc) if fc >= fd else (d, fd)
