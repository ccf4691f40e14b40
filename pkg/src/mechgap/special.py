"""Analytic helper functions behind the revenue-gap constants.

R(p) = -p ln(1 - p^-2)
Q(p) = -ln(1 - p^-2) - Li2(p^-2) / 2
V(p) = p ln(p / (p - 1))
Psi1(p) = (1 - 1/p)_+
Psi2(p) = (1 - 1/p)(1 - ln(1 - 1/p)) for p > 1, else 0

Every function accepts a float or a numpy array and returns the same kind.
``math.inf`` is a valid argument for R and Q (both vanish there).
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np

from mechgap.errors import ConvergenceError, DomainError
from mechgap.numerics import DEFAULT_TOL, ToleranceConfig, adaptive_simpson, invert_decreasing

PI2_6 = math.pi ** 2 / 6.0
_EPS = np.finfo(float).eps


def _wrap(out):
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Dilogarithm
# ---------------------------------------------------------------------------

def _li2_series_scalar(z: float, cfg: ToleranceConfig) -> float:
    # Stops once the geometric tail bound drops below the tolerance or the
    # double-precision resolution of the partial sum, whichever is tighter.
    az = abs(z)
    if az >= 1.0:
        raise DomainError("series needs |z| < 1")
    total = 0.0
    zk = 1.0
    for k in range(1, cfg.max_iter + 1):
        zk *= z
        total += zk / (k * k)
        tail = abs(zk) * az / ((k + 1) ** 2 * (1.0 - az))
        if tail <= min(cfg.series_tol, 0.25 * _EPS * abs(total)) or zk == 0.0:
            return total
    raise ConvergenceError(f"dilogarithm series did not converge at z={z!r}")


def _li2_scalar(z: float, cfg: ToleranceConfig, method: str) -> float:
    if z > 1.0:
        raise DomainError("dilogarithm is real only for z <= 1")
    if method == "series":
        return _li2_series_scalar(z, cfg)
    if method == "reflection":
        if not 0.0 < z <= 1.0:
            raise DomainError("reflection path needs 0 < z <= 1")
        if z == 1.0:
            return PI2_6
        return PI2_6 - math.log(z) * math.log1p(-z) - _li2_series_scalar(1.0 - z, cfg)
    # auto
    if z == 1.0:
        return PI2_6
    if -0.5 <= z <= 0.5:
        return _li2_series_scalar(z, cfg)
    if z > 0.5:
        return PI2_6 - math.log(z) * math.log1p(-z) - _li2_series_scalar(1.0 - z, cfg)
    # z < -0.5: Landen maps onto (1/3, 1), then recurse.
    w = z / (z - 1.0)
    return -_li2_scalar(w, cfg, "auto") - 0.5 * math.log1p(-z) ** 2


def _li2_series_array(z: np.ndarray, cfg: ToleranceConfig) -> np.ndarray:
    az = np.abs(z)
    total = np.zeros_like(z)
    zk = np.ones_like(z)
    for k in range(1, cfg.max_iter + 1):
        zk = zk * z
        total += zk / (k * k)
        tail = np.abs(zk) * az / ((k + 1) ** 2 * (1.0 - az))
        if np.all((tail <= np.minimum(cfg.series_tol, 0.25 * _EPS * np.abs(total))) | (zk == 0.0)):
            return total
    raise ConvergenceError("dilogarithm series did not converge")


def _li2_array(z: np.ndarray, cfg: ToleranceConfig) -> np.ndarray:
    out = np.empty_like(z)
    one = z == 1.0
    out[one] = PI2_6
    mid = (z >= -0.5) & (z <= 0.5)
    if mid.any():
        out[mid] = _li2_series_array(z[mid], cfg)
    hi = (z > 0.5) & ~one
    if hi.any():
        zh = z[hi]
        out[hi] = PI2_6 - np.log(zh) * np.log1p(-zh) - _li2_series_array(1.0 - zh, cfg)
    lo = z < -0.5
    if lo.any():
        zl = z[lo]
        out[lo] = -_li2_array(zl / (zl - 1.0), cfg) - 0.5 * np.log1p(-zl) ** 2
    return out


def dilog(
    z,
    cfg: ToleranceConfig = DEFAULT_TOL,
    method: Literal["auto", "series", "reflection"] = "auto",
):
    """Real dilogarithm Li2(z) = sum_k z^k / k^2 for z <= 1.

    ``method="auto"`` sums the series directly on [-0.5, 0.5], uses the
    reflection identity Li2(z) = pi^2/6 - ln z ln(1-z) - Li2(1-z) on
    (0.5, 1] and the Landen identity below -0.5. The other two methods force
    one path, which is how the two are cross-checked against each other.
    """
    if np.ndim(z) == 0:
        return _li2_scalar(float(z), cfg, method)
    z = np.asarray(z, dtype=float)
    if np.any(z > 1.0) or np.any(np.isnan(z)):
        raise DomainError("dilogarithm is real only for z <= 1")
    if method == "auto":
        return _li2_array(z, cfg)
    return np.array([_li2_scalar(float(x), cfg, method) for x in z.ravel()]).reshape(z.shape)


# ---------------------------------------------------------------------------
# R, Q, V, Psi1, Psi2
# ---------------------------------------------------------------------------

def _check_above_one(p: np.ndarray, name: str):
    if np.any(~(p > 1.0)):
        raise DomainError(f"{name}(p) needs p > 1")


def fun_R(p):
    """R(p) = -p ln(1 - p^-2) for p > 1, with R(inf) = 0."""
    p = np.asarray(p, dtype=float)
    _check_above_one(p, "R")
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(np.isinf(p), 0.0, -p * np.log1p(-1.0 / (p * p)))
    return _wrap(out)


def fun_Q(p, cfg: ToleranceConfig = DEFAULT_TOL):
    """Q(p) = -ln(1 - p^-2) - Li2(p^-2)/2 for p > 1, with Q(inf) = 0."""
    if np.ndim(p) == 0:
        p = float(p)
        if not p > 1.0:
            raise DomainError("Q(p) needs p > 1")
        if math.isinf(p):
            return 0.0
        z = 1.0 / (p * p)
        return -math.log1p(-z) - 0.5 * _li2_scalar(z, cfg, "auto")
    p = np.asarray(p, dtype=float)
    _check_above_one(p, "Q")
    z = 1.0 / (p * p)
    return _wrap(-np.log1p(-z) - 0.5 * _li2_array(z, cfg))


def _inverse(f, y: float, cfg: ToleranceConfig, name: str) -> float:
    y = float(y)
    if not y >= 0.0:
        raise DomainError(f"{name}^-1(y) needs y >= 0")
    if y == 0.0:
        return math.inf
    if math.isinf(y):
        return 1.0
    return invert_decreasing(f, y, 1.0, cfg.root_tol, cfg.max_iter)


def fun_R_inv(y: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """The unique p in (1, inf] with R(p) = y."""
    return _inverse(fun_R, y, cfg, "R")


def fun_Q_inv(y: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """The unique p in (1, inf] with Q(p) = y."""
    return _inverse(lambda p: fun_Q(p, cfg), y, cfg, "Q")


def fun_V(p):
    """V(p) = p ln(p / (p - 1)) for p > 1, with V(inf) = 1."""
    p = np.asarray(p, dtype=float)
    _check_above_one(p, "V")
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(p), 1.0, -p * np.log1p(-1.0 / p))
    return _wrap(out)


def psi1(p):
    """(1 - 1/p)_+, the CDF whose every posted price earns revenue at most 1."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise DomainError("psi1 needs p >= 0")
    with np.errstate(divide="ignore"):
        out = np.where(p > 1.0, 1.0 - 1.0 / p, 0.0)
    return _wrap(out)


def psi2(p):
    """(1 - 1/p)(1 - ln(1 - 1/p)) for p > 1, else 0."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise DomainError("psi2 needs p >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        x = 1.0 - 1.0 / p
        out = np.where(p > 1.0, x * (1.0 - np.log(x)), 0.0)
    return _wrap(out)


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------

def _cstar_integrand(z: float, cfg: ToleranceConfig) -> float:
    # z^-2 - (z^-2 - 1) e^{L/2} rewritten as E - z^-2 expm1(L/2) so the
    # small-z cancellation disappears.
    half = 0.5 * _li2_scalar(z * z, cfg, "auto")
    return math.exp(half) - math.expm1(half) / (z * z)


def c_star_estimate(cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float]:
    """Return ``(C*, error estimate)`` with C* = 2 + int_1^inf (1 - e^{-Q(x)}) dx.

    The improper integral is mapped onto (0, 1] by z = 1/x; the integrand
    there tends to 1/2 at z = 0 and to 1 at z = 1, and those limits are
    supplied as endpoint values.
    """
    val, err = adaptive_simpson(
        lambda z: _cstar_integrand(z, cfg), 0.0, 1.0, cfg.quad_tol,
        max_depth=cfg.max_iter, fa=0.5, fb=1.0,
    )
    return 2.0 + val, err


def c_star(cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """The tight SPM-vs-AP revenue gap, about 2.6202."""
    return c_star_estimate(cfg)[0]


def _ar_integrand(z: float) -> float:
    # (1 - Psi2(1/z)) / z^2 = (z + (1 - z) ln(1 - z)) / z^2
    if z < 0.1:
        total = 0.0
        zm = 1.0
        for m in range(60):
            term = zm / ((m + 1) * (m + 2))
            total += term
            if term < 1e-18:
                break
            zm *= z
        return total
    return (z + (1.0 - z) * math.log1p(-z)) / (z * z)


def ar_upper_constant_estimate(cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float]:
    """Return ``(1 + int_1^inf (1 - Psi2(x)) dx, error estimate)``; the value is pi^2/6."""
    val, err = adaptive_simpson(
        _ar_integrand, 0.0, 1.0, cfg.quad_tol, max_depth=cfg.max_iter, fa=0.5, fb=1.0,
    )
    return 1.0 + val, err


def ar_upper_constant(cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """The tight AR-vs-AP revenue gap pi^2/6, computed by quadrature."""
    return ar_upper_constant_estimate(cfg)[0]


# ---------------------------------------------------------------------------
# Inequality facts G and H
# ---------------------------------------------------------------------------

def _check_pair(x: float, y: float):
    if not (x > 1.0 and y >= x):
        raise DomainError("need y >= x > 1")


def fact_G(x: float, y: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """(1 - 1/x)(e^{R(x)-R(y)} - 1) + (R(y) - R(x)) - (Q(y) - Q(x)); nonpositive for y >= x > 1."""
    _check_pair(x, y)
    rx, ry = fun_R(x), fun_R(y)
    qx, qy = fun_Q(x, cfg), fun_Q(y, cfg)
    return (1.0 - 1.0 / x) * math.expm1(rx - ry) + (ry - rx) - (qy - qx)


def fact_H(x: float, y: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """(1/x)(e^{R(x)-R(y)} - 1) - (e^{Q(x)-Q(y)} - 1); nonnegative for y >= x > 1."""
    _check_pair(x, y)
    rx, ry = fun_R(x), fun_R(y)
    qx, qy = fun_Q(x, cfg), fun_Q(y, cfg)
    return math.expm1(rx - ry) / x - math.expm1(qx - qy)
