"""Generators for the lower-bound instances of each revenue gap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from mechgap.distributions import (
    EqualRevenueTruncated,
    Instance,
    RootIrregular,
    Triangular,
    TriangularLimit,
)
from mechgap.errors import ConvergenceError, DomainError
from mechgap.mechanisms import _ap_from_groups, _groups, _price_grid, ar_revenue_many
from mechgap.numerics import DEFAULT_TOL, ToleranceConfig, bisect, golden_section_max
from mechgap.special import fun_Q_inv, fun_R, fun_V

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class GenParams:
    epsilon: float = 0.05
    n: int = 2000
    t: float = 1e6

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError("epsilon must lie in (0, 1)")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if not self.t > 1.0:
            raise DomainError("t must exceed 1")

    @property
    def b(self) -> float:
        return 1.0 + 1.0 / self.epsilon


def _linear_q(gain: float, v: float) -> float:
    # q with v q / (1 - q) = gain
    return gain / (v + gain)


def spm_ap_params(params: GenParams, cfg: ToleranceConfig = DEFAULT_TOL) -> dict:
    eps = params.epsilon
    a = min(1.0 + eps, fun_Q_inv(math.log(1.0 / eps), cfg))
    b = params.b
    return {"a": a, "b": b, "delta": (b - a) / (params.n - 1)}


def gen_spm_ap_worst(params: GenParams, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[Instance, dict]:
    """SPM-vs-AP lower-bound instance with Tri(inf) in front and Tri(1, 1) at the end.

    Prices are a uniform partition of [a, b] with a = min(1 + eps, Q^-1(ln 1/eps))
    and b = 1 + 1/eps; quantiles are q_i = dR_i / (v_i + dR_i) with
    dR_i = R(v_i) - R(v_{i-1}) and R(v_0) = 0.
    """
    if params.n < 2:
        raise DomainError("the partition needs n >= 2")
    diag = spm_ap_params(params, cfg)
    a, b = diag["a"], diag["b"]
    n = params.n
    vs = b - np.arange(n) * diag["delta"]
    vs[-1] = a
    rs = np.asarray(fun_R(vs))
    gains = np.diff(np.concatenate([[0.0], rs]))
    buyers = [TriangularLimit()]
    buyers += [Triangular(float(v), _linear_q(float(g), float(v))) for v, g in zip(vs, gains)]
    buyers.append(Triangular(1.0, 1.0))
    return Instance(tuple(buyers)), diag


def gen_ar_ap_iid(n: int) -> Instance:
    """n i.i.d. buyers with CDF (1 - 1/p)^(1/n): AP is at most 1 at every price."""
    if int(n) != n or n < 1:
        raise DomainError("n must be a positive integer")
    return Instance((RootIrregular(int(n)),) * int(n))


def gen_ar_ap_regular(params: GenParams) -> tuple[Instance, dict]:
    """Regular AR-vs-AP lower-bound instance with 2n triangular buyers.

    n copies at b share V(b) equally; the other n sit on a uniform partition of
    [a, b) and absorb the increments of V, with a = 1 + eps and b = 1 + 1/eps.
    """
    eps, n = params.epsilon, params.n
    a, b = 1.0 + eps, params.b
    delta = (b - a) / n
    vb = fun_V(b)
    buyers = [Triangular(b, _linear_q(vb / n, b))] * n
    prev = b
    for i in range(1, n + 1):
        v = a if i == n else b - i * delta
        gain = fun_V(v) - fun_V(prev)
        buyers.append(Triangular(v, _linear_q(gain, v)))
        prev = v
    return Instance(tuple(buyers)), {"a": a, "b": b, "delta": delta}


def gen_opt_ar_two(t: float = 1e6) -> Instance:
    """Equal-revenue buyer truncated at t next to a deterministic value of 1."""
    return Instance((EqualRevenueTruncated(t), Triangular(1.0, 1.0)))


# ---------------------------------------------------------------------------
# Three- and four-buyer OPT-vs-AR instances
# ---------------------------------------------------------------------------

def three_buyer_v2_residual(v1: float, v2: float) -> float:
    """v2 + v1/(1 + v1 - v1^2) ln[(1+v1)/(1+v2) (v2(v1^2-1) + v1)/v1^3] - 1.

    Zero exactly when AR(v2) = 1 for {Tri(inf), Tri(v1, 1/v1^2), Tri(v2, 1)}.
    """
    if not 1.0 < v1 < GOLDEN:
        raise DomainError("v1 must lie in (1, golden ratio)")
    if not 0.0 < v2 < v1:
        raise DomainError("v2 must lie in (0, v1)")
    arg = (1.0 + v1) / (1.0 + v2) * (v2 * (v1 * v1 - 1.0) + v1) / v1 ** 3
    return v2 + v1 / (1.0 + v1 - v1 * v1) * math.log(arg) - 1.0


def solve_v2(v1: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    lo, hi = 1e-6, v1 - 1e-6
    f = lambda v2: three_buyer_v2_residual(v1, v2)  # noqa: E731
    if (f(lo) > 0) == (f(hi) > 0):
        raise ConvergenceError(f"no sign change of the v2 residual for v1={v1!r}")
    return bisect(f, lo, hi, cfg.root_tol, cfg.max_iter)


def three_buyer_opt(v1: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    v2 = solve_v2(v1, cfg)
    return 1.0 + 1.0 / v1 + v2 * (1.0 - 1.0 / v1 ** 2)


def three_buyer_instance(v1: float, v2: float) -> Instance:
    return Instance((TriangularLimit(), Triangular(v1, 1.0 / v1 ** 2), Triangular(v2, 1.0)))


def gen_opt_ar_three(v1: Optional[float] = None, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[Instance, dict]:
    """Three-buyer OPT-vs-AR instance {Tri(inf), Tri(v1, 1/v1^2), Tri(v2, 1)}.

    Without ``v1`` the OPT curve 1 + 1/v1 + v2(v1)(1 - 1/v1^2) is maximized on
    (1.01, 1.61) by golden-section search, with v2(v1) found by bisection.
    """
    lo, hi = 1.01, 1.61
    if v1 is None:
        v1, opt = golden_section_max(lambda x: three_buyer_opt(x, cfg), lo, hi, cfg.root_tol, cfg.max_iter)
    else:
        v1 = float(v1)
        if not 1.0 < v1 < 1.61:
            raise DomainError("v1 must lie in (1, 1.61)")
        opt = three_buyer_opt(v1, cfg)
    v2 = solve_v2(v1, cfg)
    inst = three_buyer_instance(v1, v2)
    c1 = v1 / (v1 * v1 - 1.0)
    ar_v1 = v1 * (1.0 - v1 / (v1 + 1.0) * v1 / (v1 + c1))
    ar_v2 = 1.0 + three_buyer_v2_residual(v1, v2)
    diag = {
        "v1": v1,
        "v2": v2,
        "opt": opt,
        "ar_v1_closed_form": ar_v1,
        "ar_v2_closed_form": ar_v2,
        "search_interval": [lo, hi],
    }
    return inst, diag


FOUR_BUYER_TABLE = ((1.8512, 0.2918), (0.9700, 0.6138), (0.7231, 1.0000))


def gen_opt_ar_four() -> Instance:
    """The published four-buyer OPT-vs-AR instance, taken verbatim."""
    return Instance((TriangularLimit(),) + tuple(Triangular(v, q) for v, q in FOUR_BUYER_TABLE))


def verify_feasibility(inst: Instance, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """Largest AP revenue over the standard price grid (feasible when <= 1)."""
    g = _groups(inst)
    grid = _price_grid(g, cfg, 100.0)
    vals = _ap_from_groups(g, grid)
    best = float(vals.max())
    if g.unbounded:
        best = max(best, g.tail_mass)
    return best


def ar_at_candidates(inst: Instance, cfg: ToleranceConfig = DEFAULT_TOL) -> dict:
    """AR at every monopoly price and at infinity, for triangular instances."""
    vs = sorted({b.v for b in inst}, reverse=True)
    vals = ar_revenue_many(inst, vs, cfg)
    return {v: float(x) for v, x in zip(vs, vals)}
