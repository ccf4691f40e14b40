"""Instance reductions used in the SPM-vs-AP worst-case analysis.

Each transform returns a new ``Instance``; inputs are never modified. Their
revenue relations (SPM preserved or improved, AP not increased) are checked
by the property suites rather than assumed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from mechgap.distributions import Instance, Triangular, TriangularLimit
from mechgap.errors import DomainError
from mechgap.mechanisms import SpmPolicy
from mechgap.numerics import DEFAULT_TOL, ToleranceConfig
from mechgap.special import fun_R, fun_R_inv


@dataclass(frozen=True)
class ConstraintReport:
    """Per-buyer slack R(v_k) - sum_{i<=k} ln(1 + v_i q_i / (1 - q_i)).

    Indices follow the finite triangular buyers in descending v order.
    """

    slacks: tuple
    tight_mask: tuple

    def __len__(self):
        return len(self.slacks)

    @property
    def min_slack(self) -> float:
        return min(self.slacks) if self.slacks else math.inf

    def to_dict(self) -> dict:
        return {"slacks": list(self.slacks), "tight_mask": list(self.tight_mask)}


def _log_odds_gain(b: Triangular) -> float:
    # ln(1 + v q / (1 - q)), infinite for a deterministic buyer.
    if b.q == 1.0:
        return math.inf
    return math.log1p(b.v * b.q / (1.0 - b.q))


def c33_quantile(v: float, v_prev: float) -> float:
    """Quantile making C3.2 tight at v given the previous (larger) price ``v_prev``."""
    g = math.expm1(fun_R(v) - fun_R(v_prev))
    return g / (v + g)


def c33_instance(vs: Sequence[float]) -> Instance:
    """Triangular buyers at descending prices ``vs`` (all > 1) with C3.3 quantiles.

    The price before the first one is taken to be infinity.
    """
    vs = [float(v) for v in vs]
    if any(not v > 1.0 for v in vs) or any(a <= b for a, b in zip(vs, vs[1:])):
        raise DomainError("prices must be strictly descending and above 1")
    prev = math.inf
    out = []
    for v in vs:
        out.append(Triangular(v, c33_quantile(v, prev)))
        prev = v
    return Instance(tuple(out))


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

def slack_c32(inst: Instance, cfg: ToleranceConfig = DEFAULT_TOL) -> ConstraintReport:
    """C3.2 slacks for the finite triangular buyers; a buyer with v <= 1 gets +inf."""
    fin = inst.finite_triangular()
    slacks = []
    acc = 0.0
    for b in fin:
        acc += _log_odds_gain(b)
        if b.v <= 1.0:
            slacks.append(math.inf)
        else:
            slacks.append(fun_R(b.v) - acc)
    tight = tuple(abs(s) <= cfg.root_tol for s in slacks)
    return ConstraintReport(tuple(slacks), tight)


def check_c31(inst: Instance, grid=1000) -> float:
    """max over p of sum_{v_i >= p} ln(1 + v_i q_i / ((1 - q_i) p)) + ln(1 - p^-2).

    ``grid`` is either an array of prices above 1 or a point count, in which
    case the grid is uniform on (1, max v] plus every monopoly price above 1.
    Tri(inf) is folded into the right-hand side and is skipped.
    """
    fin = [b for b in inst.finite_triangular()]
    vmax = max((b.v for b in fin), default=2.0)
    if np.ndim(grid) == 0:
        top = max(vmax, 2.0)
        p = np.linspace(1.0, top, int(grid) + 1)[1:]
        p = np.unique(np.concatenate([p, [b.v for b in fin if b.v > 1.0]]))
    else:
        p = np.asarray(grid, dtype=float)
        if np.any(p <= 1.0):
            raise DomainError("C3.1 grid points must exceed 1")
    v = np.array([b.v for b in fin])
    q = np.array([b.q for b in fin])
    with np.errstate(divide="ignore"):
        c = np.where(q < 1.0, v * q / (1.0 - q), np.inf)
    rhs = -np.log1p(-1.0 / (p * p))
    worst = -math.inf
    step = max(1, (1 << 21) // max(v.size, 1))
    for s in range(0, p.size, step):
        pc = p[s:s + step]
        active = v[:, None] >= pc[None, :]
        with np.errstate(invalid="ignore"):
            terms = np.where(active, np.log1p(c[:, None] / pc[None, :]), 0.0)
        lhs = terms.sum(axis=0)
        worst = max(worst, float(np.max(lhs - rhs[s:s + step])))
    return worst


# ---------------------------------------------------------------------------
# Reductions
# ---------------------------------------------------------------------------

def to_triangular(inst: Instance, policy: SpmPolicy) -> Instance:
    """Replace each buyer by Tri(p_i, Pr(value >= p_i)) at its posted price.

    A Tri(inf) buyer offered an infinite price stays Tri(inf). Buyers that
    never accept their price are dropped with a warning; they contribute
    nothing to SPM revenue.
    """
    if len(policy.order) != len(inst):
        raise DomainError("policy and instance sizes differ")
    out = []
    for i, b in enumerate(inst):
        p = policy.prices[i]
        if math.isinf(p):
            if isinstance(b, TriangularLimit):
                out.append(b)
            else:
                warnings.warn(f"buyer {i} is offered an infinite price and is dropped", stacklevel=2)
            continue
        if p <= 0.0:
            raise DomainError(f"buyer {i} has a nonpositive posted price")
        s = float(b.survival(p))
        if s <= 0.0:
            warnings.warn(f"buyer {i} never accepts price {p!r} and is dropped", stacklevel=2)
            continue
        out.append(Triangular(p, s))
    if not out:
        raise DomainError("every buyer was dropped")
    return Instance(tuple(out))


def merge_duplicates(inst: Instance) -> Instance:
    """Merge triangular buyers sharing a monopoly price: q = 1 - prod(1 - q_i)."""
    view = inst.triangular_view()
    out: list = []
    for b in view:
        if out and isinstance(b, Triangular) and isinstance(out[-1], Triangular) and out[-1].v == b.v:
            prev = out[-1]
            out[-1] = Triangular(b.v, prev.q + b.q - prev.q * b.q)
        else:
            out.append(b)
    return Instance(tuple(out))


def ensure_tri_infinity(inst: Instance) -> Instance:
    """Fold the highest-priced buyers into a leading Tri(inf).

    With k the first index whose prefix sum of v_i q_i exceeds 1, the output
    is Tri(inf), Tri(v_k, (sum_{i<=k} v_i q_i - 1) / v_k), then buyers k+1..n
    unchanged. An instance already led by Tri(inf) is returned as is.
    """
    view = inst.triangular_view()
    if isinstance(view[0], TriangularLimit):
        return inst
    acc = 0.0
    for k, b in enumerate(view):
        acc += b.v * b.q
        if acc > 1.0:
            qbar = (acc - 1.0) / b.v
            rest = tuple(view.buyers[k + 1:])
            return Instance((TriangularLimit(), Triangular(b.v, qbar)) + rest)
    raise DomainError("sum of v_i q_i must exceed 1")


def tighten_c32(inst: Instance, cfg: ToleranceConfig = DEFAULT_TOL) -> Instance:
    """Make every C3.2 constraint tight without lowering SPM revenue.

    Loose indices are visited in increasing order. Buyer k keeps its gain
    Delta_k = ln(1 + v_k q_k / (1 - q_k)) but moves to the price
    R^-1(Delta_k + R(v_{k-1})) with the quantile that preserves Delta_k.
    Tri(inf) buyers and buyers priced at or below 1 pass through unchanged.
    """
    view = inst.triangular_view()
    fin = [b for b in view if isinstance(b, Triangular)]
    if any(a.v <= b.v for a, b in zip(fin, fin[1:])):
        raise DomainError("tightening needs strictly descending monopoly prices")
    report = slack_c32(inst, cfg)
    finite_slacks = [s for s in report.slacks if math.isfinite(s)]
    if finite_slacks and min(finite_slacks) < -cfg.root_tol:
        raise DomainError("instance violates C3.2")
    out = []
    prev_v = math.inf
    for b, slack in zip(fin, report.slacks):
        if b.v <= 1.0 or b.q == 1.0 or slack <= cfg.root_tol:
            out.append(b)
            prev_v = b.v
            continue
        gain = _log_odds_gain(b)
        vbar = fun_R_inv(gain + fun_R(prev_v), cfg)
        g = math.expm1(gain)
        qbar = g / (vbar + g)
        out.append(Triangular(vbar, qbar))
        prev_v = vbar
    lims = [b for b in view if isinstance(b, TriangularLimit)]
    return Instance(tuple(lims + out))


def ap_grid(inst: Instance, points: int = 500) -> np.ndarray:
    """Log-spaced prices covering (0, 2 * largest finite breakpoint] plus every breakpoint."""
    bps = sorted({x for b in inst for x in b.breakpoints})
    top = 2.0 * max(bps, default=1.0)
    return np.unique(np.concatenate([np.geomspace(top * 1e-4, top, points), bps]))
