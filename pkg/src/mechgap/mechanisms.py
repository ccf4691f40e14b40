"""Revenue of anonymous pricing (AP), sequential posted pricing (SPM),
second price with anonymous reserve (AR) and the Myerson auction (OPT).

Closed forms and quadrature live here together with a Monte Carlo harness
that simulates each mechanism's allocation and payment rule directly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import betainc

from mechgap.distributions import (
    EqualRevenueTruncated,
    Instance,
    RootIrregular,
    Triangular,
    TriangularLimit,
)
from mechgap.errors import DomainError, IrregularDistributionError, NotTriangularError
from mechgap.numerics import (
    DEFAULT_TOL,
    ToleranceConfig,
    golden_section_max,
    integrate_pieces,
    integrate_to_infinity,
)

# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpmPolicy:
    """Visit buyers in ``order``; buyer ``i`` is offered ``prices[i]``."""

    order: tuple
    prices: tuple

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        prices = tuple(float(p) for p in self.prices)
        if sorted(order) != list(range(len(order))):
            raise DomainError("policy order must be a permutation of 0..n-1")
        if len(prices) != len(order):
            raise DomainError("policy needs one price per buyer")
        if any(not p >= 0 for p in prices):
            raise DomainError("posted prices must be nonnegative")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "prices", prices)

    @classmethod
    def in_order(cls, prices: Sequence[float]) -> "SpmPolicy":
        return cls(tuple(range(len(prices))), tuple(prices))

    def to_dict(self) -> dict:
        return {"order": list(self.order), "prices": [_jsonable(p) for p in self.prices]}

    @classmethod
    def from_dict(cls, obj: dict) -> "SpmPolicy":
        try:
            return cls(tuple(obj["order"]), tuple(float(p) for p in obj["prices"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed policy {obj!r}") from exc


@dataclass
class RevenueReport:
    mechanism: str
    revenue: float
    argument: Union[float, SpmPolicy, None] = None
    numeric_error: float = 0.0
    method: str = "closed_form"
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mechanism not in ("AP", "SPM", "AR", "OPT"):
            raise DomainError(f"unknown mechanism label {self.mechanism!r}")
        if self.method not in ("closed_form", "quadrature", "monte_carlo"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.numeric_error < 0:
            raise DomainError("numeric_error must be nonnegative")

    def to_dict(self) -> dict:
        arg = self.argument
        if isinstance(arg, SpmPolicy):
            arg = arg.to_dict()
        elif arg is not None:
            arg = _jsonable(arg)
        return {
            "mechanism": self.mechanism,
            "revenue": self.revenue,
            "argument": arg,
            "numeric_error": self.numeric_error,
            "method": self.method,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class MonteCarloConfig:
    num_samples: int = 100_000
    seed: int = 0
    block_size: int = 1 << 16

    def __post_init__(self):
        if self.num_samples < 1:
            raise DomainError("num_samples must be at least 1")
        if self.block_size < 1:
            raise DomainError("block_size must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned value")


def _jsonable(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


# ---------------------------------------------------------------------------
# Grouped evaluation of order statistics
# ---------------------------------------------------------------------------

_ENTRY_BUDGET = 1 << 21


class _Groups:
    """Identical buyers collapsed into (spec, multiplicity) groups.

    Triangular groups are kept as arrays sorted by v descending so that at
    price x only the prefix with v >= x needs evaluating; the remaining
    families are evaluated one spec at a time.
    """

    def __init__(self, inst: Instance):
        counts: dict = {}
        for b in inst:
            counts[b] = counts.get(b, 0) + 1
        tri = sorted(((b, m) for b, m in counts.items() if isinstance(b, Triangular)),
                     key=lambda bm: -bm[0].v)
        self.tri_v = np.array([b.v for b, _ in tri])
        self.tri_q = np.array([b.q for b, _ in tri])
        self.tri_m = np.array([m for _, m in tri], dtype=float)
        self.other = [(b, m) for b, m in counts.items() if not isinstance(b, Triangular)]
        self.other_m = np.array([m for _, m in self.other], dtype=float)
        self.unbounded = sum(m for b, m in self.other if math.isinf(b.support_max))
        self.tail_mass = sum(m * b.tail_mass for b, m in self.other)
        bps = set(self.tri_v.tolist())
        for b, _ in self.other:
            bps.update(b.breakpoints)
        self.breakpoints = np.array(sorted(bps))
        finite = [b.support_max for b, _ in self.other if math.isfinite(b.support_max)]
        self.max_finite = max([*finite, *bps, 0.0]) if (finite or bps) else 0.0

    def _active(self, xmin: float) -> int:
        # Number of leading triangular groups with v >= xmin.
        return int(np.searchsorted(-self.tri_v, -xmin, side="right"))

    def _matrix(self, x: np.ndarray, left: bool) -> tuple[np.ndarray, np.ndarray]:
        """Rows: per-group probability of exceeding x (>= when ``left``)."""
        k = self._active(float(x.min())) if x.size else 0
        rows = []
        mult = []
        if k:
            v = self.tri_v[:k, None]
            q = self.tri_q[:k, None]
            inside = x[None, :] <= v if left else x[None, :] < v
            s = np.where(inside, v * q / ((1.0 - q) * np.minimum(x[None, :], v) + v * q), 0.0)
            if left:
                s = np.where(x[None, :] == v, q, s)
            rows.append(s)
            mult.append(self.tri_m[:k])
        for b, _ in self.other:
            rows.append(np.asarray(b.survival(x) if left else b.tail(x), dtype=float)[None, :])
        if self.other:
            mult.append(self.other_m)
        if not rows:
            return np.zeros((0, x.size)), np.zeros(0)
        return np.vstack(rows), np.concatenate(mult)

    def _chunked(self, x: np.ndarray, fn) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        order = np.argsort(-flat, kind="stable")
        xs = flat[order]
        out = np.empty_like(xs)
        i = 0
        ng = len(self.other) + 1
        while i < xs.size:
            width = max(1, _ENTRY_BUDGET // (ng + self._active(xs[i])))
            j = min(xs.size, i + width)
            # Later points need more groups; shrink until the budget holds.
            while j - i > 1 and (j - i) * (ng + self._active(xs[j - 1])) > 2 * _ENTRY_BUDGET:
                j = i + (j - i) // 2
            out[i:j] = fn(xs[i:j])
            i = j
        res = np.empty_like(out)
        res[order] = out
        return res.reshape(x.shape)

    def log_all_below(self, x, left: bool) -> np.ndarray:
        """log Pr(every value < x) when ``left``, else log Pr(every value <= x)."""
        def fn(xc):
            s, m = self._matrix(xc, left)
            with np.errstate(divide="ignore"):
                return (m[:, None] * np.log1p(-s)).sum(axis=0)
        return self._chunked(x, fn)

    def one_minus_d1(self, x, left: bool = False) -> np.ndarray:
        return -np.expm1(self.log_all_below(x, left))

    def one_minus_d2(self, x, left: bool = False) -> np.ndarray:
        """Pr(at least two values exceed x), summed over the last group that does."""
        def fn(xc):
            s, m = self._matrix(xc, left)
            if s.shape[0] == 0:
                return np.zeros(xc.size)
            mm = m[:, None]
            with np.errstate(divide="ignore", invalid="ignore"):
                log_f = np.log1p(-s)
                big_l = mm * log_f
                csum = np.cumsum(big_l, axis=0)
                prefix = np.vstack([np.zeros((1, xc.size)), csum[:-1]])
                rsum = np.cumsum(big_l[::-1], axis=0)[::-1]
                suffix = np.vstack([rsum[1:], np.zeros((1, xc.size))])
                above = -np.expm1(prefix)
                expo = np.where(mm > 1, (mm - 1) * log_f, 0.0)
                b1 = mm * s * np.exp(expo)
                b2 = np.where(mm > 1, betainc(2.0, np.maximum(mm - 1, 1.0), s), 0.0)
                terms = np.exp(suffix) * (b2 + b1 * above)
            return np.nansum(terms, axis=0)
        return self._chunked(x, fn)


def _groups(inst: Instance) -> _Groups:
    return _Groups(inst)


# ---------------------------------------------------------------------------
# Anonymous pricing
# ---------------------------------------------------------------------------

def ap_revenue(inst: Instance, p):
    """p * Pr(some value >= p). Accepts a scalar or an array of prices."""
    pa = np.asarray(p, dtype=float)
    if np.any(~(pa >= 0)):
        raise DomainError("price must be nonnegative")
    g = _groups(inst)
    out = _ap_from_groups(g, pa)
    return float(out) if out.ndim == 0 else out


def _ap_from_groups(g: _Groups, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    finite = np.isfinite(p)
    out = np.empty_like(p)
    if finite.any():
        out[finite] = p[finite] * g.one_minus_d1(p[finite], left=True)
    out[~finite] = g.tail_mass
    return out


def _price_grid(g: _Groups, cfg: ToleranceConfig, linear_cap: float, tail_points: int = 2000) -> np.ndarray:
    top = max(g.max_finite, 1.0)
    lin_end = min(top, linear_cap)
    n_lin = max(int(math.ceil(lin_end * cfg.grid_resolution)), 2) + 1
    parts = [np.linspace(0.0, lin_end, n_lin), g.breakpoints]
    if top > lin_end:
        parts.append(np.geomspace(lin_end, top, tail_points))
    if g.unbounded:
        z = np.linspace(1.0, 0.0, tail_points + 1)[:-1]
        parts.append(top / z * 1.0)
        parts.append(top * np.geomspace(1.0, 1e9, tail_points))
    grid = np.unique(np.concatenate(parts))
    return grid[grid >= 0]


def _grid_then_refine(f_many, g: _Groups, cfg: ToleranceConfig, linear_cap: float):
    grid = _price_grid(g, cfg, linear_cap)
    vals = f_many(grid)
    i = int(np.argmax(vals))
    best_x, best = float(grid[i]), float(vals[i])
    lo = float(grid[max(i - 1, 0)])
    hi = float(grid[min(i + 1, grid.size - 1)])
    err = 0.0
    if hi > lo:
        # Refine only the open cells on each side; atoms stay where they are.
        for a, b in ((lo, best_x), (best_x, hi)):
            if b - a <= cfg.root_tol:
                continue
            xr, fr = golden_section_max(lambda x: float(f_many(np.array([x]))[0]),
                                        a, b, cfg.root_tol, cfg.max_iter)
            if fr > best:
                best_x, best = xr, fr
        nb = f_many(np.array([lo, hi]))
        err = float(np.max(np.abs(nb - vals[i]))) / 2.0
    limit = None
    if g.unbounded:
        limit = g.tail_mass
    return best_x, best, err, grid.size, limit


def ap_optimal(inst: Instance, cfg: ToleranceConfig = DEFAULT_TOL) -> RevenueReport:
    """Best anonymous posted price found by grid scan plus golden-section refinement.

    The grid has ``grid_resolution`` points per unit up to min(support, 100),
    log-spaced points beyond, every atom, and 1/z-spaced tail points when a
    buyer is unbounded. The limit p -> inf is also a candidate.
    """
    g = _groups(inst)
    x, val, err, n, limit = _grid_then_refine(lambda p: _ap_from_groups(g, p), g, cfg, 100.0)
    if limit is not None and limit > val + cfg.quad_tol:
        x, val = math.inf, limit
    return RevenueReport("AP", max(val, 0.0), x, err, "closed_form", {"grid_points": n})


# ---------------------------------------------------------------------------
# Order statistics
# ---------------------------------------------------------------------------

def d1(inst: Instance, p):
    """CDF of the highest value at p."""
    g = _groups(inst)
    pa = np.asarray(p, dtype=float)
    out = np.exp(g.log_all_below(pa, left=False))
    return float(out) if out.ndim == 0 else out


def d2(inst: Instance, p):
    """CDF of the second-highest value at p (0 for a lone buyer's missing rival)."""
    g = _groups(inst)
    pa = np.asarray(p, dtype=float)
    out = 1.0 - g.one_minus_d2(pa, left=False)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Anonymous reserve
# ---------------------------------------------------------------------------

def _split_edges(edges: np.ndarray) -> np.ndarray:
    # Long pieces are cut geometrically (ratio <= 2) so each one is well resolved.
    out = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        if a > 0 and b > 2.0 * a:
            k = int(math.ceil(math.log2(b / a)))
            out.append(np.geomspace(a, b, k + 1)[1:])
        elif a == 0 and b > 0:
            out.append(b * np.geomspace(1e-3, 1.0, 11))
        else:
            out.append(np.array([b]))
    return np.unique(np.concatenate(out))


def _ar_many(g: _Groups, prices: np.ndarray, cfg: ToleranceConfig) -> tuple[np.ndarray, float]:
    prices = np.asarray(prices, dtype=float)
    out = np.empty_like(prices)
    err = 0.0
    inf_mask = np.isinf(prices)
    out[inf_mask] = g.tail_mass
    fin = prices[~inf_mask]
    if fin.size == 0:
        return out, err
    top = max(g.max_finite, 1.0) if g.unbounded >= 2 else g.max_finite
    pmin = float(fin.min())
    edges = np.unique(np.concatenate([fin[fin <= top], g.breakpoints, [top]]))
    edges = edges[(edges >= pmin) & (edges <= top)]
    integ = np.zeros(fin.size)
    if edges.size >= 2:
        fine = _split_edges(edges)
        pieces, e1 = integrate_pieces(lambda x: g.one_minus_d2(x), fine, cfg.quad_tol, cfg.max_iter)
        err += e1
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        # Integral from each edge to `top` is total minus the prefix up to it.
        from_edge = cum[-1] - cum
        idx = np.searchsorted(fine, np.minimum(fin, fine[-1]))
        integ = np.where(fin <= fine[-1], from_edge[idx], 0.0)
    if g.unbounded >= 2:
        start_top = max(top, pmin)
        tail_top, e2 = integrate_to_infinity(lambda x: g.one_minus_d2(x), start_top, cfg.quad_tol, cfg.max_iter)
        err += e2
        integ = integ + np.where(fin <= start_top, tail_top, 0.0)
        for k in np.nonzero(fin > start_top)[0]:
            val, e3 = integrate_to_infinity(lambda x: g.one_minus_d2(x), float(fin[k]), cfg.quad_tol, cfg.max_iter)
            integ[k] = val
            err += e3
    out[~inf_mask] = _ap_from_groups(g, fin) + integ
    return out, err


def ar_revenue_many(inst: Instance, prices, cfg: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """AR at several reserves sharing one quadrature pass over the breakpoints."""
    prices = np.atleast_1d(np.asarray(prices, dtype=float))
    if np.any(~(prices >= 0)):
        raise DomainError("reserve must be nonnegative")
    vals, _ = _ar_many(_groups(inst), prices, cfg)
    return vals


def ar_revenue_with_error(inst: Instance, p: float, cfg: ToleranceConfig = DEFAULT_TOL) -> tuple[float, float]:
    if not p >= 0:
        raise DomainError("reserve must be nonnegative")
    vals, err = _ar_many(_groups(inst), np.array([float(p)]), cfg)
    return float(vals[0]), err


def ar_revenue(inst: Instance, p: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """p (1 - D1(p-)) + int_p^inf (1 - D2(x)) dx.

    The integral is split at every atom and breakpoint. Beyond the largest
    finite support it vanishes unless two or more buyers are unbounded, in
    which case it is computed under z = 1/x.
    """
    return ar_revenue_with_error(inst, p, cfg)[0]


def ar_optimal(inst: Instance, cfg: ToleranceConfig = DEFAULT_TOL) -> RevenueReport:
    """Best anonymous reserve.

    For triangular instances AR is nondecreasing between consecutive monopoly
    prices, so only those prices and the limit at infinity are candidates.
    Other instances fall back to a grid scan with refinement.
    """
    g = _groups(inst)
    if inst.is_triangular:
        cands = np.unique(g.tri_v)
        if g.unbounded:
            cands = np.append(cands, math.inf)
        vals, err = _ar_many(g, cands, cfg)
        i = int(np.argmax(vals))
        return RevenueReport("AR", max(float(vals[i]), 0.0), float(cands[i]), err, "quadrature",
                             {"candidates": {_jsonable(float(c)): float(v) for c, v in zip(cands, vals)}})
    errs = []

    def many(p):
        v, e = _ar_many(g, p, cfg)
        errs.append(e)
        return v

    x, val, gerr, n, limit = _grid_then_refine(many, g, cfg, 20.0)
    if limit is not None and limit > val + cfg.quad_tol:
        x, val = math.inf, limit
    return RevenueReport("AR", max(val, 0.0), x, max(errs) + gerr, "quadrature", {"grid_points": n})


# ---------------------------------------------------------------------------
# Sequential posted pricing and OPT for triangular instances
# ---------------------------------------------------------------------------

def spm_revenue(inst: Instance, policy: SpmPolicy) -> float:
    """Sum over visits of price * Pr(accept) * Pr(no earlier acceptance).

    An infinite price earns the limit of p * Pr(value >= p) (1 for Tri(inf))
    and is never accepted.
    """
    if len(policy.order) != len(inst):
        raise DomainError("policy and instance sizes differ")
    total = 0.0
    reach = 1.0
    for i in policy.order:
        b = inst[i]
        p = policy.prices[i]
        if math.isinf(p):
            total += reach * b.tail_mass
            continue
        s = float(b.survival(p))
        total += reach * p * s
        reach *= 1.0 - s
    return total


def spm_opt_triangular(inst: Instance) -> RevenueReport:
    """OPT = SPM for triangular instances: monopoly prices, highest v first.

    Each Tri(inf) buyer contributes its limit revenue 1 ahead of the others.
    """
    if not inst.is_triangular:
        raise NotTriangularError("closed-form OPT needs a triangular instance")
    order = sorted(range(len(inst)), key=lambda i: -inst[i].v)
    prices = tuple(inst[i].v for i in range(len(inst)))
    policy = SpmPolicy(tuple(order), prices)
    n_lim = sum(isinstance(b, TriangularLimit) for b in inst)
    fin = [inst[i] for i in order if isinstance(inst[i], Triangular)]
    v = np.array([b.v for b in fin])
    q = np.array([b.q for b in fin])
    reach = np.concatenate([[1.0], np.cumprod(1.0 - q)[:-1]]) if fin else np.zeros(0)
    revenue = float(n_lim + np.sum(v * q * reach))
    return RevenueReport("SPM", revenue, policy, 0.0, "closed_form")


def opt_revenue_triangular(inst: Instance) -> RevenueReport:
    rep = spm_opt_triangular(inst)
    rep.mechanism = "OPT"
    return rep


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _max_threads() -> int:
    env = os.environ.get("MECHGAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _sample_block(inst: Instance, mc: MonteCarloConfig, block: int, size: int) -> np.ndarray:
    # One independent stream per (seed, buyer, block): results do not depend
    # on how blocks are scheduled across threads.
    out = np.empty((len(inst), size))
    for i, b in enumerate(inst):
        ss = np.random.SeedSequence(mc.seed, spawn_key=(i, block))
        u = np.random.Generator(np.random.PCG64(ss)).random(size)
        out[i] = b.quantile(u)
    return out


def _run_blocks(inst: Instance, mc: MonteCarloConfig, payoff) -> tuple[float, float]:
    nblocks = -(-mc.num_samples // mc.block_size)
    sizes = [min(mc.block_size, mc.num_samples - k * mc.block_size) for k in range(nblocks)]

    def work(k):
        pay = payoff(_sample_block(inst, mc, k, sizes[k]))
        return float(pay.sum()), float(np.dot(pay, pay))

    workers = min(_max_threads(), nblocks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, range(nblocks)))
    else:
        parts = [work(k) for k in range(nblocks)]
    s = sum(p[0] for p in parts)
    ss = sum(p[1] for p in parts)
    n = mc.num_samples
    mean = s / n
    var = max(ss / n - mean * mean, 0.0)
    se = math.sqrt(var / n) if n > 1 else 0.0
    return mean, se


def _virtual_values(b, x: np.ndarray) -> np.ndarray:
    if isinstance(b, Triangular):
        if b.q == 1.0:
            return np.full_like(x, b.v)
        return np.where(x >= b.v, b.v, -b.v * b.q / (1.0 - b.q))
    if isinstance(b, TriangularLimit):
        return np.full_like(x, -1.0)
    if isinstance(b, EqualRevenueTruncated):
        return np.where(x >= b.t, b.t, 0.0)
    if isinstance(b, RootIrregular) and b.n == 1:
        return np.zeros_like(x)
    raise IrregularDistributionError(f"{b!r} is irregular; ironing is not supported")


def myerson_mc(inst: Instance, mc: MonteCarloConfig = MonteCarloConfig()) -> RevenueReport:
    """Monte Carlo estimate of E[(max_i phi_i(b_i))_+].

    Unbounded regular buyers (Tri(inf) and the untruncated equal-revenue
    F_1) carry an atom at infinity in the limit; each adds its tail mass to
    the estimate deterministically.
    """
    for b in inst:
        if isinstance(b, RootIrregular) and b.n >= 2:
            raise IrregularDistributionError(f"{b!r} is irregular; ironing is not supported")
    extra = sum(b.tail_mass for b in inst)

    def payoff(vals):
        phi = np.vstack([_virtual_values(b, vals[i]) for i, b in enumerate(inst)])
        return np.maximum(phi.max(axis=0), 0.0)

    mean, se = _run_blocks(inst, mc, payoff)
    return RevenueReport("OPT", mean + extra, None, se, "monte_carlo",
                         {"num_samples": mc.num_samples, "seed": mc.seed, "limit_contribution": extra})


@dataclass(frozen=True)
class APMech:
    price: float


@dataclass(frozen=True)
class ARMech:
    reserve: float


@dataclass(frozen=True)
class SPMMech:
    policy: SpmPolicy


def _ap_pay(p: float):
    def payoff(vals):
        return np.where(vals.max(axis=0) >= p, p, 0.0)
    return payoff


def _ar_pay(r: float):
    def payoff(vals):
        if vals.shape[0] == 1:
            top, second = vals[0], np.zeros(vals.shape[1])
        else:
            part = np.sort(vals, axis=0)
            top, second = part[-1], part[-2]
        return np.where(top >= r, np.maximum(second, r), 0.0)
    return payoff


def _spm_pay(policy: SpmPolicy):
    def payoff(vals):
        pay = np.zeros(vals.shape[1])
        open_ = np.ones(vals.shape[1], dtype=bool)
        for i in policy.order:
            p = policy.prices[i]
            take = open_ & (vals[i] >= p)
            pay[take] = p
            open_ &= ~take
        return pay
    return payoff


def mechanism_mc(inst: Instance, mech, mc: MonteCarloConfig = MonteCarloConfig()) -> RevenueReport:
    """Simulate AP, AR or SPM on sampled value profiles.

    The AR winner is the lowest-indexed highest bidder; the payment is
    max(second-highest value, reserve) and does not depend on the tie rule.
    """
    if isinstance(mech, APMech):
        label, payoff, arg = "AP", _ap_pay(mech.price), mech.price
    elif isinstance(mech, ARMech):
        label, payoff, arg = "AR", _ar_pay(mech.reserve), mech.reserve
    elif isinstance(mech, SPMMech):
        if len(mech.policy.order) != len(inst):
            raise DomainError("policy and instance sizes differ")
        label, payoff, arg = "SPM", _spm_pay(mech.policy), mech.policy
    else:
        raise DomainError(f"unknown mechanism {mech!r}")
    mean, se = _run_blocks(inst, mc, payoff)
    return RevenueReport(label, mean, arg, se, "monte_carlo",
                         {"num_samples": mc.num_samples, "seed": mc.seed})
