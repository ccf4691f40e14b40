"""Numerical checks of the published constants, instances and invariants.

Each check yields a ``Check`` row: what was measured, the target, the
tolerance and whether it passed. The CLI ``verify`` command and the
acceptance tests both consume these rows.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

import numpy as np
from scipy import integrate

from mechgap.distributions import Instance, RootIrregular, Triangular, TriangularLimit, is_regular_numeric
from mechgap.instances import (
    GenParams,
    gen_ar_ap_iid,
    gen_ar_ap_regular,
    gen_opt_ar_four,
    gen_opt_ar_three,
    gen_opt_ar_two,
    gen_spm_ap_worst,
    verify_feasibility,
)
from mechgap.mechanisms import (
    APMech,
    ARMech,
    MonteCarloConfig,
    SpmPolicy,
    SPMMech,
    ap_optimal,
    ap_revenue,
    ar_optimal,
    ar_revenue,
    ar_revenue_many,
    d1,
    d2,
    mechanism_mc,
    myerson_mc,
    spm_opt_triangular,
    spm_revenue,
)
from mechgap.numerics import DEFAULT_TOL, ToleranceConfig, adaptive_simpson
from mechgap.special import (
    PI2_6,
    _cstar_integrand,
    ar_upper_constant,
    c_star_estimate,
    fact_G,
    fact_H,
    fun_Q,
    fun_R,
)
from mechgap.transforms import (
    ap_grid,
    c33_instance,
    c33_quantile,
    ensure_tri_infinity,
    merge_duplicates,
    slack_c32,
    tighten_c32,
    to_triangular,
)


@dataclass
class Check:
    criterion: int
    name: str
    target: str
    measured: float
    tolerance: str
    passed: bool
    seconds: float = 0.0

    def __post_init__(self):
        self.measured = float(self.measured)
        self.passed = bool(self.passed)

    def to_dict(self) -> dict:
        d = asdict(self)
        if isinstance(d["measured"], float) and not math.isfinite(d["measured"]):
            d["measured"] = str(d["measured"])
        return d

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] #{self.criterion} {self.name}: measured {self.measured:.10g} "
                f"target {self.target} tol {self.tolerance}")


def _close(c: int, name: str, value: float, target: float, tol: float, label: str | None = None) -> Check:
    return Check(c, name, label or f"{target:.10g}", float(value), f"±{tol:g}", abs(value - target) <= tol)


def _at_most(c: int, name: str, value: float, bound: float) -> Check:
    return Check(c, name, f"<= {bound:.10g}", float(value), "bound", value <= bound)


def _at_least(c: int, name: str, value: float, bound: float) -> Check:
    return Check(c, name, f">= {bound:.10g}", float(value), "bound", value >= bound)


def _timed(fn: Callable):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def cstar_unsubstituted(upper: float = 1e4, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """2 + int_1^upper (1 - exp(-Q(x))) dx by scipy's QUADPACK, no substitution."""
    f = lambda x: -math.expm1(-fun_Q(x, cfg)) if x > 1.0 else 1.0  # noqa: E731
    edges = [1.0, 1.5, 3.0, 10.0, 100.0, 1000.0, upper]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-12, limit=200)
        total += val
    return 2.0 + total


def pi2over6_series(terms: int = 10 ** 6) -> float:
    """1 + sum_{k<=terms} 1 / (k^2 (k + 1)), summed smallest terms first."""
    k = np.arange(terms, 0, -1, dtype=float)
    return 1.0 + float(np.sum(1.0 / (k * k * (k + 1.0))))


def lemma35_rhs(a: float, b: float, cfg: ToleranceConfig = DEFAULT_TOL) -> float:
    """int_a^b (x - 1) d exp(-Q(x)), after integrating by parts; ``b`` may be inf."""
    one_minus_e = lambda x: -math.expm1(-fun_Q(x, cfg))  # noqa: E731
    if math.isinf(b):
        integral, _ = adaptive_simpson(lambda z: _cstar_integrand(z, cfg), 0.0, 1.0 / a,
                                       cfg.quad_tol * 1e-2, max_depth=cfg.max_iter, fa=0.5)
        boundary_b = 0.0
    else:
        integral, _ = adaptive_simpson(one_minus_e, a, b, cfg.quad_tol * 1e-2, max_depth=cfg.max_iter)
        boundary_b = (b - 1.0) * one_minus_e(b)
    return integral - boundary_b + (a - 1.0) * one_minus_e(a)


# ---------------------------------------------------------------------------
# Acceptance suites
# ---------------------------------------------------------------------------

def check_cstar(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    (val, _err), secs = _timed(lambda: c_star_estimate(cfg))
    oracle = cstar_unsubstituted(cfg=cfg)
    return [
        _close(1, "C* by substituted quadrature", val, 2.6202, 5e-4),
        _close(1, "C* vs unsubstituted integral to 1e4", val, oracle, 2e-4, f"{oracle:.10g}"),
        _at_most(1, "C* runtime seconds", secs, 1.0),
    ]


def check_pi2over6(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    val, secs = _timed(lambda: ar_upper_constant(cfg))
    series = pi2over6_series()
    return [
        _close(2, "AR/AP constant by quadrature", val, PI2_6, 1e-6),
        _close(2, "AR/AP constant vs series oracle", val, series, 1e-6, f"{series:.10g}"),
        _at_most(2, "AR/AP constant runtime seconds", secs, 1.0),
    ]


IID_TABLE = {
    2: 2.0 * math.log(2.0),
    3: 3.0 * math.log(3.0) - math.pi / math.sqrt(3.0),
    4: 9.0 * math.log(2.0) - 1.5 * math.pi,
}


def check_iid_table(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    return [_close(3, f"AR(1) for {n} iid root-irregular buyers", ar_revenue(gen_ar_ap_iid(n), 1.0, cfg),
                   target, 1e-3) for n, target in IID_TABLE.items()]


def check_iid_convergence(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    ns = (2, 3, 4, 10, 50, 200)
    vals = [ar_revenue(gen_ar_ap_iid(n), 1.0, cfg) for n in ns]
    steps = np.diff(vals)
    return [
        _at_least(4, "AR(1) for 200 iid buyers", vals[-1], 1.62),
        _at_least(4, "smallest AR(1) increment over n in {2,3,4,10,50,200}", float(steps.min()), 0.0),
    ]


def check_spm_ap_instance(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    def run():
        inst, _ = gen_spm_ap_worst(GenParams(epsilon=0.05, n=4000), cfg)
        return inst, spm_opt_triangular(inst).revenue, ap_optimal(inst, cfg).revenue, verify_feasibility(inst, cfg)

    (inst, spm, ap_opt, ap_grid_max), secs = _timed(run)
    return [
        _at_most(5, "max AP of SPM/AP instance (eps=0.05, n=4000)", max(ap_opt, ap_grid_max), 1.0 + 1e-6),
        _at_least(5, "SPM of SPM/AP instance", spm, 2.3202),
        _at_most(5, "SPM/AP instance runtime seconds", secs, 30.0),
    ]


def check_ar_ap_regular(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    inst, diag = gen_ar_ap_regular(GenParams(epsilon=0.05, n=2000))
    ap = max(ap_optimal(inst, cfg).revenue, verify_feasibility(inst, cfg))
    ar_a = ar_revenue(inst, diag["a"], cfg)
    return [
        _at_most(6, "max AP of regular AR/AP instance (eps=0.05, n=2000)", ap, 1.0 + 1e-6),
        _at_least(6, "AR(a) of regular AR/AP instance", ar_a, PI2_6 - 0.15),
    ]


def check_three_buyer(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    inst, diag = gen_opt_ar_three(cfg=cfg)
    ar = ar_revenue_many(inst, [diag["v1"], diag["v2"], math.inf], cfg)
    return [
        _close(7, "three-buyer optimal v1", diag["v1"], 1.5699, 0.01),
        _close(7, "three-buyer v2", diag["v2"], 0.8399, 5e-3),
        _close(7, "three-buyer OPT", spm_opt_triangular(inst).revenue, 2.1361, 1e-3),
        _close(7, "three-buyer AR(v1)", ar[0], 1.0, 1e-3),
        _close(7, "three-buyer AR(v2)", ar[1], 1.0, 1e-3),
        _close(7, "three-buyer AR(inf)", ar[2], 1.0, 1e-3),
    ]


def check_four_buyer(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    inst = gen_opt_ar_four()
    reserves = [b.v for b in inst]
    ar = ar_revenue_many(inst, reserves, cfg)
    rows = [_close(8, f"four-buyer AR({r:g})", a, 1.0, 2e-3) for r, a in zip(reserves, ar)]
    rows.append(_close(8, "four-buyer OPT", spm_opt_triangular(inst).revenue, 2.1596, 2e-3))
    return rows


def check_equal_revenue_pair(cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    t = 1e6
    inst = gen_opt_ar_two(t)
    spm = spm_revenue(inst, SpmPolicy.in_order([t, 1.0]))
    exact = 2.0 - 1.0 / t
    # Exact up to floating-point rounding of the two-term sum.
    ulps = 4 * math.ulp(exact)
    return [
        _close(9, "equal-revenue + Tri(1,1): optimal AP", ap_optimal(inst, cfg).revenue, 1.0, 1e-5),
        _close(9, "equal-revenue + Tri(1,1): optimal AR", ar_optimal(inst, cfg).revenue, 1.0, 1e-3),
        _close(9, "equal-revenue + Tri(1,1): SPM at prices (t, 1)", spm, exact, ulps),
    ]


# ---------------------------------------------------------------------------
# Property suites
# ---------------------------------------------------------------------------

def _random_triangular(rng: np.random.Generator, n: int, with_limit: bool = False,
                       vmax: float = 5.0) -> Instance:
    vs = rng.uniform(0.2, vmax, size=n)
    qs = rng.uniform(0.05, 1.0, size=n)
    buyers = [Triangular(float(v), float(q)) for v, q in zip(vs, qs)]
    if with_limit:
        buyers.insert(int(rng.integers(0, n + 1)), TriangularLimit())
    return Instance(tuple(buyers))


def prop_facts_gh(rng, cfg=DEFAULT_TOL, pairs: int = 1000) -> list[Check]:
    lo, hi = math.log(1.001), math.log(100.0)
    a = np.exp(rng.uniform(lo, hi, size=pairs))
    b = np.exp(rng.uniform(lo, hi, size=pairs))
    xs, ys = np.minimum(a, b), np.maximum(a, b)
    g = max(fact_G(float(x), float(y), cfg) for x, y in zip(xs, ys))
    h = min(fact_H(float(x), float(y), cfg) for x, y in zip(xs, ys))
    return [
        _at_most(10, f"max fact G over {pairs} random pairs", g, 1e-9),
        _at_least(10, f"min fact H over {pairs} random pairs", h, -1e-9),
    ]


def prop_ode(cfg=DEFAULT_TOL, points: int = 100) -> list[Check]:
    p = np.geomspace(1.01, 1e3, points)
    worst = 0.0
    for x in p:
        h = 1e-5 * x
        dr = (fun_R(x + h) - fun_R(x - h)) / (2 * h)
        dq = (fun_Q(x + h, cfg) - fun_Q(x - h, cfg)) / (2 * h)
        worst = max(worst, abs(dr - x * dq) / abs(dr))
    return [_at_most(10, f"max |R' - pQ'|/|R'| at {points} points", worst, 1e-6)]


def prop_lemma35(rng, cfg=DEFAULT_TOL, count: int = 50) -> list[Check]:
    worst = -math.inf
    for _ in range(count):
        n = int(rng.integers(1, 7))
        vs = np.sort(rng.uniform(1.05, 25.0, size=n))[::-1]
        inst = c33_instance(vs.tolist())
        reach = 1.0
        prev = math.inf
        for b in inst:
            lhs = (b.v - 1.0) * b.q * reach
            rhs = lemma35_rhs(b.v, prev, cfg)
            worst = max(worst, lhs - rhs)
            reach *= 1.0 - b.q
            prev = b.v
    return [_at_most(10, f"max per-segment excess on {count} C3.3 instances", worst, cfg.quad_tol)]


def prop_reserve_monotone(rng, cfg=DEFAULT_TOL, count: int = 20) -> list[Check]:
    worst = -math.inf
    for i in range(count):
        inst = _random_triangular(rng, int(rng.integers(2, 5)), with_limit=bool(i % 2))
        vs = sorted({b.v for b in inst if math.isfinite(b.v)}, reverse=True)
        for hi, lo in zip(vs, vs[1:]):
            xs = np.linspace(lo, hi, 22)[1:-1]
            ar = ar_revenue_many(inst, xs, cfg)
            worst = max(worst, float(np.max(-np.diff(ar))))
    return [_at_most(10, f"largest AR decrease inside monopoly-price intervals ({count} instances)",
                     worst, cfg.quad_tol)]


def prop_d2_bound(rng, cfg=DEFAULT_TOL, count: int = 20) -> list[Check]:
    worst = math.inf
    insts = [_random_triangular(rng, int(rng.integers(1, 6)), with_limit=bool(i % 2)) for i in range(count)]
    insts += [gen_ar_ap_iid(n) for n in (2, 3, 5)]
    for inst in insts:
        p = np.linspace(0.01, 8.0, 400)
        a = np.asarray(d1(inst, p))
        b = np.asarray(d2(inst, p))
        mask = a > 0
        slack = b[mask] - a[mask] * (1.0 - np.log(a[mask]))
        if slack.size:
            worst = min(worst, float(slack.min()))
    return [_at_least(10, "min D2 - D1(1 - ln D1)", worst, -1e-9)]


def prop_regularity(rng, count: int = 20) -> list[Check]:
    irregular = [is_regular_numeric(RootIrregular(n), 101) for n in (2, 3, 5)]
    regular = [is_regular_numeric(Triangular(float(rng.uniform(0.2, 10)), float(rng.uniform(0.01, 1))), 101)
               for _ in range(count)]
    return [
        Check(10, "root-irregular n in {2,3,5} flagged irregular", "0 regular", float(sum(irregular)),
              "exact", not any(irregular)),
        Check(10, f"{count} random triangulars flagged regular", f"{count} regular", float(sum(regular)),
              "exact", all(regular)),
    ]


def prop_monte_carlo(rng, cfg=DEFAULT_TOL, count: int = 10, samples: int = 10 ** 6, seed: int = 0) -> list[Check]:
    worst = 0.0
    for k in range(count):
        inst = _random_triangular(rng, int(rng.integers(2, 5)))
        mc = MonteCarloConfig(num_samples=samples, seed=seed + k)
        opt = spm_opt_triangular(inst)
        policy = opt.argument
        p_ap = float(rng.choice([b.v for b in inst]))
        p_ar = float(rng.choice([b.v for b in inst])) * float(rng.uniform(0.5, 1.0))
        pairs = [
            (mechanism_mc(inst, APMech(p_ap), mc), ap_revenue(inst, p_ap)),
            (mechanism_mc(inst, ARMech(p_ar), mc), ar_revenue(inst, p_ar, cfg)),
            (mechanism_mc(inst, SPMMech(policy), mc), spm_revenue(inst, policy)),
            (myerson_mc(inst, mc), opt.revenue),
        ]
        for rep, exact in pairs:
            z = abs(rep.revenue - exact) / max(rep.numeric_error, 1e-12)
            worst = max(worst, z)
    return [_at_most(10, f"max |MC - closed form| in standard errors ({count} instances x 4 mechanisms)",
                     worst, 4.0)]


def _feasible_scaled(inst: Instance, cfg: ToleranceConfig) -> Instance:
    # AP scales linearly when all values are scaled, so dividing by the
    # largest AP gives a feasible instance.
    m = verify_feasibility(inst, cfg)
    return Instance(tuple(b if isinstance(b, TriangularLimit) else Triangular(b.v / m, b.q) for b in inst))


def prop_transforms(rng, cfg=DEFAULT_TOL, count: int = 50) -> list[Check]:
    spm_gap = 0.0
    ap_excess = -math.inf
    merge_gap = 0.0
    merge_excess = -math.inf
    tight_worst = 0.0
    tight_spm_drop = -math.inf
    tight_shape_ok = True
    inf_excess = -math.inf
    for _ in range(count):
        # Triangularize at random posted prices.
        inst = _random_triangular(rng, int(rng.integers(1, 5)))
        prices = tuple(float(b.v * rng.uniform(0.3, 1.0)) for b in inst)
        order = tuple(int(i) for i in rng.permutation(len(inst)))
        policy = SpmPolicy(order, prices)
        tri = to_triangular(inst, policy)
        spm_gap = max(spm_gap, abs(spm_revenue(tri, policy) - spm_revenue(inst, policy)))
        grid = ap_grid(inst)
        ap_excess = max(ap_excess, float(np.max(ap_revenue(tri, grid) - ap_revenue(inst, grid))))

        # Merging buyers with equal monopoly prices.
        base = _random_triangular(rng, int(rng.integers(1, 4)))
        dup = Instance(tuple(base.buyers) + tuple(Triangular(b.v, float(rng.uniform(0.05, 1))) for b in base))
        merged = merge_duplicates(dup)
        merge_gap = max(merge_gap, abs(spm_opt_triangular(merged).revenue - spm_opt_triangular(dup).revenue))
        grid = ap_grid(dup)
        merge_excess = max(merge_excess, float(np.max(ap_revenue(merged, grid) - ap_revenue(dup, grid))))

        # Tightening C3.2 on an instance with loose constraints.
        n = int(rng.integers(1, 6))
        vs = np.sort(rng.uniform(1.1, 15.0, size=n))[::-1]
        buyers = []
        acc_prev = math.inf
        for v in vs:
            q = c33_quantile(float(v), acc_prev) * float(rng.uniform(0.3, 1.0))
            buyers.append(Triangular(float(v), q))
            acc_prev = float(v)
        loose = Instance(tuple(buyers))
        before = slack_c32(loose, cfg)
        tight = tighten_c32(loose, cfg)
        after = slack_c32(tight, cfg)
        tight_worst = max(tight_worst, max(abs(s) for s in after.slacks))
        tight_spm_drop = max(tight_spm_drop, spm_opt_triangular(loose).revenue - spm_opt_triangular(tight).revenue)
        prev_v = math.inf
        for old, new, s in zip(loose.finite_triangular(), tight.finite_triangular(), before.slacks):
            if s > cfg.root_tol:
                tight_shape_ok &= old.v < new.v < prev_v and new.q < old.q
            prev_v = new.v

        # Folding into Tri(inf) keeps AP at most 1.
        while True:
            cand = _feasible_scaled(_random_triangular(rng, int(rng.integers(2, 6))), cfg)
            if sum(b.v * b.q for b in cand) > 1.0:
                break
        folded = ensure_tri_infinity(cand)
        grid = ap_grid(cand)
        inf_excess = max(inf_excess, float(np.max(ap_revenue(folded, grid))) - 1.0)
    return [
        _at_most(10, "to_triangular: SPM change", spm_gap, 1e-12),
        _at_most(10, "to_triangular: AP increase on grid", ap_excess, 1e-9),
        _at_most(10, "merge_duplicates: SPM change", merge_gap, 1e-12),
        _at_most(10, "merge_duplicates: AP increase on grid", merge_excess, 1e-9),
        _at_most(10, "tighten_c32: largest |slack| after", tight_worst, 10 * cfg.root_tol),
        _at_most(10, "tighten_c32: SPM decrease", tight_spm_drop, 1e-12),
        Check(10, "tighten_c32: loose buyers move up in price and down in quantile", "true",
              float(tight_shape_ok), "exact", bool(tight_shape_ok)),
        _at_most(10, "ensure_tri_infinity: AP excess over 1 on grid", inf_excess, 1e-9),
    ]


def check_properties(seed: int = 0, cfg: ToleranceConfig = DEFAULT_TOL, mc_samples: int = 10 ** 6) -> list[Check]:
    rng = np.random.default_rng(seed)
    rows: list[Check] = []
    rows += prop_facts_gh(rng, cfg)
    rows += prop_ode(cfg)
    rows += prop_lemma35(rng, cfg)
    rows += prop_reserve_monotone(rng, cfg)
    rows += prop_d2_bound(rng, cfg)
    rows += prop_regularity(rng)
    rows += prop_monte_carlo(rng, cfg, samples=mc_samples, seed=seed)
    rows += prop_transforms(rng, cfg)
    return rows


SUITES: dict[str, tuple[Callable[..., list[Check]], ...]] = {
    "spm-ap": (check_cstar, check_spm_ap_instance),
    "ar-ap": (check_pi2over6, check_iid_table, check_iid_convergence, check_ar_ap_regular),
    "opt-ar": (check_three_buyer, check_four_buyer, check_equal_revenue_pair),
}


def run_suite(name: str, seed: int = 0, cfg: ToleranceConfig = DEFAULT_TOL) -> list[Check]:
    """Run one named suite ('all', 'spm-ap', 'ar-ap', 'opt-ar' or 'properties')."""
    if name == "properties":
        return check_properties(seed, cfg)
    if name == "all":
        rows: list[Check] = []
        for key in ("spm-ap", "ar-ap", "opt-ar"):
            rows += run_suite(key, seed, cfg)
        rows += check_properties(seed, cfg)
        return sorted(rows, key=lambda r: r.criterion)
    if name not in SUITES:
        raise KeyError(name)
    rows = []
    for fn in SUITES[name]:
        t0 = time.perf_counter()
        part = fn(cfg)
        for r in part:
            r.seconds = time.perf_counter() - t0
        rows += part
    return rows


def summarize(rows: Iterable[Check]) -> dict[int, bool]:
    out: dict[int, bool] = {}
    for r in rows:
        out[r.criterion] = out.get(r.criterion, True) and r.passed
    return out
