"""Command-line front end: constants, revenues, generators, verification and curves.

Exit codes: 0 ok, 1 bad input, 2 numeric failure, 3 unsupported combination,
4 a verification check failed.
"""

from __future__ import annotations

import functools
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import click
import numpy as np

from mechgap import __version__
from mechgap.distributions import Instance, is_regular_numeric
from mechgap.errors import ConvergenceError, DomainError, IrregularDistributionError, NotTriangularError
from mechgap.instances import (
    GenParams,
    gen_ar_ap_iid,
    gen_ar_ap_regular,
    gen_opt_ar_four,
    gen_opt_ar_three,
    gen_opt_ar_two,
    gen_spm_ap_worst,
)
from mechgap.mechanisms import (
    APMech,
    ARMech,
    MonteCarloConfig,
    RevenueReport,
    SpmPolicy,
    SPMMech,
    ap_optimal,
    ap_revenue,
    ar_optimal,
    ar_revenue_many,
    ar_revenue_with_error,
    d1,
    d2,
    mechanism_mc,
    myerson_mc,
    opt_revenue_triangular,
    spm_opt_triangular,
    spm_revenue,
)
from mechgap.numerics import DEFAULT_TOL, ToleranceConfig
from mechgap.special import ar_upper_constant_estimate, c_star_estimate, dilog, fun_Q, fun_R, fun_V, psi1, psi2
from mechgap.transforms import ap_grid
from mechgap.verification import run_suite, summarize

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_UNSUPPORTED, EXIT_VERIFY = 0, 1, 2, 3, 4


@dataclass
class RunRecord:
    command: list
    config: dict
    outputs: object
    wall_time: float
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt(x: float) -> str:
    return "%.17g" % x


def _guard(fn):
    """Map package exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (IrregularDistributionError, NotTriangularError) as exc:
            click.echo(f"error: unsupported: {exc}", err=True)
            sys.exit(EXIT_UNSUPPORTED)
        except (ConvergenceError, ArithmeticError) as exc:
            click.echo(f"error: numeric failure: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except (DomainError, ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INPUT)

    return wrapper


def tolerance_options(fn):
    """Shared tolerance flags; defaults equal ``ToleranceConfig()``."""
    opts = [
        click.option("--series-tol", type=float, default=DEFAULT_TOL.series_tol, show_default=True),
        click.option("--quad-tol", type=float, default=DEFAULT_TOL.quad_tol, show_default=True),
        click.option("--root-tol", type=float, default=DEFAULT_TOL.root_tol, show_default=True),
        click.option("--max-iter", type=int, default=DEFAULT_TOL.max_iter, show_default=True),
        click.option("--grid-resolution", type=int, default=DEFAULT_TOL.grid_resolution, show_default=True),
        click.option("--record", type=click.Path(dir_okay=False, path_type=Path), default=None,
                      help="Write a JSON run record to this path."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _pop_config(kwargs: dict) -> ToleranceConfig:
    return ToleranceConfig(
        series_tol=kwargs.pop("series_tol"),
        quad_tol=kwargs.pop("quad_tol"),
        root_tol=kwargs.pop("root_tol"),
        max_iter=kwargs.pop("max_iter"),
        grid_resolution=kwargs.pop("grid_resolution"),
    )


def _write_record(path: Optional[Path], cfg: ToleranceConfig, outputs, t0: float, **extra):
    if path is None:
        return
    rec = RunRecord(list(sys.argv), cfg.to_dict(), outputs, time.perf_counter() - t0, extra=extra)
    path.write_text(rec.to_json() + "\n")


def _load_instance(path: str) -> tuple[Instance, dict]:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path}: {exc}") from exc
    return Instance.from_dict(obj), obj.get("diagnostics", {}) if isinstance(obj, dict) else {}


class _ExitCodeGroup(click.Group):
    # Click reports usage errors with status 2, which this tool reserves for
    # numeric failures; remap them to the bad-input code.
    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.ClickException as exc:
            exc.show()
            code = EXIT_INPUT
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_INPUT
        if standalone_mode:
            sys.exit(code)
        return code


@click.group(cls=_ExitCodeGroup)
@click.version_option(__version__, prog_name="mechgap")
def main():
    """Revenue gaps between AP, SPM, AR and Myerson's optimal auction."""


# ---------------------------------------------------------------------------
# constant
# ---------------------------------------------------------------------------

@main.command()
@click.argument("name", type=click.Choice(["cstar", "pi2over6"]))
@click.option("--json", "as_json", is_flag=True, help="Print a JSON object instead of text.")
@tolerance_options
@_guard
def constant(name: str, as_json: bool, record: Optional[Path], **kwargs):
    """Compute C* (SPM vs AP) or pi^2/6 (AR vs AP) by quadrature."""
    cfg = _pop_config(kwargs)
    t0 = time.perf_counter()
    fn = c_star_estimate if name == "cstar" else ar_upper_constant_estimate
    value, err = fn(cfg)
    if not math.isfinite(value):
        raise ConvergenceError(f"{name} quadrature returned {value!r}")
    out = {"name": name, "value": value, "error": err}
    if as_json:
        click.echo(json.dumps(out))
    else:
        click.echo(f"{name} = {_fmt(value)} +/- {err:.3g}")
    _write_record(record, cfg, out, t0)


# ---------------------------------------------------------------------------
# revenue
# ---------------------------------------------------------------------------

def _parse_policy(text: str, n: int) -> SpmPolicy:
    """A JSON object {"order": [...], "prices": [...]}, a JSON list of prices, or a path to either."""
    p = Path(text)
    if not text.lstrip().startswith(("{", "[")) and p.exists():
        text = p.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid policy JSON: {exc}") from exc
    policy = SpmPolicy.in_order([float(x) for x in obj]) if isinstance(obj, list) else SpmPolicy.from_dict(obj)
    if len(policy.order) != n:
        raise DomainError(f"policy has {len(policy.order)} prices for {n} buyers")
    return policy


def _revenue_report(inst: Instance, mechanism: str, price, reserve, policy_text, mc: Optional[MonteCarloConfig],
                    cfg: ToleranceConfig) -> RevenueReport:
    if mechanism == "ap":
        if price is None:
            if mc is not None:
                raise DomainError("Monte Carlo AP needs --price")
            return ap_optimal(inst, cfg)
        if mc is not None:
            return mechanism_mc(inst, APMech(price), mc)
        return RevenueReport("AP", float(ap_revenue(inst, price)), price, 0.0, "closed_form")
    if mechanism == "ar":
        if reserve is None:
            if mc is not None:
                raise DomainError("Monte Carlo AR needs --reserve")
            return ar_optimal(inst, cfg)
        if mc is not None:
            return mechanism_mc(inst, ARMech(reserve), mc)
        val, err = ar_revenue_with_error(inst, reserve, cfg)
        return RevenueReport("AR", val, reserve, err, "quadrature")
    if mechanism == "spm":
        if policy_text is None:
            if mc is not None:
                raise DomainError("Monte Carlo SPM needs --policy")
            return spm_opt_triangular(inst)
        policy = _parse_policy(policy_text, len(inst))
        if mc is not None:
            return mechanism_mc(inst, SPMMech(policy), mc)
        return RevenueReport("SPM", spm_revenue(inst, policy), policy, 0.0, "closed_form")
    # opt
    if inst.is_triangular and mc is None:
        return opt_revenue_triangular(inst)
    for b in inst:
        if not is_regular_numeric(b):
            raise IrregularDistributionError(f"OPT needs regular buyers; {b!r} is irregular")
    return myerson_mc(inst, mc or MonteCarloConfig())


@main.command()
@click.argument("instance", type=str)
@click.argument("mechanism", type=click.Choice(["ap", "ar", "spm", "opt"]))
@click.option("--price", type=float, default=None, help="AP price; omitted means optimize.")
@click.option("--reserve", type=float, default=None, help="AR reserve; omitted means optimize.")
@click.option("--policy", "policy_text", type=str, default=None,
              help="SPM policy as JSON (object or price list) or a path to it; omitted means optimal.")
@click.option("--mc-samples", type=int, default=None, help="Estimate by Monte Carlo with this many samples.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@tolerance_options
@_guard
def revenue(instance: str, mechanism: str, price, reserve, policy_text, mc_samples, seed, as_json,
            record: Optional[Path], **kwargs):
    """Revenue of one mechanism on an instance file ('-' reads stdin)."""
    cfg = _pop_config(kwargs)
    t0 = time.perf_counter()
    inst, _ = _load_instance(instance)
    mc = MonteCarloConfig(num_samples=mc_samples, seed=seed) if mc_samples is not None else None
    rep = _revenue_report(inst, mechanism, price, reserve, policy_text, mc, cfg)
    out = rep.to_dict()
    if as_json:
        click.echo(json.dumps(out, default=_json_default))
    else:
        arg = out["argument"]
        click.echo(f"mechanism: {rep.mechanism}")
        click.echo(f"revenue: {_fmt(rep.revenue)}")
        click.echo(f"argument: {json.dumps(arg) if isinstance(arg, dict) else arg}")
        click.echo(f"method: {rep.method}")
        click.echo(f"numeric_error: {rep.numeric_error:.3g}")
    _write_record(record, cfg, out, t0, seed=seed)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

GENERATORS = ["spm-ap", "ar-ap-iid", "ar-ap-regular", "opt-ar-2", "opt-ar-3", "opt-ar-4"]


@main.command()
@click.argument("which", type=click.Choice(GENERATORS))
@click.option("--epsilon", type=float, default=0.05, show_default=True)
@click.option("--n", "n", type=int, default=None, help="Buyer count parameter (default 2000; 2 for ar-ap-iid).")
@click.option("--t", "t", type=float, default=1e6, show_default=True, help="Truncation for opt-ar-2.")
@click.option("--v1", type=float, default=None, help="Fix v1 for opt-ar-3 instead of optimizing.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@tolerance_options
@_guard
def gen(which: str, epsilon: float, n, t: float, v1, out: Optional[Path], record: Optional[Path], **kwargs):
    """Emit a lower-bound instance as JSON with a diagnostics block."""
    cfg = _pop_config(kwargs)
    t0 = time.perf_counter()
    diag: dict = {}
    if which == "spm-ap":
        inst, diag = gen_spm_ap_worst(GenParams(epsilon=epsilon, n=n or 2000), cfg)
    elif which == "ar-ap-iid":
        inst = gen_ar_ap_iid(n or 2)
    elif which == "ar-ap-regular":
        inst, diag = gen_ar_ap_regular(GenParams(epsilon=epsilon, n=n or 2000))
    elif which == "opt-ar-2":
        inst = gen_opt_ar_two(t)
        diag = {"t": t}
    elif which == "opt-ar-3":
        inst, diag = gen_opt_ar_three(v1, cfg)
    else:
        inst = gen_opt_ar_four()
    obj = {**inst.to_dict(), "diagnostics": diag}
    text = json.dumps(obj, default=_json_default)
    if out is None:
        click.echo(text)
    else:
        out.write_text(text + "\n")
    _write_record(record, cfg, {"which": which, "buyers": len(inst), "diagnostics": diag}, t0)


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

@main.command()
@click.argument("suite", type=click.Choice(["all", "spm-ap", "ar-ap", "opt-ar", "properties"]),
                default="all")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the property suite.")
@click.option("--json", "as_json", is_flag=True, help="Print rows as JSON lines.")
@tolerance_options
@_guard
def verify(suite: str, seed: int, as_json: bool, record: Optional[Path], **kwargs):
    """Run acceptance checks; exit 4 if any fails."""
    cfg = _pop_config(kwargs)
    t0 = time.perf_counter()
    rows = run_suite(suite, seed, cfg)
    for r in rows:
        if as_json:
            d = r.to_dict()
            d.pop("seconds")
            click.echo(json.dumps(d))
        else:
            click.echo(r.line())
    status = summarize(rows)
    failed = sorted(k for k, ok in status.items() if not ok)
    if not as_json:
        click.echo(f"{sum(r.passed for r in rows)}/{len(rows)} checks passed")
    _write_record(record, cfg, [r.to_dict() for r in rows], t0, seed=seed, suite=suite)
    if failed:
        sys.exit(EXIT_VERIFY)


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------

SPECIAL_FNS = {"R": fun_R, "Q": fun_Q, "V": fun_V, "psi1": psi1, "psi2": psi2, "dilog": dilog}


def parse_range(text: str) -> np.ndarray:
    """'start:stop:step' with stop included when it lands on the grid."""
    try:
        start, stop, step = (float(s) for s in text.split(":"))
    except ValueError as exc:
        raise DomainError(f"range must look like start:stop:step, got {text!r}") from exc
    if not step > 0 or stop < start:
        raise DomainError("range needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _rq_curve(inst: Instance, buyer: int, q: np.ndarray) -> np.ndarray:
    b = inst[buyer]
    if np.any((q < 0) | (q > 1)):
        raise DomainError("quantiles must lie in [0, 1]")
    out = np.empty_like(q)
    pos = q > 0
    out[pos] = np.asarray(b.revenue_quantile(q[pos]))
    # r(0) is the limit q -> 0, which is the mass escaping to infinity.
    out[~pos] = b.tail_mass
    return out


@main.command()
@click.argument("kind", type=click.Choice(["ap", "ar", "d1", "d2", "rq", "special"]))
@click.argument("instance", required=False)
@click.option("--range", "range_", type=str, default=None, help="start:stop:step grid.")
@click.option("--fn", "fn_name", type=click.Choice(sorted(SPECIAL_FNS)), default="Q", show_default=True,
              help="Function for the 'special' curve.")
@click.option("--buyer", type=int, default=0, show_default=True, help="Buyer index for the 'rq' curve.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None)
@tolerance_options
@_guard
def curve(kind: str, instance, range_, fn_name: str, buyer: int, out: Optional[Path], record: Optional[Path],
          **kwargs):
    """Write a curve as CSV with header 'x,value'."""
    cfg = _pop_config(kwargs)
    t0 = time.perf_counter()
    if kind == "special":
        x = parse_range(range_ or "1.01:10:0.01")
        fn = SPECIAL_FNS[fn_name]
        y = np.asarray(fn(x, cfg) if fn_name in ("Q", "dilog") else fn(x), dtype=float)
    else:
        if instance is None:
            raise DomainError(f"curve {kind} needs an instance file")
        inst, _ = _load_instance(instance)
        if kind == "rq":
            if not 0 <= buyer < len(inst):
                raise DomainError(f"buyer index {buyer} out of range")
            x = parse_range(range_ or "0:1:0.01")
            y = _rq_curve(inst, buyer, x)
        else:
            x = parse_range(range_) if range_ else ap_grid(inst)
            if np.any(x < 0):
                raise DomainError("prices must be nonnegative")
            if kind == "ap":
                y = np.asarray(ap_revenue(inst, x), dtype=float)
            elif kind == "ar":
                y = ar_revenue_many(inst, x, cfg)
            elif kind == "d1":
                y = np.asarray(d1(inst, x), dtype=float)
            else:
                y = np.asarray(d2(inst, x), dtype=float)
    lines = ["x,value"] + [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(np.atleast_1d(x), np.atleast_1d(y))]
    text = "\n".join(lines) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text)
    _write_record(record, cfg, {"kind": kind, "points": int(np.size(x))}, t0)


if __name__ == "__main__":  # pragma: no cover
    main()
