"""Parametric value distributions and the ``Instance`` container.

Four families are supported:

* ``Triangular(v, q)``: CDF (1-q)p / ((1-q)p + vq) below v and an atom of
  mass q at v. ``q = 1`` is a deterministic value v.
* ``TriangularLimit()``: the limit Tri(inf) with CDF p / (p + 1).
* ``EqualRevenueTruncated(t)``: CDF 1 - 1/p on [1, t) and an atom 1/t at t.
* ``RootIrregular(n)``: CDF (1 - 1/p)^(1/n) on (1, inf); irregular for n >= 2.

Acceptance convention: a buyer with value equal to the price buys, so
``survival(p) = Pr(value >= p)`` is one minus the left limit of the CDF.

Every per-distribution method accepts floats or numpy arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

from mechgap.errors import DomainError, NotTriangularError


def _wrap(out):
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _prices(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(~(p >= 0)):
        raise DomainError("prices must be nonnegative")
    return p


class _Family:
    """Shared helpers; subclasses supply the closed forms."""

    # Accurate 1 - F(p) (right tail). Survival is the same with the left limit.
    def tail(self, p):  # pragma: no cover - abstract
        raise NotImplementedError

    def survival(self, p):  # pragma: no cover - abstract
        raise NotImplementedError

    def cdf(self, p):
        return _wrap(1.0 - np.asarray(self.tail(p)))

    def cdf_left(self, p):
        return _wrap(1.0 - np.asarray(self.survival(p)))

    @property
    def atoms(self) -> tuple[float, ...]:
        return ()

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Finite points where the CDF jumps or loses smoothness."""
        return self.atoms

    @property
    def support_max(self) -> float:
        return math.inf

    @property
    def tail_mass(self) -> float:
        """lim p * (1 - F(p)) as p -> inf."""
        return 0.0


@dataclass(frozen=True)
class Triangular(_Family):
    """Tri(v, q): monopoly price v, monopoly quantile q."""

    v: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "q", float(self.q))
        if not (0.0 < self.v < math.inf):
            raise DomainError(f"triangular v must be positive and finite, got {self.v!r}")
        if not (0.0 < self.q <= 1.0):
            raise DomainError(f"triangular q must lie in (0, 1], got {self.q!r}")

    def _below(self, p):
        v, q = self.v, self.q
        return v * q / ((1.0 - q) * p + v * q)

    def tail(self, p):
        p = _prices(p)
        return _wrap(np.where(p < self.v, self._below(p), 0.0))

    def survival(self, p):
        p = _prices(p)
        # Exactly q at the atom, so Tri(v, survival(v)) round-trips.
        below = self._below(np.minimum(p, self.v))
        return _wrap(np.where(p < self.v, below, np.where(p == self.v, self.q, 0.0)))

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        v, q = self.v, self.q
        if q == 1.0:
            return _wrap(np.full_like(u, v))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inner = u * v * q / ((1.0 - q) * (1.0 - u))
        return _wrap(np.where(u <= 1.0 - q, inner, v))

    def revenue_quantile(self, x):
        x = np.asarray(x, dtype=float)
        v, q = self.v, self.q
        if q == 1.0:
            return _wrap(x * v)
        return _wrap(np.where(x <= q, x * v, v * q * (1.0 - x) / (1.0 - q)))

    def virtual_value(self, p):
        p = np.asarray(p, dtype=float)
        v, q = self.v, self.q
        at_atom = p == v
        below = (p >= 0) & (p < v)
        if q == 1.0:
            below = np.zeros_like(at_atom)
        if not np.all(at_atom | below):
            raise DomainError("price outside the support of the triangular distribution")
        neg = -v * q / (1.0 - q) if q < 1.0 else 0.0
        return _wrap(np.where(at_atom, v, neg))

    @property
    def atoms(self):
        return (self.v,)

    @property
    def support_max(self):
        return self.v

    @property
    def monopoly_revenue(self) -> float:
        return self.v * self.q


@dataclass(frozen=True)
class TriangularLimit(_Family):
    """Tri(inf): CDF p / (p + 1). Every price earns p/(p+1) < 1."""

    def tail(self, p):
        p = _prices(p)
        return _wrap(1.0 / (p + 1.0))

    survival = tail

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        return _wrap(u / (1.0 - u))

    def revenue_quantile(self, x):
        return _wrap(1.0 - np.asarray(x, dtype=float))

    def virtual_value(self, p):
        p = _prices(p)
        return _wrap(np.full_like(p, -1.0))

    @property
    def v(self) -> float:
        return math.inf

    @property
    def tail_mass(self):
        return 1.0

    @property
    def monopoly_revenue(self) -> float:
        return 1.0


@dataclass(frozen=True)
class EqualRevenueTruncated(_Family):
    """Equal-revenue distribution on [1, t) with the remaining mass 1/t at t."""

    t: float = 1e6

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        if not (1.0 < self.t < math.inf):
            raise DomainError(f"truncation point must be finite and > 1, got {self.t!r}")

    def tail(self, p):
        p = _prices(p)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(p < 1.0, 1.0, np.where(p < self.t, 1.0 / p, 0.0))
        return _wrap(out)

    def survival(self, p):
        p = _prices(p)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(p <= 1.0, 1.0, np.where(p <= self.t, 1.0 / p, 0.0))
        return _wrap(out)

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(u <= 1.0 - 1.0 / self.t, 1.0 / (1.0 - u), self.t)
        return _wrap(out)

    def revenue_quantile(self, x):
        x = np.asarray(x, dtype=float)
        return _wrap(np.where(x >= 1.0 / self.t, 1.0, x * self.t))

    def virtual_value(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p < 1.0) | (p > self.t)):
            raise DomainError("price outside [1, t]")
        return _wrap(np.where(p == self.t, self.t, 0.0))

    @property
    def atoms(self):
        return (self.t,)

    @property
    def breakpoints(self):
        return (1.0, self.t)

    @property
    def support_max(self):
        return self.t


@dataclass(frozen=True)
class RootIrregular(_Family):
    """F_n(p) = (1 - 1/p)^(1/n) on (1, inf): the n-th root of the equal-revenue CDF."""

    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    def tail(self, p):
        p = _prices(p)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            inner = -np.expm1(np.log1p(-1.0 / p) / self.n)
        return _wrap(np.where(p > 1.0, inner, 1.0))

    survival = tail

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return _wrap(-1.0 / np.expm1(self.n * np.log(u)))

    def revenue_quantile(self, x):
        x = np.asarray(x, dtype=float)
        return _wrap(x / -np.expm1(self.n * np.log1p(-x)))

    def virtual_value(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(p < 1.0):
            raise DomainError("price outside (1, inf)")
        n = self.n
        w = 1.0 - 1.0 / p
        if n == 1:
            return _wrap(np.zeros_like(p))
        # phi = p - n p^2 (1 - w^{1/n}) w^{1 - 1/n}
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = p - n * p * p * -np.expm1(np.log(w) / n) * w ** (1.0 - 1.0 / n)
        return _wrap(np.where(p == 1.0, 1.0, out))

    @property
    def breakpoints(self):
        return (1.0,)

    @property
    def tail_mass(self):
        return 1.0 / self.n


DistributionSpec = Union[Triangular, TriangularLimit, EqualRevenueTruncated, RootIrregular]
TRIANGULAR_TYPES = (Triangular, TriangularLimit)


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def cdf(d: DistributionSpec, p):
    """Right-continuous CDF Pr(value <= p)."""
    return d.cdf(p)


def cdf_left(d: DistributionSpec, p):
    """Left limit of the CDF, Pr(value < p)."""
    return d.cdf_left(p)


def survival(d: DistributionSpec, p):
    """Pr(value >= p), atom mass included."""
    return d.survival(p)


def quantile_sample(d: DistributionSpec, u):
    """Generalized inverse inf{p : cdf(p) >= u} for u in [0, 1)."""
    ua = np.asarray(u, dtype=float)
    if np.any((ua < 0) | (ua >= 1)):
        raise DomainError("u must lie in [0, 1)")
    return d.quantile(u)


def revenue_quantile(d: DistributionSpec, q):
    """r(q) = q * F^-1(1 - q) for q in (0, 1]."""
    qa = np.asarray(q, dtype=float)
    if np.any((qa <= 0) | (qa > 1)):
        raise DomainError("quantile must lie in (0, 1]")
    return d.revenue_quantile(q)


def virtual_value(d: DistributionSpec, p):
    """Myerson virtual value; atoms map to their own location."""
    return d.virtual_value(p)


def is_regular_numeric(d: DistributionSpec, grid_size: int = 101, tol: float = 1e-9) -> bool:
    """Midpoint-concavity test of the revenue-quantile curve on an interior grid.

    Checks r((a+b)/2) >= (r(a)+r(b))/2 - tol for every pair of grid points
    strictly inside (0, 1).
    """
    if grid_size < 3:
        raise DomainError("grid_size must be at least 3")
    x = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    r = np.asarray(d.revenue_quantile(x))
    a, b = np.triu_indices(grid_size, k=1)
    mid = np.asarray(d.revenue_quantile(0.5 * (x[a] + x[b])))
    return bool(np.all(mid >= 0.5 * (r[a] + r[b]) - tol))


# ---------------------------------------------------------------------------
# Instances and JSON
# ---------------------------------------------------------------------------

def spec_to_dict(d: DistributionSpec) -> dict:
    if isinstance(d, Triangular):
        return {"type": "triangular", "v": d.v, "q": d.q}
    if isinstance(d, TriangularLimit):
        return {"type": "tri_inf"}
    if isinstance(d, EqualRevenueTruncated):
        return {"type": "equal_revenue", "t": d.t}
    if isinstance(d, RootIrregular):
        return {"type": "root_irregular", "n": d.n}
    raise TypeError(f"unknown distribution {d!r}")


def spec_from_dict(obj: dict) -> DistributionSpec:
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError(f"buyer entry must be an object with a 'type' key: {obj!r}")
    kind = obj["type"]
    try:
        if kind == "triangular":
            return Triangular(obj["v"], obj["q"])
        if kind == "tri_inf":
            return TriangularLimit()
        if kind == "equal_revenue":
            return EqualRevenueTruncated(obj.get("t", 1e6))
        if kind == "root_irregular":
            return RootIrregular(obj["n"])
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed buyer entry {obj!r}") from exc
    raise DomainError(f"unknown buyer type {kind!r}")


@dataclass(frozen=True)
class Instance:
    """An ordered, nonempty tuple of independent buyers."""

    buyers: tuple

    def __post_init__(self):
        buyers = tuple(self.buyers)
        if not buyers:
            raise DomainError("an instance needs at least one buyer")
        for b in buyers:
            if not isinstance(b, _Family):
                raise DomainError(f"not a distribution: {b!r}")
        object.__setattr__(self, "buyers", buyers)

    @classmethod
    def of(cls, *buyers: DistributionSpec) -> "Instance":
        return cls(tuple(buyers))

    def __len__(self) -> int:
        return len(self.buyers)

    def __iter__(self) -> Iterator[DistributionSpec]:
        return iter(self.buyers)

    def __getitem__(self, i):
        return self.buyers[i]

    @property
    def is_triangular(self) -> bool:
        return all(isinstance(b, TRIANGULAR_TYPES) for b in self.buyers)

    def triangular_view(self) -> "Instance":
        """Buyers sorted by monopoly price descending, Tri(inf) first (stable)."""
        if not self.is_triangular:
            raise NotTriangularError("instance contains non-triangular buyers")
        return Instance(tuple(sorted(self.buyers, key=lambda b: -b.v)))

    def finite_triangular(self) -> list[Triangular]:
        return [b for b in self.triangular_view() if isinstance(b, Triangular)]

    def to_dict(self) -> dict:
        return {"buyers": [spec_to_dict(b) for b in self.buyers]}

    @classmethod
    def from_dict(cls, obj: dict) -> "Instance":
        if not isinstance(obj, dict) or not isinstance(obj.get("buyers"), list):
            raise DomainError("instance JSON must be an object with a 'buyers' list")
        return cls(tuple(spec_from_dict(b) for b in obj["buyers"]))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)


def make_instance(buyers: Iterable[DistributionSpec]) -> Instance:
    return Instance(tuple(buyers))
