"""Euler-Legendre convex potentials on R^n.

Every potential is represented by an immutable :class:`PotentialSpec`.  The
separable families are sums of a scalar convex function applied to each
coordinate; ``norm-integral`` is the radial potential

    Psi(x) = int_0^{||x||} phi(t) dt

for an increasing function ``phi``.  Values off the effective domain are
``+inf`` (never ``-inf``); gradients and Hessians are only defined on the
interior of the domain and raise :class:`DomainError` elsewhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from types import MappingProxyType
from typing import Callable

import numpy as np
from scipy import special
from scipy.interpolate import PchipInterpolator

from .config import BOUNDARY_APPROACH, DEFAULTS
from .errors import DimensionError, DomainError, ValidationError

INF = math.inf

FAMILIES = (
    "neg-entropy",
    "burg",
    "fermi-dirac",
    "gamma-norm",
    "alpha-power",
    "norm-integral",
    "exp",
)

_ALIASES = {
    "negentropy": "neg-entropy",
    "fermidirac": "fermi-dirac",
    "gammanorm": "gamma-norm",
    "alphapower": "alpha-power",
    "normintegral": "norm-integral",
    "exponential": "exp",
    "sumexp": "exp",
}


def canonical_family(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    if key in FAMILIES:
        return key
    key = key.replace("-", "")
    if key in _ALIASES:
        return _ALIASES[key]
    for fam in FAMILIES:
        if fam.replace("-", "") == key:
            return fam
    raise ValidationError(f"unknown potential family {name!r}")


# ---------------------------------------------------------------------------
# increasing functions phi: R+ -> R+


class PhiFunction:
    """Strictly increasing ``phi`` with ``phi(0) = 0`` and ``phi -> inf``.

    Either a power law ``coef * t**exponent`` (exact) or a sampled table
    interpolated by a monotone cubic (PCHIP).  Tables are extended past
    their last knot linearly with the final slope.
    """

    def __init__(self, *, coef=None, exponent=None, table=None):
        if table is not None:
            tab = np.asarray(table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 3:
                raise ValidationError("phi table must be [[t, phi(t)], ...] with >= 3 rows")
            t, v = tab[:, 0], tab[:, 1]
            if t[0] != 0.0 or v[0] != 0.0:
                raise ValidationError("phi table must start at (0, 0)")
            if np.any(np.diff(t) <= 0):
                raise ValidationError("phi table abscissae must be strictly increasing")
            if np.any(np.diff(v) <= 0):
                raise ValidationError("phi table is not strictly increasing")
            self.kind = "table"
            self.table = tab
            self._interp = PchipInterpolator(t, v, extrapolate=False)
            self._dinterp = self._interp.derivative()
            self._anti = self._interp.antiderivative()
            self._tmax = float(t[-1])
            self._vmax = float(v[-1])
            self._slope = float(self._dinterp(self._tmax))
            if not self._slope > 0:
                self._slope = float((v[-1] - v[-2]) / (t[-1] - t[-2]))
        else:
            if coef is None or exponent is None:
                raise ValidationError("phi needs either a table or coef/exponent")
            if not (coef > 0 and exponent > 0):
                raise ValidationError("power phi needs coef > 0 and exponent > 0")
            self.kind = "power"
            self.coef = float(coef)
            self.exponent = float(exponent)

    @classmethod
    def power(cls, coef=1.0, exponent=1.0):
        return cls(coef=coef, exponent=exponent)

    @classmethod
    def from_table(cls, table):
        return cls(table=table)

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, dict):
            if "power" in obj:
                obj = obj["power"]
            return cls(coef=obj.get("coef", 1.0), exponent=obj["exponent"])
        return cls(table=obj)

    def to_json(self):
        if self.kind == "table":
            return self.table.tolist()
        return {"power": {"coef": self.coef, "exponent": self.exponent}}

    def __eq__(self, other):
        return isinstance(other, PhiFunction) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(json.dumps(self.to_json()))

    def __repr__(self):
        if self.kind == "power":
            return f"PhiFunction.power({self.coef}, {self.exponent})"
        return f"PhiFunction.from_table(<{len(self.table)} rows>)"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return self.coef * t**self.exponent
        inner = np.clip(t, 0.0, self._tmax)
        out = np.asarray(self._interp(inner), dtype=float)
        return np.where(t > self._tmax, self._vmax + self._slope * (t - self._tmax), out)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            k = self.exponent
            if k == 1.0:
                return np.full_like(t, self.coef)
            with np.errstate(divide="ignore"):
                return self.coef * k * t ** (k - 1.0)
        inner = np.clip(t, 0.0, self._tmax)
        out = np.asarray(self._dinterp(inner), dtype=float)
        return np.where(t > self._tmax, self._slope, out)

    def integral(self, r: float) -> float:
        """``int_0^r phi(t) dt`` for ``r >= 0``."""
        r = float(r)
        if self.kind == "power":
            k = self.exponent
            return self.coef * r ** (k + 1.0) / (k + 1.0)
        if r <= self._tmax:
            return float(self._anti(r) - self._anti(0.0))
        base = float(self._anti(self._tmax) - self._anti(0.0))
        d = r - self._tmax
        return base + self._vmax * d + 0.5 * self._slope * d * d

    def inverse(self, s: float) -> float:
        s = float(s)
        if s <= 0.0:
            return 0.0
        if self.kind == "power":
            return (s / self.coef) ** (1.0 / self.exponent)
        if s >= self._vmax:
            return self._tmax + (s - self._vmax) / self._slope
        return _monotone_root(lambda t: float(self(t)), lambda t: float(self.deriv(t)),
                              s, 0.0, self._tmax, tol=DEFAULTS.root)


# ---------------------------------------------------------------------------
# scalar root finding


def _monotone_root(g, dg, target, lo, hi, tol=1e-12, max_iter=200):
    """Solve ``g(x) = target`` for increasing ``g`` on the bracket [lo, hi].

    Newton steps, falling back to bisection whenever Newton leaves the
    current bracket.
    """
    a, b = lo, hi
    x = 0.5 * (a + b)
    for _ in range(max_iter):
        gx = g(x) - target
        if gx == 0.0:
            return x
        if gx > 0:
            b = x
        else:
            a = x
        d = dg(x)
        x_new = x - gx / d if (d > 0 and math.isfinite(d)) else 0.5 * (a + b)
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        if abs(x_new - x) <= tol * (1.0 + abs(x)) or b - a <= tol * (1.0 + abs(x)):
            return x_new
        x = x_new
    return x


def _bracket_root(g, dg, target, lo, hi, start, tol):
    """Root of increasing ``g`` on the open interval (lo, hi); None if out of range."""
    a = lo if math.isfinite(lo) else None
    b = hi if math.isfinite(hi) else None
    step = 1.0
    if a is None:
        a = start - step
        while g(a) > target:
            step *= 2.0
            a = start - step
            if step > 1e300:
                return None
    elif g(a + 1e-300) > target:
        return None
    step = 1.0
    if b is None:
        b = max(start, a) + step
        while g(b) < target:
            step *= 2.0
            b = max(start, a) + step
            if step > 1e300:
                return None
    elif g(b - 1e-16 * max(1.0, abs(b))) < target:
        return None
    return _monotone_root(g, dg, target, a, b, tol=tol)


# ---------------------------------------------------------------------------
# family implementations


@dataclass(frozen=True)
class _Scalar:
    """Scalar convex function used coordinatewise."""

    f: Callable
    d1: Callable
    d2: Callable
    d3: Callable
    inv_d1: Callable
    conj: Callable
    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool
    dual_lo: float
    dual_hi: float


def _negentropy():
    def conj(y):
        return np.exp(y)

    return _Scalar(
        f=lambda x: special.xlogy(x, x) - x,
        d1=np.log,
        d2=lambda x: 1.0 / x,
        d3=lambda x: -1.0 / x**2,
        inv_d1=np.exp,
        conj=conj,
        lo=0.0, hi=INF, lo_closed=True, hi_closed=False,
        dual_lo=-INF, dual_hi=INF,
    )


def _burg():
    def conj(y):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(y < 0, -1.0 - np.log(np.where(y < 0, -y, 1.0)), INF)

    return _Scalar(
        f=lambda x: -np.log(x),
        d1=lambda x: -1.0 / x,
        d2=lambda x: 1.0 / x**2,
        d3=lambda x: -2.0 / x**3,
        inv_d1=lambda y: -1.0 / y,
        conj=conj,
        lo=0.0, hi=INF, lo_closed=False, hi_closed=False,
        dual_lo=-INF, dual_hi=0.0,
    )


def _fermi_dirac():
    return _Scalar(
        f=lambda x: special.xlogy(x, x) + special.xlogy(1.0 - x, 1.0 - x),
        d1=special.logit,
        d2=lambda x: 1.0 / x + 1.0 / (1.0 - x),
        d3=lambda x: -1.0 / x**2 + 1.0 / (1.0 - x) ** 2,
        inv_d1=special.expit,
        conj=lambda y: np.logaddexp(0.0, y),
        lo=0.0, hi=1.0, lo_closed=True, hi_closed=True,
        dual_lo=-INF, dual_hi=INF,
    )


def _gamma_norm(gamma):
    p = 1.0 / gamma

    def d2(x):
        with np.errstate(divide="ignore"):
            return (p - 1.0) * np.abs(x) ** (p - 2.0)

    def d3(x):
        if p == 2.0:
            return np.zeros_like(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (p - 1.0) * (p - 2.0) * np.abs(x) ** (p - 3.0) * np.sign(x)
        return np.nan_to_num(out, nan=0.0)

    return _Scalar(
        f=lambda x: gamma * np.abs(x) ** p,
        d1=lambda x: np.sign(x) * np.abs(x) ** (p - 1.0),
        d2=d2,
        d3=d3,
        inv_d1=lambda y: np.sign(y) * np.abs(y) ** (gamma / (1.0 - gamma)),
        conj=lambda y: (1.0 - gamma) * np.abs(y) ** (1.0 / (1.0 - gamma)),
        lo=-INF, hi=INF, lo_closed=False, hi_closed=False,
        dual_lo=-INF, dual_hi=INF,
    )


def _alpha_power(alpha):
    # one formula c*(x**alpha - 1); the sign of c flips for alpha < 0
    sign = 1.0 if alpha > 0 else -1.0
    c = sign / (alpha - 1.0)
    ca = c * alpha  # negative on both branches

    def conj(y):
        y = np.asarray(y, dtype=float)
        out = np.full(y.shape, INF)
        neg = y < 0
        x = (y[neg] / ca) ** (1.0 / (alpha - 1.0))
        out[neg] = x * y[neg] - c * (x**alpha - 1.0)
        if alpha < 0:
            out[y == 0] = c
        return out

    return _Scalar(
        f=lambda x: c * (x**alpha - 1.0),
        d1=lambda x: ca * x ** (alpha - 1.0),
        d2=lambda x: ca * (alpha - 1.0) * x ** (alpha - 2.0),
        d3=lambda x: ca * (alpha - 1.0) * (alpha - 2.0) * x ** (alpha - 3.0),
        inv_d1=lambda y: (y / ca) ** (1.0 / (alpha - 1.0)),
        conj=conj,
        lo=0.0, hi=INF, lo_closed=alpha > 0, hi_closed=False,
        dual_lo=-INF, dual_hi=0.0,
    )


def _exp():
    def conj(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(invalid="ignore"):
            return np.where(y >= 0, special.xlogy(y, y) - y, INF)

    return _Scalar(
        f=np.exp, d1=np.exp, d2=np.exp, d3=np.exp,
        inv_d1=np.log,
        conj=conj,
        lo=-INF, hi=INF, lo_closed=False, hi_closed=False,
        dual_lo=0.0, dual_hi=INF,
    )


# ---------------------------------------------------------------------------


def _freeze(params):
    return MappingProxyType(dict(params))


@dataclass(frozen=True)
class PotentialSpec:
    """A named Euler-Legendre potential on R^dim.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES` (aliases such as ``"NegEntropy"`` accepted).
    params : mapping
        ``gamma`` for gamma-norm, ``alpha`` for alpha-power, ``phi`` (a
        :class:`PhiFunction`) and ``norm`` (``"euclidean"`` or a float
        ``p > 1``) for norm-integral.  Others take no parameters.
    dim : int
    """

    family: str
    params: MappingProxyType = field(default_factory=lambda: _freeze({}))
    dim: int = 1

    def __post_init__(self):
        fam = canonical_family(self.family)
        object.__setattr__(self, "family", fam)
        params = dict(self.params)
        if not (isinstance(self.dim, (int, np.integer)) and self.dim >= 1):
            raise ValidationError("dim must be a positive integer")
        object.__setattr__(self, "dim", int(self.dim))
        if fam == "gamma-norm":
            g = float(params.get("gamma", 0.5))
            if not 0.0 < g < 1.0:
                raise ValidationError("gamma must lie in ]0,1[")
            params = {"gamma": g}
        elif fam == "alpha-power":
            if "alpha" not in params:
                raise ValidationError("alpha-power needs alpha")
            a = float(params["alpha"])
            if not (0.0 < a < 1.0 or a < 0.0):
                raise ValidationError("alpha must lie in ]0,1[ or ]-inf,0[")
            params = {"alpha": a}
        elif fam == "norm-integral":
            phi = params.get("phi")
            if phi is None:
                raise ValidationError("norm-integral needs phi")
            if not isinstance(phi, PhiFunction):
                phi = PhiFunction.from_json(phi)
            norm = params.get("norm", "euclidean")
            if isinstance(norm, dict):
                norm = norm.get("p_norm", norm.get("p"))
            if norm in ("euclidean", 2, 2.0):
                norm = "euclidean"
            else:
                norm = float(norm)
                if not 1.0 < norm < INF:
                    raise ValidationError("p-norm needs p in ]1,inf[")
            params = {"phi": phi, "norm": norm}
        else:
            if params:
                raise ValidationError(f"{fam} takes no parameters")
            params = {}
        object.__setattr__(self, "params", _freeze(params))

    # -- construction helpers ------------------------------------------------

    @classmethod
    def make(cls, family, dim=1, **params):
        return cls(family, _freeze(params), dim)

    def with_dim(self, dim):
        return PotentialSpec(self.family, self.params, dim)

    def __hash__(self):
        return hash(json.dumps(self.to_json(), sort_keys=True))

    def __eq__(self, other):
        return isinstance(other, PotentialSpec) and self.to_json() == other.to_json()

    def to_json(self):
        params = dict(self.params)
        if self.family == "norm-integral":
            norm = params["norm"]
            params = {
                "phi": params["phi"].to_json(),
                "norm": norm if norm == "euclidean" else {"p_norm": norm},
            }
        return {"family": self.family, "params": params, "dim": self.dim}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        unknown = set(obj) - {"family", "params", "dim"}
        if unknown:
            raise ValidationError(f"unknown PotentialSpec fields: {sorted(unknown)}")
        return cls(obj["family"], _freeze(obj.get("params", {})), int(obj.get("dim", 1)))

    # -- internals -------------------------------------------------------------

    @property
    def separable(self) -> bool:
        return self.family != "norm-integral"

    @property
    def _scalar(self) -> _Scalar:
        cached = self.__dict__.get("_scalar_cache")
        if cached is None:
            fam = self.family
            if fam == "neg-entropy":
                cached = _negentropy()
            elif fam == "burg":
                cached = _burg()
            elif fam == "fermi-dirac":
                cached = _fermi_dirac()
            elif fam == "gamma-norm":
                cached = _gamma_norm(self.params["gamma"])
            elif fam == "alpha-power":
                cached = _alpha_power(self.params["alpha"])
            elif fam == "exp":
                cached = _exp()
            else:
                raise AttributeError("norm-integral is not separable")
            object.__setattr__(self, "_scalar_cache", cached)
        return cached

    @property
    def p(self) -> float:
        norm = self.params["norm"]
        return 2.0 if norm == "euclidean" else norm

    @property
    def q(self) -> float:
        p = self.p
        return p / (p - 1.0)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise DimensionError(f"expected vector of length {self.dim}, got shape {x.shape}")
        return x

    # -- domain ------------------------------------------------------------------

    def interior_bounds(self):
        """Open box (lo, hi) equal to int efd."""
        if not self.separable:
            return -INF, INF
        s = self._scalar
        return s.lo, s.hi

    def dual_bounds(self):
        """Open box equal to int efd of the conjugate."""
        if not self.separable:
            return -INF, INF
        s = self._scalar
        return s.dual_lo, s.dual_hi

    def in_domain(self, x) -> bool:
        x = self._check(x)
        if not np.all(np.isfinite(x)):
            return False
        if not self.separable:
            return True
        s = self._scalar
        lo_ok = np.all(x >= s.lo) if s.lo_closed else np.all(x > s.lo)
        hi_ok = np.all(x <= s.hi) if s.hi_closed else np.all(x < s.hi)
        return bool(lo_ok and hi_ok)

    def in_interior(self, x) -> bool:
        x = self._check(x)
        lo, hi = self.interior_bounds()
        return bool(np.all(np.isfinite(x)) and np.all(x > lo) and np.all(x < hi))

    def in_dual_interior(self, y) -> bool:
        y = self._check(y)
        lo, hi = self.dual_bounds()
        return bool(np.all(np.isfinite(y)) and np.all(y > lo) and np.all(y < hi))

    def _require_interior(self, x, what):
        if not self.in_interior(x):
            raise DomainError(f"{what} undefined: point outside int efd of {self.family}")

    # -- norm-integral helpers -------------------------------------------------

    def _norm(self, x, p):
        if p == 2.0:
            return float(np.linalg.norm(x))
        return float(np.sum(np.abs(x) ** p) ** (1.0 / p))

    def _norm_grad(self, x, p, nrm):
        if p == 2.0:
            return x / nrm
        return np.sign(x) * (np.abs(x) / nrm) ** (p - 1.0)

    # -- value / derivatives -----------------------------------------------------

    def value(self, x) -> float:
        x = self._check(x)
        if not self.in_domain(x):
            return INF
        if self.separable:
            return float(np.sum(self._scalar.f(x)))
        phi = self.params["phi"]
        return phi.integral(self._norm(x, self.p))

    def grad(self, x) -> np.ndarray:
        x = self._check(x)
        self._require_interior(x, "gradient")
        if self.separable:
            return np.asarray(self._scalar.d1(x), dtype=float)
        nrm = self._norm(x, self.p)
        if nrm == 0.0:
            return np.zeros(self.dim)
        return float(self.params["phi"](nrm)) * self._norm_grad(x, self.p, nrm)

    def hess(self, x) -> np.ndarray:
        x = self._check(x)
        self._require_interior(x, "Hessian")
        if self.separable:
            return np.diag(np.asarray(self._scalar.d2(x), dtype=float))
        phi = self.params["phi"]
        p = self.p
        nrm = self._norm(x, p)
        if nrm == 0.0:
            if p != 2.0:
                raise DomainError("Hessian of a p-norm potential undefined at the origin")
            return float(phi.deriv(0.0)) * np.eye(self.dim)
        g = self._norm_grad(x, p, nrm)
        if p == 2.0:
            h_norm = (np.eye(self.dim) - np.outer(g, g)) / nrm
        else:
            with np.errstate(divide="ignore"):
                diag = (np.abs(x) / nrm) ** (p - 2.0)
            h_norm = (p - 1.0) / nrm * (np.diag(diag) - np.outer(g, g))
        return float(phi.deriv(nrm)) * np.outer(g, g) + float(phi(nrm)) * h_norm

    def third_diag(self, x) -> np.ndarray:
        """Diagonal of the third-derivative tensor (separable families only)."""
        x = self._check(x)
        self._require_interior(x, "third derivative")
        if not self.separable:
            raise NotImplementedError("norm-integral third derivative is not closed form")
        return np.asarray(self._scalar.d3(x), dtype=float)

    # -- conjugate -----------------------------------------------------------------

    def conjugate(self, y, method: str = "auto") -> float:
        y = self._check(y)
        if method == "numeric":
            return numeric_conjugate(self, y)
        if self.separable:
            return float(np.sum(self._scalar.conj(y)))
        phi = self.params["phi"]
        s = self._norm(y, self.q)
        t = phi.inverse(s)
        return s * t - phi.integral(t)

    def grad_conjugate(self, y) -> np.ndarray:
        y = self._check(y)
        if not self.in_dual_interior(y):
            raise DomainError(f"conjugate gradient undefined: point outside int efd of {self.family}*")
        if self.separable:
            return np.asarray(self._scalar.inv_d1(y), dtype=float)
        q = self.q
        s = self._norm(y, q)
        if s == 0.0:
            return np.zeros(self.dim)
        return self.params["phi"].inverse(s) * self._norm_grad(y, q, s)

    def hess_conjugate(self, y) -> np.ndarray:
        x = self.grad_conjugate(y)
        if self.separable:
            return np.diag(1.0 / np.asarray(self._scalar.d2(x), dtype=float))
        return np.linalg.inv(self.hess(x))

    def sample_interior(self, rng, size=None) -> np.ndarray:
        """Draw well-conditioned points of int efd (used by checks and tests)."""
        shape = (self.dim,) if size is None else (size, self.dim)
        fam = self.family
        if fam in ("neg-entropy", "burg", "alpha-power"):
            return np.exp(rng.uniform(-1.5, 1.5, shape))
        if fam == "fermi-dirac":
            return rng.uniform(0.03, 0.97, shape)
        return rng.uniform(-2.0, 2.0, shape)


# ---------------------------------------------------------------------------
# numeric conjugate (independent of the closed forms)


def _scalar_sup(s: _Scalar, y: float, tol: float) -> float:
    """sup_x (x*y - f(x)) for one coordinate via a monotone root of f' = y."""
    start = 1.0 if s.lo >= 0 and s.hi > 1 else (0.5 if s.hi == 1.0 else 0.0)
    def g(x):
        with np.errstate(all="ignore"):
            return float(s.d1(np.float64(x)))

    def dg(x):
        with np.errstate(all="ignore"):
            return float(s.d2(np.float64(x)))

    x = _bracket_root(g, dg, y, s.lo, s.hi, start, tol)
    if x is not None:
        return x * y - float(s.f(x))
    # y outside the range of f': the supremum is approached at the boundary
    lo_val = g(s.lo + 1e-12) if math.isfinite(s.lo) else g(-1e6)
    if y <= lo_val:
        if not math.isfinite(s.lo):
            return INF
        return s.lo * y - float(s.f(s.lo)) if s.lo_closed else _limit(s, y, s.lo + 1e-300)
    if not math.isfinite(s.hi):
        big = [1e8, 1e12, 1e16]
        with np.errstate(all="ignore"):
            vals = [b * y - float(s.f(np.float64(b))) for b in big]
        if vals[-1] - vals[0] > 1.0:
            return INF
        return vals[-1]
    return s.hi * y - float(s.f(s.hi)) if s.hi_closed else _limit(s, y, s.hi)


def _limit(s, y, x):
    with np.errstate(all="ignore"):
        v = x * y - float(s.f(np.float64(x)))
    return v if math.isfinite(v) else INF


def numeric_conjugate(spec: PotentialSpec, y, tol: float | None = None) -> float:
    """Fenchel conjugate by one-dimensional maximisation.

    Separable families are solved per coordinate with a safeguarded Newton
    iteration on ``f'(x) = y_i``; norm-integral reduces to the radial
    problem ``sup_t (t * ||y||_* - F(t))``.
    """
    tol = DEFAULTS.conjugate if tol is None else tol
    y = spec._check(y)
    if spec.separable:
        s = spec._scalar
        total = 0.0
        for yi in y:
            total += _scalar_sup(s, float(yi), min(tol, 1e-12))
            if total == INF:
                return INF
        return total
    phi = spec.params["phi"]
    r = spec._norm(y, spec.q)
    if r == 0.0:
        return 0.0
    t = _bracket_root(lambda u: float(phi(u)), lambda u: float(phi.deriv(u)) or 1e-300,
                      r, 0.0, INF, 1.0, min(tol, 1e-12))
    return t * r - phi.integral(t)


def numeric_biconjugate(spec: PotentialSpec, x) -> float:
    """Phi**(x) computed as sup_y <x,y> - Phi*(y) with Phi* itself numeric."""
    from scipy.optimize import minimize

    x = spec._check(x)
    y0 = spec.grad(x) if spec.in_interior(x) else np.zeros(spec.dim)

    def neg(y):
        v = numeric_conjugate(spec, y)
        return -(float(x @ y) - v) if math.isfinite(v) else 1e300

    # start off the optimum, but inside the conjugate's domain
    starts = [y0 + 0.05, y0 - 0.05, 0.9 * y0]
    start = next((s for s in starts if spec.in_dual_interior(s)), y0)
    res = minimize(neg, start, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
    return -float(res.fun)


# ---------------------------------------------------------------------------
# module-level operations


def _as_vec(spec, x):
    return spec._check(x)


def eval_potential(spec: PotentialSpec, x) -> float:
    return spec.value(_as_vec(spec, x))


def grad_potential(spec: PotentialSpec, x) -> np.ndarray:
    return spec.grad(_as_vec(spec, x))


def hess_potential(spec: PotentialSpec, x) -> np.ndarray:
    return spec.hess(_as_vec(spec, x))


def fenchel_conjugate(spec: PotentialSpec, y, method: str = "auto") -> float:
    return spec.conjugate(_as_vec(spec, y), method=method)


def grad_conjugate(spec: PotentialSpec, y) -> np.ndarray:
    return spec.grad_conjugate(_as_vec(spec, y))


def build_norm_integral_potential(phi_samples, norm="euclidean", dim=1) -> PotentialSpec:
    """Radial potential ``x -> int_0^{||x||} phi``.

    ``phi_samples`` is a table ``[[t, phi(t)], ...]``, a
    :class:`PhiFunction`, or a ``{"power": {...}}`` mapping.  ``norm`` is
    ``"euclidean"`` or ``("p_norm", p)`` / a float ``p``.
    """
    if isinstance(norm, tuple):
        norm = norm[1]
    phi = phi_samples if isinstance(phi_samples, PhiFunction) else PhiFunction.from_json(phi_samples)
    return PotentialSpec.make("norm-integral", dim=dim, phi=phi, norm=norm)


@dataclass
class LegendreReport:
    family: str
    n_samples: int
    roundtrip_residual: float
    boundary_tested: bool
    boundary_min_slope: float
    boundary_divergent: bool
    boundaries: list
    passed: bool

    def to_json(self):
        return dict(self.__dict__)

    @classmethod
    def from_json(cls, obj):
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise ValidationError(f"unknown LegendreReport fields: {sorted(unknown)}")
        return cls(**{k: obj[k] for k in names})


def _boundary_slopes(spec, x, i, b_i, schedule):
    """Directional derivatives <grad Phi(b + t(x-b)), x-b> for t in schedule."""
    b = x.copy()
    b[i] = b_i
    d = x - b
    return [float(spec.grad(b + t * d) @ d) for t in schedule]


def check_euler_legendre(spec: PotentialSpec, n_samples: int = 100, seed: int = 0,
                         threshold: float | None = None, tol: float = 1e-10,
                         schedule=BOUNDARY_APPROACH) -> LegendreReport:
    """Numerical evidence that ``spec`` is Euler-Legendre.

    Round trip: ``grad_conjugate(grad(x)) == x`` on random interior points.
    Boundary: walking from a boundary point of efd toward an interior
    point, the directional derivative must run off to ``-inf``.  That is
    accepted if it falls below ``threshold`` or if its decrement per
    decade of the approach schedule does not decay (logarithmic blow-up
    like ``log t`` never reaches ``-1e6`` in double precision).
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    threshold = DEFAULTS.boundary_slope if threshold is None else threshold
    lo, hi = spec.interior_bounds()
    if not lo < hi:
        raise DomainError("empty interior")
    rng = np.random.default_rng(seed)
    xs = spec.sample_interior(rng, n_samples)
    resid = 0.0
    for x in xs:
        back = spec.grad_conjugate(spec.grad(x))
        resid = max(resid, float(np.linalg.norm(back - x) / (1.0 + np.linalg.norm(x))))

    sides = []
    if math.isfinite(lo):
        sides.append(lo)
    if math.isfinite(hi):
        sides.append(hi)
    min_slope = -INF if not sides else INF
    divergent = True
    for b_i in sides:
        for x in xs[: min(n_samples, 20)]:
            i = int(rng.integers(spec.dim))
            slopes = _boundary_slopes(spec, x, i, b_i, schedule)
            min_slope = min(min_slope, slopes[-1])
            steps = np.diff(slopes)
            monotone = bool(np.all(steps < 0))
            reached = slopes[-1] <= threshold
            sustained = monotone and steps[-1] <= 0.5 * steps[0]
            if not (reached or sustained):
                divergent = False
    passed = resid <= tol and divergent
    return LegendreReport(spec.family, n_samples, resid, bool(sides), float(min_slope),
                          divergent, [float(b) for b in sides], bool(passed))
