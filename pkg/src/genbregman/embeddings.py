"""Generalized pythagorean geometries ``(Z, ell, Psi)``.

A bijection ``ell`` carries a set ``Z`` into a space with an Euler-Legendre
potential ``Psi``; the induced information is the pulled-back Bregman
divergence ``D(phi, psi) = D_Psi(ell(phi), ell(psi))``.  Three embeddings are
provided:

* ``mazur``: ``phi -> phi**gamma`` on nonnegative vectors or PSD matrices,
  paired with ``Psi = (beta/alpha) ||.||_{1/gamma}^{1/beta}``;
* ``spin-factor``: the slice ``(1, x) -> x`` of a spin factor ``R + X``,
  paired with a radial ``Psi_phi``;
* ``orlicz``: ``omega -> phi^{-1}(omega)`` on normalized weighted vectors,
  paired with the ``1/beta`` power of the Luxemburg norm.

Closed forms for each pairing live next to the generic pull-back so the two
can be compared.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .bregman import ConstraintSet, bregman_div, project
from .config import DEFAULTS
from .errors import DomainError, ValidationError
from .potentials import PhiFunction, PotentialSpec, _bracket_root
from .spectral import (HermitianMatrix, apply_eig, as_hermitian, eigen_nonincreasing,
                       matrix_div_generic)

INF = math.inf
_THR = 1e-12


def _check_params(alpha, beta, gamma):
    if not alpha > 0:
        raise ValidationError("alpha must be > 0")
    if not 0 < beta < 1:
        raise ValidationError("beta must lie in ]0,1[")
    if not 0 < gamma < 1:
        raise ValidationError("gamma must lie in ]0,1[")


def _carrier(obj):
    """('vector', array) or ('matrix', HermitianMatrix)."""
    if isinstance(obj, HermitianMatrix):
        return "matrix", obj
    arr = np.asarray(obj)
    if arr.ndim == 2:
        return "matrix", HermitianMatrix(arr)
    return "vector", np.atleast_1d(arr.astype(float))


# ---------------------------------------------------------------------------
# Mazur map


def _spectral_power(X: HermitianMatrix, power: float, what="argument"):
    eig = eigen_nonincreasing(X)
    lam = eig.eigenvalues
    if lam[-1] < -_THR * max(1.0, abs(lam[0])):
        raise DomainError(f"{what} is not positive semidefinite")
    return apply_eig(eig, np.clip(lam, 0.0, None) ** power)


def mazur_forward(gamma: float, phi):
    """``phi**gamma``, elementwise for vectors and spectral for matrices."""
    if not 0 < gamma < 1:
        raise ValidationError("gamma must lie in ]0,1[")
    kind, val = _carrier(phi)
    if kind == "matrix":
        return _spectral_power(val, gamma)
    if np.any(val < -_THR):
        raise DomainError("Mazur map needs a nonnegative argument")
    return np.clip(val, 0.0, None) ** gamma


def mazur_inverse(gamma: float, u):
    kind, val = _carrier(u)
    if kind == "matrix":
        return _spectral_power(val, 1.0 / gamma)
    if np.any(val < -_THR):
        raise DomainError("inverse Mazur map needs a nonnegative argument")
    return np.clip(val, 0.0, None) ** (1.0 / gamma)


def _trace_norm_and_cross(gamma, phi, psi):
    kp, vp = _carrier(phi)
    kq, vq = _carrier(psi)
    if kp != kq:
        raise ValidationError("both arguments must share a carrier")
    if kp == "vector":
        if vp.shape != vq.shape:
            raise ValidationError("argument shapes differ")
        if np.any(vp < -_THR) or np.any(vq < -_THR):
            raise DomainError("arguments must be nonnegative")
        a, b = np.clip(vp, 0, None), np.clip(vq, 0, None)
        return float(a.sum()), float(b.sum()), float(np.sum(a**gamma * b ** (1.0 - gamma)))
    if vp.n != vq.n:
        raise ValidationError("argument shapes differ")
    pg = _spectral_power(vp, gamma)
    qg = _spectral_power(vq, 1.0 - gamma)
    na = float(np.sum(np.clip(eigen_nonincreasing(vp).eigenvalues, 0, None)))
    nb = float(np.sum(np.clip(eigen_nonincreasing(vq).eigenvalues, 0, None)))
    return na, nb, float(np.real(np.trace(pg @ qg)))


def _mazur_closed(alpha, beta, gamma, na, nb, cross):
    if not nb > 0:
        raise DomainError("second argument must be nonzero")
    e = gamma / beta
    return (beta * na**e + (1.0 - beta) * nb**e - nb ** (e - 1.0) * cross) / alpha


def d_mazur(alpha, beta, gamma, phi, psi) -> float:
    """Closed form of the Mazur-map divergence (vector or matrix carrier)."""
    _check_params(alpha, beta, gamma)
    na, nb, cross = _trace_norm_and_cross(gamma, phi, psi)
    return _mazur_closed(alpha, beta, gamma, na, nb, cross)


def jordan_product(a, b):
    return 0.5 * (a @ b + b @ a)


def d_jordan(alpha, beta, gamma, omega, phi) -> float:
    """Jordan-algebra form on real symmetric matrices, trace ``tau = tr``."""
    _check_params(alpha, beta, gamma)
    W, F = as_hermitian(omega), as_hermitian(phi)
    if not (W.is_real and F.is_real):
        raise ValidationError("Jordan form is defined here for real symmetric matrices")
    wg = _spectral_power(W, gamma)
    fg = _spectral_power(F, 1.0 - gamma)
    tw = float(np.trace(W.data))
    tf = float(np.trace(F.data))
    cross = float(np.trace(jordan_product(wg, fg)))
    return _mazur_closed(alpha, beta, gamma, tw, tf, cross)


# ---------------------------------------------------------------------------
# Orlicz functions and the discrete Kaczmarz map


class OrliczFunction:
    """Even, strictly convex ``phi`` with ``phi(1) = 1``, given on [0, inf).

    ``phi`` is a :class:`PhiFunction` (power ``|u|**k`` or a table).  The
    growth conditions are checked on a sample grid, which is the most a
    finite description allows.
    """

    def __init__(self, phi: PhiFunction, grid=None):
        self.phi = phi
        self._validate(grid)

    @classmethod
    def power(cls, exponent: float):
        return cls(PhiFunction.power(1.0, exponent))

    @classmethod
    def from_json(cls, obj):
        return cls(PhiFunction.from_json(obj))

    def to_json(self):
        return self.phi.to_json()

    def _validate(self, grid):
        phi = self.phi
        if grid is None:
            top = phi._tmax if phi.kind == "table" else 1e3
            grid = np.geomspace(1e-4, top, 400)
        u = np.asarray(grid, dtype=float)
        v = phi(u)
        dv = phi.deriv(u)
        if abs(float(phi(1.0)) - 1.0) > 1e-10:
            raise ValidationError("Orlicz function must satisfy phi(1) = 1")
        if np.any(v <= 0) or float(phi(0.0)) != 0.0:
            raise ValidationError("Orlicz function must vanish only at 0")
        if np.any(np.diff(dv) <= 0):
            raise ValidationError("Orlicz function is not strictly convex on the grid")
        big = u[(u >= 1.0) & (2 * u <= u[-1])]
        if big.size:
            ratio = phi(2 * big) / phi(big)
            if not np.max(ratio) < 1e6:
                raise ValidationError("Delta_2 condition fails on the grid")
            if not np.min(ratio) > 2.0:
                raise ValidationError("lower growth condition phi(2u)/phi(u) > 2 fails")
        # phi(u)/u -> 0 at 0 and -> inf at inf: on a finite grid the most we can
        # ask is that the ratio increases and spans a wide range
        ratio = v / u
        if np.any(np.diff(ratio) <= 0):
            raise ValidationError("phi(u)/u is not increasing on the grid")
        if not (ratio[0] < 0.5 and ratio[-1] > 2.0):
            raise ValidationError("phi(u)/u does not span ]0, inf[ on the grid")
        # elasticity of phi^{-1} must stay in a compact subset of ]0, inf[
        elast = v / (u * dv)
        if not (np.min(elast) > 0 and np.max(elast) < 1.0):
            raise ValidationError("phi^{-1} elasticity bounds fail")

    def __call__(self, u):
        return self.phi(np.abs(u))

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        return np.sign(u) * self.phi.deriv(np.abs(u))

    def inverse(self, w):
        """phi^{-1} on [0, inf), elementwise."""
        w = np.atleast_1d(np.asarray(w, dtype=float))
        if self.phi.kind == "power":
            return (np.clip(w, 0.0, None) / self.phi.coef) ** (1.0 / self.phi.exponent)
        return np.array([self.phi.inverse(max(float(x), 0.0)) for x in w])


def _orlicz_bar(orl: OrliczFunction, mu, omega, rho):
    a = orl.inverse(omega)
    b = orl.inverse(rho)
    return float(np.sum(mu * a * orl.deriv(b)))


def _check_normalized(mu, w, name):
    if np.any(w < -_THR):
        raise DomainError(f"{name} must be nonnegative")
    if abs(float(mu @ w) - 1.0) > 1e-10:
        raise DomainError(f"{name} is not normalized: sum(mu*{name}) = {float(mu @ w)!r}")


def d_orlicz_discrete(orlicz, beta, mu, omega, rho) -> float:
    """``(1 - phibar(omega, rho) / phibar(rho, rho)) / beta`` on a weighted finite space."""
    if not isinstance(orlicz, OrliczFunction):
        orlicz = OrliczFunction.from_json(orlicz)
    if not 0 < beta < 1:
        raise ValidationError("beta must lie in ]0,1[")
    mu = np.asarray(mu, dtype=float)
    omega = np.asarray(omega, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(mu <= 0):
        raise ValidationError("weights must be positive")
    _check_normalized(mu, omega, "omega")
    _check_normalized(mu, rho, "rho")
    return (1.0 - _orlicz_bar(orlicz, mu, omega, rho) / _orlicz_bar(orlicz, mu, rho, rho)) / beta


@dataclass(frozen=True, eq=False)
class LuxemburgPowerPotential:
    """``Psi(u) = ||u||_phi^{1/beta}`` with the Luxemburg norm on a weighted finite space."""

    orlicz: OrliczFunction
    mu: np.ndarray
    beta: float

    @property
    def dim(self):
        return len(self.mu)

    def norm(self, u) -> float:
        a = np.abs(np.asarray(u, dtype=float))
        if not np.any(a > 0):
            return 0.0
        mu, phi = self.mu, self.orlicz.phi
        g = lambda s: float(np.sum(mu * phi(a * s)))
        dg = lambda s: float(np.sum(mu * a * phi.deriv(a * s)))
        s = _bracket_root(g, dg, 1.0, 0.0, INF, 1.0 / float(np.max(a)), DEFAULTS.root)
        return 1.0 / s

    def in_domain(self, u) -> bool:
        return bool(np.all(np.isfinite(u)))

    in_interior = in_domain

    def value(self, u) -> float:
        return self.norm(u) ** (1.0 / self.beta)

    def grad(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        N = self.norm(u)
        if N == 0.0:
            return np.zeros_like(u)
        w = self.mu * self.orlicz.deriv(u / N)
        grad_norm = w / float(np.sum(w * u / N))
        return (1.0 / self.beta) * N ** (1.0 / self.beta - 1.0) * grad_norm

    def to_json(self):
        return {"kind": "luxemburg-power", "beta": self.beta,
                "phi": self.orlicz.to_json(), "mu": self.mu.tolist()}


# ---------------------------------------------------------------------------
# spin factors


@dataclass(frozen=True)
class SpinFactorElement:
    lam: float
    x: tuple

    @classmethod
    def of(cls, lam, x):
        return cls(float(lam), tuple(float(v) for v in np.atleast_1d(x)))

    @property
    def vec(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)

    def to_json(self):
        return {"lambda": self.lam, "x": list(self.x)}

    @classmethod
    def from_json(cls, obj):
        return cls.of(obj["lambda"], obj["x"])


def _vec_norm(x, norm):
    p = 2.0 if norm == "euclidean" else float(norm)
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def spin_positive(v: SpinFactorElement, norm="euclidean") -> bool:
    return v.lam >= _vec_norm(v.vec, norm)


def spin_norm(v: SpinFactorElement, norm="euclidean") -> float:
    return max(abs(v.lam), _vec_norm(v.vec, norm))


def _slice_point(v, norm):
    if not isinstance(v, SpinFactorElement):
        v = SpinFactorElement.of(v[0], v[1])
    if abs(v.lam - 1.0) > _THR:
        raise DomainError("spin-factor state must have lambda = 1")
    if _vec_norm(v.vec, norm) > 1.0 + _THR:
        raise DomainError("spin-factor state must satisfy ||x|| <= 1")
    return v.vec


def spin_factor_div(potential: PotentialSpec, v, w) -> float:
    """Bregman divergence of a radial potential between the slice points of v and w."""
    if potential.family != "norm-integral":
        raise ValidationError("spin-factor geometry pairs with a norm-integral potential")
    norm = potential.params["norm"]
    return bregman_div(potential, _slice_point(v, norm), _slice_point(w, norm))


# ---------------------------------------------------------------------------
# embeddings and geometries


@dataclass(frozen=True, eq=False)
class EmbeddingSpec:
    """A bijection ``ell: Z -> ell(Z)``.

    ``kind`` is ``"mazur"`` (``gamma``, ``carrier``), ``"spin-factor"``
    (``norm``) or ``"orlicz"`` (``orlicz``, ``mu``).
    """

    kind: str
    gamma: float | None = None
    carrier: str = "vector"
    norm: object = "euclidean"
    orlicz: OrliczFunction | None = None
    mu: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "mazur":
            if self.gamma is None or not 0 < self.gamma < 1:
                raise ValidationError("Mazur embedding needs gamma in ]0,1[")
            if self.carrier not in ("vector", "matrix"):
                raise ValidationError("carrier must be 'vector' or 'matrix'")
        elif self.kind == "orlicz":
            if self.orlicz is None or self.mu is None:
                raise ValidationError("Orlicz embedding needs orlicz and mu")
            mu = np.asarray(self.mu, dtype=float)
            if np.any(mu <= 0):
                raise ValidationError("weights must be positive")
            object.__setattr__(self, "mu", mu)
        elif self.kind != "spin-factor":
            raise ValidationError(f"unknown embedding kind {self.kind!r}")

    def forward(self, z):
        if self.kind == "mazur":
            return mazur_forward(self.gamma, z)
        if self.kind == "spin-factor":
            return _slice_point(z, self.norm)
        z = np.asarray(z, dtype=float)
        _check_normalized(self.mu, z, "omega")
        return self.orlicz.inverse(z)

    def inverse(self, u):
        if self.kind == "mazur":
            return mazur_inverse(self.gamma, u)
        if self.kind == "spin-factor":
            u = np.asarray(u, dtype=float)
            if _vec_norm(u, self.norm) > 1.0 + _THR:
                raise DomainError("point lies outside the unit ball ell(Z)")
            return SpinFactorElement.of(1.0, u)
        return self.orlicz(np.asarray(u, dtype=float))

    def in_Z(self, z) -> bool:
        try:
            self.forward(z)
        except (DomainError, ValidationError):
            return False
        return True

    def roundtrip_residual(self, samples) -> float:
        worst = 0.0
        for z in samples:
            back = self.inverse(self.forward(z))
            if self.kind == "spin-factor":
                a = np.append(back.lam, back.vec)
                zz = z if isinstance(z, SpinFactorElement) else SpinFactorElement.of(*z)
                b = np.append(zz.lam, zz.vec)
            else:
                a = np.asarray(back)
                b = np.asarray(z.data if isinstance(z, HermitianMatrix) else z)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    def to_json(self):
        if self.kind == "mazur":
            return {"kind": "mazur", "gamma": self.gamma, "carrier": self.carrier}
        if self.kind == "spin-factor":
            return {"kind": "spin-factor",
                    "norm": self.norm if self.norm == "euclidean" else {"p_norm": self.norm}}
        return {"kind": "orlicz", "phi": self.orlicz.to_json(), "mu": self.mu.tolist()}

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        if kind == "mazur":
            return cls("mazur", gamma=float(obj["gamma"]), carrier=obj.get("carrier", "vector"))
        if kind == "spin-factor":
            norm = obj.get("norm", "euclidean")
            if isinstance(norm, dict):
                norm = float(norm["p_norm"])
            return cls("spin-factor", norm=norm)
        if kind == "orlicz":
            return cls("orlicz", orlicz=OrliczFunction.from_json(obj["phi"]), mu=obj["mu"])
        raise ValidationError(f"unknown embedding kind {kind!r}")


def mazur_potential(alpha, beta, gamma, dim) -> PotentialSpec:
    """``(beta/alpha) ||u||_{1/gamma}^{1/beta}`` as a radial potential."""
    _check_params(alpha, beta, gamma)
    phi = PhiFunction.power(1.0 / alpha, 1.0 / beta - 1.0)
    return PotentialSpec.make("norm-integral", dim, phi=phi, norm=1.0 / gamma)


@dataclass(frozen=True, eq=False)
class GeneralizedGeometry:
    embedding: EmbeddingSpec
    potential: object  # PotentialSpec or LuxemburgPowerPotential

    def __post_init__(self):
        emb, pot = self.embedding, self.potential
        if emb.kind == "mazur":
            if not (isinstance(pot, PotentialSpec) and pot.family == "norm-integral"
                    and pot.params["phi"].kind == "power"
                    and abs(pot.p - 1.0 / emb.gamma) < 1e-12):
                raise ValidationError("Mazur embedding pairs with (beta/alpha)||.||_{1/gamma}^{1/beta}")
        elif emb.kind == "spin-factor":
            if not (isinstance(pot, PotentialSpec) and pot.family == "norm-integral"
                    and pot.params["norm"] == emb.norm):
                raise ValidationError("spin-factor slice pairs with a radial potential on the same norm")
        elif not isinstance(pot, LuxemburgPowerPotential) or len(pot.mu) != len(emb.mu) \
                or not np.allclose(pot.mu, emb.mu):
            raise ValidationError("Orlicz embedding pairs with a Luxemburg-norm power on the same weights")

    # -- named pairings -------------------------------------------------------------

    @classmethod
    def mazur(cls, alpha, beta, gamma, dim, carrier="vector"):
        return cls(EmbeddingSpec("mazur", gamma=gamma, carrier=carrier),
                   mazur_potential(alpha, beta, gamma, dim))

    @classmethod
    def alpha_divergence_preset(cls, gamma, dim, carrier="vector"):
        """Mazur pairing with ``alpha = gamma(1 - gamma)`` and ``beta = gamma``."""
        return cls.mazur(gamma * (1.0 - gamma), gamma, gamma, dim, carrier)

    @classmethod
    def spin_factor(cls, phi, dim, norm="euclidean"):
        if not isinstance(phi, PhiFunction):
            phi = PhiFunction.from_json(phi)
        pot = PotentialSpec.make("norm-integral", dim, phi=phi, norm=norm)
        return cls(EmbeddingSpec("spin-factor", norm=pot.params["norm"]), pot)

    @classmethod
    def orlicz(cls, orlicz, beta, mu):
        if not isinstance(orlicz, OrliczFunction):
            orlicz = OrliczFunction.from_json(orlicz)
        mu = np.asarray(mu, dtype=float)
        if not 0 < beta < 1:
            raise ValidationError("beta must lie in ]0,1[")
        return cls(EmbeddingSpec("orlicz", orlicz=orlicz, mu=mu),
                   LuxemburgPowerPotential(orlicz, mu, float(beta)))

    @property
    def mazur_params(self):
        """(alpha, beta, gamma) recovered from a Mazur pairing."""
        phi = self.potential.params["phi"]
        beta = 1.0 / (phi.exponent + 1.0)
        return 1.0 / phi.coef, beta, self.embedding.gamma

    def closed_form(self, phi, psi) -> float:
        emb = self.embedding
        if emb.kind == "mazur":
            return d_mazur(*self.mazur_params, phi, psi)
        if emb.kind == "spin-factor":
            return spin_factor_div(self.potential, phi, psi)
        return d_orlicz_discrete(emb.orlicz, self.potential.beta, emb.mu, phi, psi)

    def to_json(self):
        return {"embedding": self.embedding.to_json(), "potential": self.potential.to_json()}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        unknown = set(obj) - {"embedding", "potential"}
        if unknown:
            raise ValidationError(f"unknown geometry fields: {sorted(unknown)}")
        emb = EmbeddingSpec.from_json(obj["embedding"])
        pot = obj["potential"]
        if isinstance(pot, dict) and pot.get("kind") == "luxemburg-power":
            pot = LuxemburgPowerPotential(OrliczFunction.from_json(pot["phi"]),
                                          np.asarray(pot["mu"], dtype=float), float(pot["beta"]))
        else:
            pot = PotentialSpec.from_json(pot)
        return cls(emb, pot)


def pullback_div(geometry: GeneralizedGeometry, phi, psi) -> float:
    """``D_Psi(ell(phi), ell(psi))`` through the generic Bregman formula."""
    emb, pot = geometry.embedding, geometry.potential
    try:
        v = emb.forward(psi)
    except DomainError as exc:
        raise DomainError(f"second argument outside the admissible set: {exc}") from exc
    u = emb.forward(phi)
    if emb.kind == "mazur" and emb.carrier == "matrix":
        return matrix_div_generic(pot, HermitianMatrix(u), HermitianMatrix(v))
    if emb.kind == "mazur":
        pot = pot if pot.dim == len(u) else pot.with_dim(len(u))
    return bregman_div(pot, u, v)


@dataclass
class GeneralizedProjection:
    point: object
    embedded: np.ndarray
    value: float
    side: str
    kkt_residual: float
    iterations: int
    pythagoras_slack: float | None
    pythagoras_ok: bool | None

    def to_json(self):
        pt = self.point.to_json() if hasattr(self.point, "to_json") else \
            [float(v) for v in np.asarray(self.point)]
        return {"point": pt, "embedded": [float(v) for v in self.embedded],
                "value": self.value, "side": self.side, "kkt_residual": self.kkt_residual,
                "iterations": self.iterations, "pythagoras_slack": self.pythagoras_slack,
                "pythagoras_ok": self.pythagoras_ok}


def generalized_project(geometry: GeneralizedGeometry, C: ConstraintSet, psi, side="left",
                        probe=None) -> GeneralizedProjection:
    """Project ``psi`` onto the ell-convex set ``C`` (given in embedded coordinates).

    Supported for the vector Mazur embedding (the cone ``u >= 0`` is added to
    ``C``) and the spin-factor slice (the result must land in the unit ball).
    The Pythagorean slack is evaluated at ``probe`` (default: an interior
    point of the feasible set) and checked for equality on affine sets.
    """
    emb, pot = geometry.embedding, geometry.potential
    if emb.kind == "orlicz" or (emb.kind == "mazur" and emb.carrier != "vector"):
        raise ValidationError("generalized projections need a vector Mazur or spin-factor geometry")
    v = np.asarray(emb.forward(psi), dtype=float)
    n = len(v)
    if pot.dim != n:
        pot = pot.with_dim(n)
    target = C
    if emb.kind == "mazur":
        target = C.intersect(ConstraintSet.polyhedron(n, G=-np.eye(n), h=np.zeros(n)))
    res = project(pot, target, v, side)
    u = np.where(np.abs(res.point) < 1e-300, 0.0, res.point)
    if emb.kind == "mazur":
        u = np.clip(u, 0.0, None)
    point = emb.inverse(u)

    slack = ok = None
    if probe is None:
        from .bregman import _interior_start  # feasible reference point
        A, b, G, h = target.linear_form()
        lo = np.full(n, -INF)
        probe, _ = _interior_start(A, b, G, h, lo, -lo)
    if probe is not None:
        probe = np.asarray(probe, dtype=float)
        if side == "left":
            lhs = bregman_div(pot, probe, u) + bregman_div(pot, u, v)
            rhs = bregman_div(pot, probe, v)
        else:
            lhs = bregman_div(pot, v, u) + bregman_div(pot, u, probe)
            rhs = bregman_div(pot, v, probe)
        slack = rhs - lhs
        if target.is_affine and side == "left":
            ok = abs(slack) <= 1e-6 * (1.0 + abs(rhs))
        else:
            ok = slack >= -1e-8 * (1.0 + abs(rhs))
    return GeneralizedProjection(point, u, res.value, side, res.kkt_residual, res.iterations,
                                 slack, ok)


def continuity_probe(embedding: EmbeddingSpec, z, direction, deltas=(1e-3, 1e-4, 1e-5)):
    """``||ell(z + delta * direction) - ell(z)||`` for each delta."""
    base = np.asarray(embedding.forward(z), dtype=float)
    out = []
    for d in deltas:
        moved = np.asarray(z, dtype=float) + d * np.asarray(direction, dtype=float)
        out.append(float(np.linalg.norm(np.asarray(embedding.forward(moved)) - base)))
    return out
