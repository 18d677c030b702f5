"""Metric and dual connections induced by a divergence.

For a divergence ``D(u, v)`` on a coordinate patch, with all derivatives taken
on the diagonal ``u = v = p``::

    g_ij        =  d_i d_j D(u, p)             (u-derivatives)
    Gamma_ijk   = -d^u_i d^u_j d^v_k D(u, v)
    Gamma~_ijk  = -d^u_k d^v_i d^v_j D(u, v)

Divergences are black boxes, so every derivative is a tensor-product central
difference with step ``h = 1e-4 (1 + |p_i|)`` and one Richardson step
(``(4 T(h) - T(2h)) / 3``).  Reported tolerances reflect that floor.
Geodesics of the flat connections are straight lines in the flat
coordinates; nothing here integrates an ODE.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import null_space

from .bregman import ConstraintSet, bregman_div, left_project
from .config import DEFAULTS
from .errors import DegeneracyError, DomainError, ValidationError
from .potentials import PotentialSpec


@dataclass(frozen=True)
class DivergenceField:
    """A divergence ``fn(u, v)`` on an open patch described by ``contains``."""

    fn: Callable
    dim: int
    name: str = "divergence"
    contains: Callable | None = None

    def __call__(self, u, v) -> float:
        return float(self.fn(np.asarray(u, dtype=float), np.asarray(v, dtype=float)))

    def check_point(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,):
            raise ValidationError(f"expected a point of length {self.dim}")
        if self.contains is not None and not self.contains(p):
            raise DomainError("point outside the coordinate patch")
        return p

    def swapped(self) -> "DivergenceField":
        return DivergenceField(lambda u, v: self.fn(v, u), self.dim, f"swap({self.name})",
                               self.contains)


def quadratic_field(dim: int) -> DivergenceField:
    return DivergenceField(lambda u, v: 0.5 * float(np.sum((u - v) ** 2)), dim, "quadratic")


def bregman_field(spec: PotentialSpec) -> DivergenceField:
    """``D_Psi`` in the primal (theta) coordinates."""
    return DivergenceField(lambda u, v: bregman_div(spec, u, v), spec.dim,
                           f"bregman[{spec.family}]", spec.in_interior)


def dual_coordinate_field(spec: PotentialSpec) -> DivergenceField:
    """``D_Psi`` expressed in the dual coordinates ``eta = grad Psi(theta)``."""
    def fn(a, b):
        return bregman_div(spec, spec.grad_conjugate(a), spec.grad_conjugate(b))

    return DivergenceField(fn, spec.dim, f"bregman-eta[{spec.family}]", spec.in_dual_interior)


def _steps(p, base):
    return base * (1.0 + np.abs(p))


def _tensor_diff(F, w, dirs, h):
    """Central-difference estimate of the mixed derivative of F along ``dirs``.

    ``dirs`` is a list of displacement vectors (already scaled to one step).
    """
    total = 0.0
    k = len(dirs)
    for signs in itertools.product((1.0, -1.0), repeat=k):
        shift = sum(s * d for s, d in zip(signs, dirs))
        total += np.prod(signs) * F(w + shift)
    return total / (2.0**k)


def _richardson(F, w, dirs, denom):
    t1 = _tensor_diff(F, w, dirs, 1) / denom
    t2 = _tensor_diff(F, w, [2.0 * d for d in dirs], 2) / (denom * 2.0 ** len(dirs))
    return (4.0 * t1 - t2) / 3.0


def _joint(field: DivergenceField):
    n = field.dim
    return lambda w: field.fn(w[:n], w[n:])


def metric_from_divergence(field: DivergenceField, p, step: float | None = None) -> np.ndarray:
    """``d_i d_j D(u, p)`` at ``u = p``; raises :class:`DegeneracyError` if not SPD."""
    p = field.check_point(p)
    n = field.dim
    h = _steps(p, DEFAULTS.fd_step if step is None else step)
    F = lambda u: field.fn(u, p)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h[i]
            ej[j] = h[j]
            g[i, j] = g[j, i] = _richardson(F, p, [ei, ej], h[i] * h[j])
    g = 0.5 * (g + g.T)
    if np.linalg.eigvalsh(g)[0] <= DEFAULTS.metric_floor:
        raise DegeneracyError("induced metric is not positive definite here")
    return g


def connections_from_divergence(field: DivergenceField, p, step: float | None = None):
    """Return ``(Gamma, Gamma_dual)`` as ``n x n x n`` arrays indexed ``[i, j, k]``."""
    p = field.check_point(p)
    n = field.dim
    h = _steps(p, DEFAULTS.fd_step if step is None else step)
    F = _joint(field)
    w = np.concatenate([p, p])

    def unit(idx, side):
        e = np.zeros(2 * n)
        e[idx + (n if side == "v" else 0)] = h[idx]
        return e

    G = np.empty((n, n, n))
    Gd = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                denom = h[i] * h[j] * h[k]
                G[i, j, k] = G[j, i, k] = -_richardson(
                    F, w, [unit(i, "u"), unit(j, "u"), unit(k, "v")], denom)
                Gd[i, j, k] = Gd[j, i, k] = -_richardson(
                    F, w, [unit(k, "u"), unit(i, "v"), unit(j, "v")], denom)
    return G, Gd


def _metric_derivative(field: DivergenceField, p, h):
    """``d_i g_jk`` with ``g_jk = -d^u_j d^v_k D`` differentiated along the diagonal."""
    n = field.dim
    F = _joint(field)
    w = np.concatenate([p, p])
    dg = np.empty((n, n, n))
    for i in range(n):
        di = np.zeros(2 * n)
        di[i] = di[n + i] = h[i]
        for j in range(n):
            for k in range(n):
                ej = np.zeros(2 * n)
                ek = np.zeros(2 * n)
                ej[j] = h[j]
                ek[n + k] = h[k]
                dg[i, j, k] = -_richardson(F, w, [di, ej, ek], h[i] * h[j] * h[k])
    return dg


def norden_sen_check(field: DivergenceField, p, trials: int = 20, seed: int = 0,
                     step: float | None = None) -> float:
    """Max over sampled index triples of ``|d_i g_jk - Gamma_ijk - Gamma~_ikj|``."""
    p = field.check_point(p)
    n = field.dim
    h = _steps(p, DEFAULTS.fd_step if step is None else step)
    G, Gd = connections_from_divergence(field, p, step)
    dg = _metric_derivative(field, p, h)
    rng = np.random.default_rng(seed)
    triples = rng.integers(0, n, size=(trials, 3))
    return float(max(abs(dg[i, j, k] - G[i, j, k] - Gd[i, k, j]) for i, j, k in triples))


def dual_coordinates(spec: PotentialSpec, theta) -> np.ndarray:
    """``eta = grad Psi(theta)``."""
    return spec.grad(np.asarray(theta, dtype=float))


def primal_coordinates(spec: PotentialSpec, eta) -> np.ndarray:
    """``theta = grad Psi*(eta)``."""
    return spec.grad_conjugate(np.asarray(eta, dtype=float))


def flatness_check(spec: PotentialSpec, points, step: float | None = None) -> dict:
    """Largest Christoffel symbol of the primal connection in theta and of the
    dual connection in eta, over ``points`` (given in theta coordinates)."""
    primal = bregman_field(spec)
    dual = dual_coordinate_field(spec)
    g_max = gd_max = 0.0
    for theta in np.atleast_2d(points):
        G, _ = connections_from_divergence(primal, theta, step)
        _, Gd = connections_from_divergence(dual, dual_coordinates(spec, theta), step)
        g_max = max(g_max, float(np.max(np.abs(G))))
        gd_max = max(gd_max, float(np.max(np.abs(Gd))))
    return {"max_gamma_theta": g_max, "max_gamma_dual_eta": gd_max}


def orthogonality_check(spec: PotentialSpec, C: ConstraintSet, y, projection=None) -> float:
    """Metric angle between the dual-geodesic chord from ``y`` to its left
    projection and the tangent space of the affine set ``C``.

    The chord is straight in eta coordinates; as a tangent vector at the
    projection ``P`` it is ``g(P)^{-1} (eta(P) - eta(y))``.  Returns the
    largest normalized ``|g(v, t)|`` over a basis ``t`` of ``ker A`` (0 when
    ``y`` already lies in ``C``).
    """
    if not C.is_affine:
        raise ValidationError("orthogonality is defined for affine sets")
    y = np.asarray(y, dtype=float)
    P = projection if projection is not None else left_project(spec, C, y)
    d_eta = spec.grad(P.point) - spec.grad(y)
    if not np.any(d_eta):
        return 0.0
    g = spec.hess(P.point)
    v = np.linalg.solve(g, d_eta)
    vn = math.sqrt(float(v @ g @ v))
    A, _, _, _ = C.linear_form()
    T = null_space(A)
    worst = 0.0
    for t in T.T:
        tn = math.sqrt(float(t @ g @ t))
        worst = max(worst, abs(float(v @ g @ t)) / (vn * tn))
    return worst


@dataclass
class GeometryReport:
    point: np.ndarray
    metric: np.ndarray
    gamma: np.ndarray
    gamma_dual: np.ndarray
    norden_sen_residual: float
    flatness_residual: float

    def to_json(self):
        n = len(self.point)
        return {
            "point": [float(v) for v in self.point],
            "dim": n,
            "index_convention": "row-major; metric[i][j] at i*n+j, gamma[i][j][k] at (i*n+j)*n+k",
            "metric": [float(v) for v in self.metric.ravel()],
            "gamma": [float(v) for v in self.gamma.ravel()],
            "gamma_dual": [float(v) for v in self.gamma_dual.ravel()],
            "norden_sen_residual": self.norden_sen_residual,
            "flatness_residual": self.flatness_residual,
        }

    @classmethod
    def from_json(cls, obj):
        n = int(obj["dim"])
        return cls(np.asarray(obj["point"], dtype=float),
                   np.asarray(obj["metric"], dtype=float).reshape(n, n),
                   np.asarray(obj["gamma"], dtype=float).reshape(n, n, n),
                   np.asarray(obj["gamma_dual"], dtype=float).reshape(n, n, n),
                   float(obj["norden_sen_residual"]), float(obj["flatness_residual"]))


def geometry_report(field: DivergenceField, p, trials: int = 20, seed: int = 0) -> GeometryReport:
    p = field.check_point(p)
    g = metric_from_divergence(field, p)
    G, Gd = connections_from_divergence(field, p)
    ns = norden_sen_check(field, p, trials, seed)
    return GeometryReport(p, g, G, Gd, ns, float(np.max(np.abs(G))))
