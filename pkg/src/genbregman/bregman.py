"""Bregman divergences on R^n and left/right Bregman projections.

Projections are solved by a small dense primal-dual interior-point method
for smooth objectives under linear constraints::

    minimise f(x)  s.t.  A x = b,  G x <= h,  x in the open box int efd

Affine sets reduce to Newton on the stationarity system
``grad Phi(x) - grad Phi(y) = A^T lam``.  Iterates never leave the interior
of the domain (fraction-to-the-boundary rule, 0.99).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .config import DEFAULTS, Tolerances
from .errors import (ConvergenceError, DimensionError, DomainError,
                     InfeasibleError, ValidationError)

INF = math.inf

CONSTRAINT_KINDS = ("affine", "halfspaces", "box", "simplex", "polyhedron")


def bregman_div(spec, x, y) -> float:
    """``Phi(x) - Phi(y) - <x - y, grad Phi(y)>``.

    ``+inf`` when ``y`` is outside int efd or ``x`` outside efd.  ``spec``
    may be any potential object exposing ``value``, ``grad``,
    ``in_domain`` and ``in_interior``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.shape[0] != spec.dim:
        raise DimensionError(f"expected two vectors of length {spec.dim}")
    if not spec.in_interior(y) or not spec.in_domain(x):
        return INF
    if np.array_equal(x, y):
        return 0.0
    d = spec.value(x) - spec.value(y) - float((x - y) @ spec.grad(y))
    # roundoff can push a tiny true value below zero
    return max(d, 0.0) if d > -1e-12 * (1.0 + abs(spec.value(x))) else d


# ---------------------------------------------------------------------------
# constraint sets


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Closed convex target set, described by linear (in)equalities.

    ``coords`` says whether the description applies to the point itself
    (``"primal"``) or to its dual coordinates ``grad Phi(x)`` (``"dual"``).
    """

    kind: str
    ambient_dim: int
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    total: float | None = None
    coords: str = "primal"

    def __post_init__(self):
        if self.kind not in CONSTRAINT_KINDS:
            raise ValidationError(f"unknown constraint kind {self.kind!r}")
        if self.coords not in ("primal", "dual"):
            raise ValidationError("coords must be 'primal' or 'dual'")
        n = self.ambient_dim
        if self.kind == "affine":
            A = np.atleast_2d(np.asarray(self.A, dtype=float))
            b = np.atleast_1d(np.asarray(self.b, dtype=float))
            if A.shape[1] != n or A.shape[0] != b.shape[0]:
                raise DimensionError("affine constraint shapes do not match")
            if A.shape[0] > n:
                raise ValidationError("more equations than unknowns")
            sv = np.linalg.svd(A, compute_uv=False)
            if sv[-1] <= 1e-10 * max(1.0, sv[0]):
                raise ValidationError("affine constraint matrix is rank deficient")
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "b", b)
        elif self.kind == "halfspaces":
            G = np.atleast_2d(np.asarray(self.G, dtype=float))
            h = np.atleast_1d(np.asarray(self.h, dtype=float))
            if G.shape[1] != n or G.shape[0] != h.shape[0]:
                raise DimensionError("halfspace shapes do not match")
            object.__setattr__(self, "G", G)
            object.__setattr__(self, "h", h)
        elif self.kind == "box":
            lo = np.broadcast_to(np.asarray(self.lo, dtype=float), (n,)).copy()
            hi = np.broadcast_to(np.asarray(self.hi, dtype=float), (n,)).copy()
            if np.any(lo > hi):
                raise ValidationError("box with lo > hi is empty")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "polyhedron":
            A = np.asarray(self.A if self.A is not None else np.zeros((0, n)), dtype=float).reshape(-1, n)
            b = np.asarray(self.b if self.b is not None else np.zeros(0), dtype=float).reshape(-1)
            G = np.asarray(self.G if self.G is not None else np.zeros((0, n)), dtype=float).reshape(-1, n)
            h = np.asarray(self.h if self.h is not None else np.zeros(0), dtype=float).reshape(-1)
            if A.shape[0] != b.shape[0] or G.shape[0] != h.shape[0]:
                raise DimensionError("polyhedron shapes do not match")
            if A.shape[0]:
                sv = np.linalg.svd(A, compute_uv=False)
                if A.shape[0] > n or sv[-1] <= 1e-10 * max(1.0, sv[0]):
                    raise ValidationError("equality part is rank deficient")
            for name, val in zip("AbGh", (A, b, G, h)):
                object.__setattr__(self, name, val)
        else:
            if self.total is None or not self.total > 0:
                raise ValidationError("simplex needs total mass > 0")
            object.__setattr__(self, "total", float(self.total))

    # -- constructors -----------------------------------------------------------

    @classmethod
    def affine(cls, A, b, coords="primal"):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        return cls("affine", A.shape[1], A=A, b=b, coords=coords)

    @classmethod
    def halfspaces(cls, pairs, coords="primal"):
        """``pairs`` is a list of ``(a, c)`` meaning ``<a, x> <= c``."""
        G = np.array([np.asarray(a, dtype=float) for a, _ in pairs])
        h = np.array([float(c) for _, c in pairs])
        return cls("halfspaces", G.shape[1], G=G, h=h, coords=coords)

    @classmethod
    def box(cls, lo, hi, dim=None, coords="primal"):
        n = dim if dim is not None else np.size(lo)
        return cls("box", int(n), lo=lo, hi=hi, coords=coords)

    @classmethod
    def simplex(cls, total, dim, coords="primal"):
        return cls("simplex", int(dim), total=total, coords=coords)

    @classmethod
    def polyhedron(cls, dim, A=None, b=None, G=None, h=None, coords="primal"):
        return cls("polyhedron", int(dim), A=A, b=b, G=G, h=h, coords=coords)

    def intersect(self, other: "ConstraintSet") -> "ConstraintSet":
        if other.ambient_dim != self.ambient_dim or other.coords != self.coords:
            raise ValidationError("cannot intersect sets of different dimension or coordinates")
        A1, b1, G1, h1 = self.linear_form()
        A2, b2, G2, h2 = other.linear_form()
        return ConstraintSet.polyhedron(self.ambient_dim, np.vstack([A1, A2]),
                                        np.concatenate([b1, b2]), np.vstack([G1, G2]),
                                        np.concatenate([h1, h2]), coords=self.coords)

    # -- linear description -------------------------------------------------------

    @property
    def is_affine(self) -> bool:
        return self.kind == "affine" or (self.kind == "polyhedron" and self.G.shape[0] == 0)

    def linear_form(self):
        """(A, b, G, h) with empty arrays for missing parts."""
        n = self.ambient_dim
        A = np.zeros((0, n))
        b = np.zeros(0)
        G = np.zeros((0, n))
        h = np.zeros(0)
        if self.kind in ("affine", "polyhedron"):
            A, b = self.A, self.b
            if self.kind == "polyhedron":
                G, h = self.G, self.h
        elif self.kind == "halfspaces":
            G, h = self.G, self.h
        elif self.kind == "box":
            rows, rhs, eq_rows, eq_rhs = [], [], [], []
            eye = np.eye(n)
            for i in range(n):
                # a pinned coordinate is an equality; two opposite inequalities
                # would leave the set without interior
                if self.lo[i] == self.hi[i]:
                    eq_rows.append(eye[i])
                    eq_rhs.append(self.lo[i])
                    continue
                if math.isfinite(self.hi[i]):
                    rows.append(eye[i])
                    rhs.append(self.hi[i])
                if math.isfinite(self.lo[i]):
                    rows.append(-eye[i])
                    rhs.append(-self.lo[i])
            if rows:
                G, h = np.array(rows), np.array(rhs)
            if eq_rows:
                A, b = np.array(eq_rows), np.array(eq_rhs)
        else:
            A = np.ones((1, n))
            b = np.array([self.total])
            G = -np.eye(n)
            h = np.zeros(n)
        return A, b, G, h

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        A, b, G, h = self.linear_form()
        v = 0.0
        if A.shape[0]:
            v = max(v, float(np.max(np.abs(A @ x - b))))
        if G.shape[0]:
            v = max(v, float(np.max(G @ x - h)))
        return max(v, 0.0)

    def contains(self, x, tol=0.0) -> bool:
        return self.violation(x) <= tol

    # -- serialisation ---------------------------------------------------------------

    def to_json(self):
        out = {"kind": self.kind, "dim": self.ambient_dim}
        if self.kind == "affine":
            out.update(A=self.A.tolist(), b=self.b.tolist())
        elif self.kind == "halfspaces":
            out["halfspaces"] = [[a.tolist(), float(c)] for a, c in zip(self.G, self.h)]
        elif self.kind == "box":
            out.update(lo=[_jnum(v) for v in self.lo], hi=[_jnum(v) for v in self.hi])
        elif self.kind == "polyhedron":
            out.update(A=self.A.tolist(), b=self.b.tolist(), G=self.G.tolist(), h=self.h.tolist())
        else:
            out["total"] = self.total
        if self.coords != "primal":
            out["coords"] = self.coords
        return out

    @classmethod
    def from_json(cls, obj, dim=None):
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        allowed = {"kind", "dim", "coords"} | {
            "affine": {"A", "b"},
            "halfspaces": {"halfspaces"},
            "box": {"lo", "hi"},
            "simplex": {"total"},
            "polyhedron": {"A", "b", "G", "h"},
        }.get(kind, set())
        unknown = set(obj) - allowed
        if unknown:
            raise ValidationError(f"unknown ConstraintSet fields: {sorted(unknown)}")
        coords = obj.get("coords", "primal")
        dim = obj.get("dim", dim)
        if kind == "affine":
            return cls.affine(obj["A"], obj["b"], coords=coords)
        if kind == "halfspaces":
            return cls.halfspaces(obj["halfspaces"], coords=coords)
        if kind == "box":
            lo = [_fnum(v) for v in np.atleast_1d(obj["lo"])]
            hi = [_fnum(v) for v in np.atleast_1d(obj["hi"])]
            n = dim if dim is not None else max(len(lo), len(hi))
            return cls.box(lo if len(lo) > 1 else lo[0], hi if len(hi) > 1 else hi[0],
                           dim=n, coords=coords)
        if kind == "polyhedron":
            if dim is None:
                raise ValidationError("polyhedron needs dim")
            return cls.polyhedron(dim, obj.get("A"), obj.get("b"), obj.get("G"), obj.get("h"),
                                  coords=coords)
        if kind == "simplex":
            if dim is None:
                raise ValidationError("simplex needs dim")
            return cls.simplex(obj["total"], dim, coords=coords)
        raise ValidationError(f"unknown constraint kind {kind!r}")


def _jnum(v):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _fnum(v):
    return float(v) if not isinstance(v, str) else float(v.replace("infinity", "inf"))


# ---------------------------------------------------------------------------
# results


@dataclass
class ProjectionResult:
    point: np.ndarray
    value: float
    iterations: int
    kkt_residual: float
    side: str
    trace: list | None = field(default=None, repr=False)

    def to_json(self, trace=False):
        out = {
            "point": [float(v) for v in self.point],
            "value": float(self.value),
            "iterations": int(self.iterations),
            "kkt_residual": float(self.kkt_residual),
            "side": self.side,
        }
        if trace and self.trace is not None:
            out["trace"] = self.trace
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(np.asarray(obj["point"], dtype=float), float(obj["value"]),
                   int(obj["iterations"]), float(obj["kkt_residual"]), obj["side"],
                   obj.get("trace"))


# ---------------------------------------------------------------------------
# interior-point solver


def _interior_start(A, b, G, h, lo, hi):
    """Phase I: maximise the margin t to all inequalities and domain walls.

    Returns (x, t); t <= 0 means no strictly interior feasible point.
    """
    n = A.shape[1] if A.shape[0] else G.shape[1] if G.shape[0] else len(lo)
    rows, rhs = [], []
    for g, c in zip(G, h):
        rows.append(np.append(g, np.linalg.norm(g)))
        rhs.append(c)
    eye = np.eye(n)
    for i in range(n):
        if math.isfinite(lo[i]):
            rows.append(np.append(-eye[i], 1.0))
            rhs.append(-lo[i])
        if math.isfinite(hi[i]):
            rows.append(np.append(eye[i], 1.0))
            rhs.append(hi[i])
    A_ub = np.array(rows) if rows else None
    b_ub = np.array(rhs) if rows else None
    A_eq = np.hstack([A, np.zeros((A.shape[0], 1))]) if A.shape[0] else None
    b_eq = b if A.shape[0] else None
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs")
    if res.status != 0:
        if res.status == 2:
            return None, -INF
        # unbounded cannot happen (t <= 1); treat other failures as infeasible
        return None, -INF
    x = res.x[:n]
    if A.shape[0]:
        # polish equality feasibility to machine precision
        x = x - np.linalg.lstsq(A, A @ x - b, rcond=None)[0]
    return x, float(res.x[-1])


def _strictly_inside(x, G, h, lo, hi):
    return (np.all(x > lo) and np.all(x < hi) and (G.shape[0] == 0 or np.all(G @ x < h)))


def _warm_start(A, b, G, h, lo, hi, anchor):
    """Strictly feasible start near the Euclidean projection of ``anchor``.

    The phase-I point is often a degenerate vertex (for example the origin
    for a homogeneous constraint), where some potentials have a singular
    Hessian.  Starting near ``anchor`` avoids that and saves iterations.
    """
    c, margin = _interior_start(A, b, G, h, lo, hi)
    if c is None or margin <= 0:
        raise InfeasibleError("constraint set does not meet the interior of the domain")
    if anchor is None:
        return c
    anchor = np.asarray(anchor, dtype=float)
    if G.shape[0]:
        n = len(anchor)
        try:
            p, _, _, _ = solve_linear_constrained(
                lambda x: 0.5 * float((x - anchor) @ (x - anchor)), lambda x: x - anchor,
                lambda x: np.eye(n), A, b, G, h, np.full(n, -INF), np.full(n, INF),
                x0=c, tol=1e-10, max_iter=200)
        except ConvergenceError:
            return c
    elif A.shape[0]:
        p = anchor - np.linalg.lstsq(A, A @ anchor - b, rcond=None)[0]
    else:
        p = anchor
    theta = 0.99
    while theta > 1e-3:
        x = c + theta * (p - c)
        if _strictly_inside(x, G, h, lo, hi):
            return x
        theta *= 0.5
    return c


def _finite_hessian(H):
    if np.all(np.isfinite(H)):
        return H
    return np.nan_to_num(H, nan=0.0, posinf=1e16, neginf=-1e16)


def _max_step(v, dv, frac=0.99):
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, frac * float(np.min(-v[neg] / dv[neg])))


def _domain_step(x, dx, lo, hi, frac=0.99):
    alpha = 1.0
    for i in range(len(x)):
        if dx[i] < 0 and math.isfinite(lo[i]):
            alpha = min(alpha, frac * (x[i] - lo[i]) / -dx[i])
        elif dx[i] > 0 and math.isfinite(hi[i]):
            alpha = min(alpha, frac * (hi[i] - x[i]) / dx[i])
    return alpha


def _polish(grad, hess, A, b, G, h, lo, hi, x, s, z, tol, max_iter=30):
    """Newton on the equality system of the guessed active set.

    Interior-point iterates approach degenerate solutions (active
    constraint, zero multiplier) only like sqrt(mu); this pins them.
    Returns (x, kkt) or (None, inf) if the guess is inconsistent.
    """
    n = len(x)
    active = np.flatnonzero(s < z) if G.shape[0] else np.zeros(0, dtype=int)
    Aa = np.vstack([A, G[active]])
    ba = np.concatenate([b, h[active]])
    m = Aa.shape[0]
    if m > n or (m and np.linalg.matrix_rank(Aa) < m):
        return None, INF
    x = x.copy()
    if m:
        x = x - np.linalg.lstsq(Aa, Aa @ x - ba, rcond=None)[0]
    mult = np.zeros(m)
    for _ in range(max_iter):
        if np.any(x <= lo) or np.any(x >= hi):
            return None, INF
        g = grad(x)
        H = _finite_hessian(hess(x))
        K = np.block([[0.5 * (H + H.T), Aa.T], [Aa, np.zeros((m, m))]])
        try:
            sol = np.linalg.solve(K, np.concatenate([-g, ba - Aa @ x]))
        except np.linalg.LinAlgError:
            return None, INF
        dx, mult = sol[:n], sol[n:]
        x = x + dx
        if np.max(np.abs(dx)) <= 1e-15 * (1.0 + np.max(np.abs(x))):
            break
    if np.any(x <= lo) or np.any(x >= hi):
        return None, INF
    g = grad(x)
    stat = g + Aa.T @ mult
    scale = 1.0 + float(np.max(np.abs(g)))
    z_act = mult[A.shape[0]:]
    feas = 0.0
    if A.shape[0]:
        feas = float(np.max(np.abs(A @ x - b)))
    if G.shape[0]:
        feas = max(feas, float(np.max(G @ x - h)))
    dual_infeas = float(np.max(-z_act)) if z_act.size else 0.0
    kkt = max(float(np.max(np.abs(stat))) / scale, feas, dual_infeas / scale, 0.0)
    if kkt > tol:
        return None, INF
    return x, kkt


def solve_linear_constrained(fun, grad, hess, A, b, G, h, lo, hi, x0=None,
                             tol=1e-9, max_iter=500, trace=False, anchor=None):
    """Primal-dual interior point for ``min fun`` under linear constraints.

    ``lo``/``hi`` describe an open box the iterates must stay inside.
    Returns ``(x, iterations, kkt_residual, trace)``.  The KKT residual is
    the max of the stationarity residual (scaled by ``1 + |grad|``), the
    primal residuals, and the mean complementarity.

    The barrier parameter follows the monotone rule: it is held fixed until
    its barrier problem is solved to ``10 * mu`` and only then reduced.
    Letting complementarity run ahead of stationarity stalls the iteration
    on these strongly curved potentials.
    """
    n = len(lo)
    m_eq, m_in = A.shape[0], G.shape[0]
    if x0 is None:
        x0 = _warm_start(A, b, G, h, lo, hi, anchor)
    x = np.array(x0, dtype=float)
    if not _strictly_inside(x, G, h, lo, hi):
        raise InfeasibleError("initial point is not strictly feasible")
    lam = np.zeros(m_eq)
    s = h - G @ x if m_in else np.zeros(0)
    mu_b = 0.1
    z = mu_b / s if m_in else np.zeros(0)
    history = [] if trace else None
    mu_floor = tol / 10.0

    def residuals(x, lam, s, z, target):
        g = grad(x)
        rd = g + A.T @ lam + G.T @ z
        rp = A @ x - b
        ri = G @ x + s - h
        rc = s * z - target
        return g, rd, rp, ri, rc

    def inf_norm(v):
        return float(np.max(np.abs(v))) if v.size else 0.0

    best, best_res = x.copy(), INF
    best_sz = (s.copy(), z.copy())
    tried = set()
    it = 0
    for it in range(max_iter + 1):
        mu = float(s @ z) / m_in if m_in else 0.0
        g, rd, rp, ri, rc = residuals(x, lam, s, z, 0.0)
        scale = 1.0 + inf_norm(g)
        stat = inf_norm(rd) / scale
        kkt = max(stat, inf_norm(rp), inf_norm(ri), mu)
        if history is not None:
            history.append({"iteration": it, "kkt_residual": kkt, "objective": float(fun(x)),
                            "x": [float(v) for v in x], "mu": mu, "stationarity": stat})
        if kkt < best_res:
            best, best_res = x.copy(), kkt
            best_sz = (s.copy(), z.copy())
        if kkt <= math.sqrt(tol):
            key = tuple(np.flatnonzero(s < z)) if m_in else ()
            if kkt <= tol or key not in tried:
                tried.add(key)
                xp, kp = _polish(grad, hess, A, b, G, h, lo, hi, x, s, z, tol)
                if xp is not None and kp <= max(kkt, tol):
                    x, kkt = xp, kp
                    if history is not None:
                        history.append({"iteration": it, "kkt_residual": kkt,
                                        "objective": float(fun(x)),
                                        "x": [float(v) for v in x], "polish": True})
            if kkt <= tol:
                return x, it, kkt, history
        if it == max_iter:
            break
        if m_in:
            # reduce the barrier parameter once its subproblem is solved
            while mu_b > mu_floor:
                err_mu = max(stat, inf_norm(rp), inf_norm(ri), inf_norm(s * z - mu_b))
                if err_mu > 10.0 * mu_b:
                    break
                mu_b = max(mu_floor, min(0.2 * mu_b, mu_b ** 1.5))
        _, rd, rp, ri, rc = residuals(x, lam, s, z, mu_b)
        H = _finite_hessian(hess(x))
        H = 0.5 * (H + H.T)
        if m_in:
            d = z / s
            M = H + G.T @ (d[:, None] * G)
            rhs_x = -rd + G.T @ ((rc - z * ri) / s)
        else:
            M = H
            rhs_x = -rd
        # shift indefinite or singular curvature
        w_min = float(np.linalg.eigvalsh(M)[0])
        floor = 1e-12 * max(1.0, float(np.max(np.abs(np.diag(M)))))
        if w_min < floor:
            M = M + (floor - w_min) * np.eye(n)
        K = np.block([[M, A.T], [A, np.zeros((m_eq, m_eq))]])
        sol = np.linalg.solve(K, np.concatenate([rhs_x, -rp]))
        dx, dlam = sol[:n], sol[n:]
        if m_in:
            ds = -ri - G @ dx
            dz = (-rc - z * ds) / s
        else:
            ds = dz = np.zeros(0)
        frac = max(0.99, 1.0 - mu_b)
        alpha = min(_domain_step(x, dx, lo, hi, frac), _max_step(s, ds, frac) if m_in else 1.0,
                    _max_step(z, dz, frac) if m_in else 1.0)
        r0 = np.linalg.norm(np.concatenate([rd, rp, ri, rc]))
        while True:
            xn = x + alpha * dx
            sn, zn = s + alpha * ds, z + alpha * dz
            ok = np.all(xn > lo) and np.all(xn < hi) and math.isfinite(fun(xn))
            if ok:
                _, rdn, rpn, rin, rcn = residuals(xn, lam + alpha * dlam, sn, zn, mu_b)
                rn = np.linalg.norm(np.concatenate([rdn, rpn, rin, rcn]))
                if rn <= (1.0 - 0.01 * alpha) * r0 or alpha < 1e-10:
                    break
            alpha *= 0.5
            if alpha < 1e-14:
                break
        if alpha < 1e-14:
            break
        x, lam, s, z = xn, lam + alpha * dlam, sn, zn
        if m_in:
            s = np.maximum(s, 1e-300)
    # last resort: active-set Newton from the best iterate
    xp, kp = _polish(grad, hess, A, b, G, h, lo, hi, best, best_sz[0], best_sz[1], tol)
    if xp is not None:
        return xp, it, kp, history
    err = ConvergenceError(f"projection did not converge (kkt residual {best_res:.3e})",
                           best=best, residual=best_res)
    err.trace = history
    raise err


# ---------------------------------------------------------------------------
# projections


def _validate(spec, C, y):
    y = np.asarray(y, dtype=float)
    if y.shape != (spec.dim,):
        raise DimensionError(f"expected vector of length {spec.dim}")
    if C.ambient_dim != spec.dim:
        raise DimensionError("constraint set and potential dimensions differ")
    if not spec.in_interior(y):
        raise DomainError("projected point must lie in int efd")
    return y


def _third_contraction(spec, x, v):
    """d/de Hess(x + e v) at e = 0."""
    if getattr(spec, "separable", False):
        return np.diag(spec.third_diag(x) * v)
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return np.zeros((spec.dim, spec.dim))
    eps = 1e-5 * (1.0 + float(np.linalg.norm(x))) / nv
    return (spec.hess(x + eps * v) - spec.hess(x - eps * v)) / (2.0 * eps)


def left_project(spec, C: ConstraintSet, y, *, tol: Tolerances = DEFAULTS, x0=None,
                 trace=False) -> ProjectionResult:
    """argmin over x in C of D(x, y)."""
    y = _validate(spec, C, y)
    if C.coords != "primal":
        raise ValidationError("left projections take constraint sets in primal coordinates")
    if C.contains(y):
        return ProjectionResult(y.copy(), 0.0, 0, 0.0, "left", [] if trace else None)
    gy = spec.grad(y)
    lo, hi = spec.interior_bounds()
    n = spec.dim
    lo_v, hi_v = np.full(n, lo), np.full(n, hi)
    A, b, G, h = C.linear_form()
    x, it, kkt, hist = solve_linear_constrained(
        lambda x: spec.value(x) - float(x @ gy),
        lambda x: spec.grad(x) - gy,
        spec.hess,
        A, b, G, h, lo_v, hi_v, x0=x0, tol=tol.kkt, max_iter=tol.max_iter, trace=trace,
        anchor=y)
    return ProjectionResult(x, bregman_div(spec, x, y), it, kkt, "left", hist)


def right_project(spec, C: ConstraintSet, y, *, tol: Tolerances = DEFAULTS, x0=None,
                  trace=False) -> ProjectionResult:
    """argmin over x in C of D(y, x).

    With ``C.coords == "dual"`` the set is a linear description of
    ``grad Phi(x)``; the problem is then the left projection of the
    conjugate potential in those coordinates, which is convex.  Otherwise
    Newton runs on x directly, with the Hessian of ``x -> D(y, x)``.
    """
    y = _validate(spec, C, y)
    n = spec.dim
    A, b, G, h = C.linear_form()
    if C.coords == "dual":
        eta_y = spec.grad(y)
        if C.contains(eta_y):
            return ProjectionResult(y.copy(), 0.0, 0, 0.0, "right", [] if trace else None)
        lo, hi = spec.dual_bounds()
        eta, it, kkt, hist = solve_linear_constrained(
            lambda e: spec.conjugate(e) - float(e @ y),
            lambda e: spec.grad_conjugate(e) - y,
            spec.hess_conjugate,
            A, b, G, h, np.full(n, lo), np.full(n, hi), x0=x0, tol=tol.kkt,
            max_iter=tol.max_iter, trace=trace, anchor=eta_y)
        x = spec.grad_conjugate(eta)
        return ProjectionResult(x, bregman_div(spec, y, x), it, kkt, "right", hist)
    if C.contains(y):
        return ProjectionResult(y.copy(), 0.0, 0, 0.0, "right", [] if trace else None)
    lo, hi = spec.interior_bounds()
    fy = spec.value(y)

    def fun(x):
        return fy - spec.value(x) - float((y - x) @ spec.grad(x))

    def grad(x):
        return spec.hess(x) @ (x - y)

    def hess(x):
        return spec.hess(x) + _third_contraction(spec, x, x - y)

    lo_v, hi_v = np.full(n, lo), np.full(n, hi)
    # x -> D(y, x) need not be convex in x, so several deterministic starts
    # are tried and the best stationary point is kept.
    if x0 is not None:
        starts = [np.asarray(x0, dtype=float)]
    else:
        starts = [_warm_start(A, b, G, h, lo_v, hi_v, y), _warm_start(A, b, G, h, lo_v, hi_v, None)]
        try:
            p_left = left_project(spec, C, y, tol=tol).point
            starts.append(_warm_start(A, b, G, h, lo_v, hi_v, p_left))
        except (ConvergenceError, InfeasibleError):
            pass
    best, failure = None, None
    for start in starts:
        try:
            x, it, kkt, hist = solve_linear_constrained(
                fun, grad, hess, A, b, G, h, lo_v, hi_v, x0=start,
                tol=tol.kkt, max_iter=tol.max_iter, trace=trace)
        except ConvergenceError as exc:
            failure = exc
            continue
        cand = ProjectionResult(x, bregman_div(spec, y, x), it, kkt, "right", hist)
        if best is None or cand.value < best.value:
            best = cand
    if best is None:
        raise failure
    return best


def project(spec, C, y, side="left", **kw) -> ProjectionResult:
    if side == "left":
        return left_project(spec, C, y, **kw)
    if side == "right":
        return right_project(spec, C, y, **kw)
    raise ValidationError("side must be 'left' or 'right'")


def project_many(spec, C, ys, side="left", workers=1, **kw):
    """Project each row of ``ys``; results do not depend on ``workers``."""
    ys = [np.asarray(y, dtype=float) for y in ys]
    if workers <= 1:
        return [project(spec, C, y, side, **kw) for y in ys]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda y: project(spec, C, y, side, **kw), ys))


@dataclass
class PythagorasResult:
    lhs: float
    rhs: float
    slack: float
    projection: ProjectionResult

    def to_json(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "projection": self.projection.to_json()}

    @classmethod
    def from_json(cls, obj):
        return cls(float(obj["lhs"]), float(obj["rhs"]), float(obj["slack"]),
                   ProjectionResult.from_json(obj["projection"]))


def pythagoras_check(spec, C, x, y, side="left", *, tol: Tolerances = DEFAULTS,
                     projection: ProjectionResult | None = None) -> PythagorasResult:
    """Compare both sides of the generalized Pythagorean inequality.

    Left:  ``D(x, P) + D(P, y)`` against ``D(x, y)`` with ``P`` the left
    projection of ``y``.  Right: the mirrored ``D(y, P) + D(P, x)`` against
    ``D(y, x)``.  ``slack = rhs - lhs`` is nonnegative up to roundoff for
    convex sets and vanishes on affine ones.
    """
    x = np.asarray(x, dtype=float)
    P = projection if projection is not None else project(spec, C, y, side, tol=tol)
    p = P.point
    if side == "left":
        lhs = bregman_div(spec, x, p) + bregman_div(spec, p, y)
        rhs = bregman_div(spec, x, y)
    else:
        lhs = bregman_div(spec, y, p) + bregman_div(spec, p, x)
        rhs = bregman_div(spec, y, x)
    return PythagorasResult(lhs, rhs, rhs - lhs, P)
