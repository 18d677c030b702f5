"""Spectral calculus on Hermitian matrices and the trace-form matrix divergences.

A permutation-symmetric potential ``Phi`` on R^n lifts to Hermitian matrices
as ``Phi(lambda(X))``.  Its gradient is ``U diag(grad Phi(lambda)) U*`` and its
Bregman divergence can be evaluated either generically from those two pieces
or from the closed trace formulas in :func:`matrix_div`.  All matrix functions
go through an eigendecomposition; there is no Pade or scaling-and-squaring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .config import DEFAULTS
from .errors import DimensionError, DomainError, ValidationError
from .potentials import PotentialSpec

INF = math.inf

MATRIX_FAMILIES = ("umegaki", "logdet", "fermi", "gammanorm", "alpha")

STRICTLY_POSITIVE = "StrictlyPositive"
POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
INDEFINITE = "Indefinite"


class HermitianMatrix:
    """Dense Hermitian (or real symmetric) matrix.

    The input is symmetrised as ``(X + X^*)/2``; the size of that correction is
    kept in ``correction``.  Inputs that are far from Hermitian are rejected.
    """

    __slots__ = ("data", "correction")

    def __init__(self, entries, *, reject_above: float = 1e-8):
        X = np.array(entries)
        if X.ndim != 2 or X.shape[0] != X.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {X.shape}")
        if not np.iscomplexobj(X):
            X = X.astype(float)
        elif np.all(X.imag == 0):
            X = X.real.astype(float)
        asym = float(np.max(np.abs(X - X.conj().T))) if X.size else 0.0
        scale = 1.0 + float(np.max(np.abs(X))) if X.size else 1.0
        if asym > reject_above * scale:
            raise ValidationError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
        self.data = 0.5 * (X + X.conj().T)
        self.correction = asym

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"HermitianMatrix({self.data!r})"

    def to_json(self):
        out = {"re": np.real(self.data).tolist()}
        if not self.is_real:
            out["im"] = np.imag(self.data).tolist()
        return out

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, list):
            return cls(obj)
        unknown = set(obj) - {"re", "im"}
        if unknown:
            raise ValidationError(f"unknown matrix fields: {sorted(unknown)}")
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float) if "im" in obj else np.zeros_like(re)
        return cls(re + 1j * im if np.any(im) else re)


def as_hermitian(X) -> HermitianMatrix:
    return X if isinstance(X, HermitianMatrix) else HermitianMatrix(X)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # nonincreasing
    vectors: np.ndarray      # columns, unitary

    def reconstruct(self) -> np.ndarray:
        return apply_eig(self, self.eigenvalues)


def eigen_nonincreasing(X) -> EigenDecomposition:
    """Eigenvalues in nonincreasing order with a deterministic eigenvector phase.

    Each eigenvector is rotated so that its largest-magnitude entry (first
    one on ties) is real and positive.
    """
    A = as_hermitian(X).data
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ArithmeticError(f"eigensolver failed: {exc}") from exc
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        j = int(np.argmax(np.abs(col)))
        ph = col[j] / abs(col[j])
        V[:, k] = col / ph if np.iscomplexobj(V) else col * np.sign(col[j])
    return EigenDecomposition(w, V)


def apply_eig(eig: EigenDecomposition, values) -> np.ndarray:
    V = eig.vectors
    M = (V * np.asarray(values)) @ V.conj().T
    return 0.5 * (M + M.conj().T)


def matrix_function(X, f) -> np.ndarray:
    """``U diag(f(lambda)) U*``."""
    eig = eigen_nonincreasing(X)
    return apply_eig(eig, f(eig.eigenvalues))


def positivity_class(X, threshold: float | None = None) -> str:
    thr = DEFAULTS.spectral_threshold if threshold is None else threshold
    lam_min = float(eigen_nonincreasing(X).eigenvalues[-1])
    if lam_min > thr:
        return STRICTLY_POSITIVE
    if lam_min >= -thr:
        return POSITIVE_SEMIDEFINITE
    return INDEFINITE


def _inner(A, B) -> float:
    """Re tr(A B) for Hermitian A, B."""
    return float(np.real(np.sum(A * B.T)))


def _lift(spec: PotentialSpec, n: int) -> PotentialSpec:
    return spec if spec.dim == n else spec.with_dim(n)


def _snap(spec, lam, thr):
    """Move eigenvalues within ``thr`` outside a closed domain edge onto it."""
    if not spec.separable:
        return lam
    s = spec._scalar
    lam = lam.copy()
    if s.lo_closed and math.isfinite(s.lo):
        lam[(lam < s.lo) & (lam >= s.lo - thr)] = s.lo
    if s.hi_closed and math.isfinite(s.hi):
        lam[(lam > s.hi) & (lam <= s.hi + thr)] = s.hi
    return lam


def spectral_potential_eval(spec: PotentialSpec, X) -> float:
    """``Phi(lambda(X))``; ``+inf`` off the lifted effective domain."""
    X = as_hermitian(X)
    lam = eigen_nonincreasing(X).eigenvalues
    phi = _lift(spec, X.n)
    return phi.value(_snap(phi, lam, DEFAULTS.spectral_threshold))


def spectral_grad(spec: PotentialSpec, X) -> np.ndarray:
    """``U diag(grad Phi(lambda)) U*``."""
    X = as_hermitian(X)
    eig = eigen_nonincreasing(X)
    phi = _lift(spec, X.n)
    if not phi.in_interior(eig.eigenvalues):
        raise DomainError("spectral gradient undefined: spectrum outside int efd")
    return apply_eig(eig, phi.grad(eig.eigenvalues))


def matrix_div_generic(spec: PotentialSpec, xi, zeta) -> float:
    """Bregman divergence of ``Phi o lambda`` with ``<A, B> = Re tr(AB)``."""
    xi, zeta = as_hermitian(xi), as_hermitian(zeta)
    if xi.n != zeta.n:
        raise DimensionError("matrix sizes differ")
    grad = spectral_grad(spec, zeta)
    fx = spectral_potential_eval(spec, xi)
    if fx == INF:
        return INF
    fz = spectral_potential_eval(spec, zeta)
    return fx - fz - _inner(xi.data - zeta.data, grad)


# ---------------------------------------------------------------------------
# closed trace forms


def _eigs(X):
    eig = eigen_nonincreasing(X)
    return eig, eig.eigenvalues


def _is_pd(lam, thr):
    return lam[-1] > thr


def _is_psd(lam, thr):
    return lam[-1] >= -thr


def _umegaki(xi, zeta, thr, zeta_sign=1.0):
    ex, lx = _eigs(xi)
    ez, lz = _eigs(zeta)
    if not (_is_psd(lx, thr) and _is_pd(lz, thr)):
        return INF
    lx = np.clip(lx, 0.0, None)
    tr_xlogx = float(np.sum(special.xlogy(lx, lx)))
    log_z = apply_eig(ez, np.log(lz))
    return (tr_xlogx - _inner(xi.data, log_z) - float(np.sum(lx))
            + zeta_sign * float(np.sum(lz)))


def _logdet(xi, zeta, thr):
    _, lx = _eigs(xi)
    ez, lz = _eigs(zeta)
    if not (_is_pd(lx, thr) and _is_pd(lz, thr)):
        return INF
    zeta_inv = apply_eig(ez, 1.0 / lz)
    n = xi.n
    return _inner(xi.data, zeta_inv) - (float(np.sum(np.log(lx))) - float(np.sum(np.log(lz)))) - n


def _fermi(xi, zeta, thr):
    ex, lx = _eigs(xi)
    ez, lz = _eigs(zeta)
    if not (lx[-1] >= -thr and lx[0] <= 1.0 + thr):
        return INF
    if not (lz[-1] > thr and lz[0] < 1.0 - thr):
        return INF
    lx = np.clip(lx, 0.0, 1.0)
    ent = float(np.sum(special.xlogy(lx, lx) + special.xlogy(1.0 - lx, 1.0 - lx)))
    log_z = apply_eig(ez, np.log(lz))
    log_1mz = apply_eig(ez, np.log1p(-lz))
    return ent - _inner(xi.data, log_z) - _inner(np.eye(xi.n) - xi.data, log_1mz)


def _gammanorm(xi, zeta, thr, gamma):
    _, lx = _eigs(xi)
    ez, lz = _eigs(zeta)
    if not _is_pd(lz, thr):
        return INF
    p = 1.0 / gamma
    return (gamma * float(np.sum(np.abs(lx) ** p))
            + (1.0 - gamma) * float(np.sum(lz**p))
            - _inner(xi.data, apply_eig(ez, lz ** (p - 1.0))))


def _alpha(xi, zeta, thr, alpha):
    _, lx = _eigs(xi)
    ez, lz = _eigs(zeta)
    if not _is_pd(lz, thr):
        return INF
    if alpha > 0:
        if not _is_psd(lx, thr):
            return INF
        lx = np.clip(lx, 0.0, None)
    elif not _is_pd(lx, thr):
        return INF
    d = (float(np.sum(lz**alpha)) - float(np.sum(lx**alpha)) / (1.0 - alpha)
         + alpha / (1.0 - alpha) * _inner(xi.data, apply_eig(ez, lz ** (alpha - 1.0))))
    return d if alpha > 0 else -d


def parse_matrix_family(family, param=None):
    """Accepts ``"alpha"`` with ``param`` or strings like ``"alpha(0.5)"``."""
    name = str(family).strip().lower()
    if "(" in name:
        name, rest = name.split("(", 1)
        param = float(rest.rstrip(")"))
    name = name.replace("-", "").replace("_", "")
    if name not in MATRIX_FAMILIES:
        raise ValidationError(f"unknown matrix family {family!r}")
    if name == "gammanorm":
        param = 0.5 if param is None else float(param)
        if not 0 < param < 1:
            raise ValidationError("gamma must lie in ]0,1[")
    elif name == "alpha":
        if param is None:
            raise ValidationError("alpha family needs a parameter")
        param = float(param)
        if not (0 < param < 1 or param < 0):
            raise ValidationError("alpha must lie in ]0,1[ or ]-inf,0[")
    else:
        param = None
    return name, param


def matrix_div(family, xi, zeta, param=None, threshold: float | None = None) -> float:
    """Closed trace form of the matrix divergence ``family``.

    ``umegaki`` is ``tr(xi (log xi - log zeta) - xi + zeta)``; the remaining
    families are ``logdet``, ``fermi``, ``gammanorm(gamma)`` and
    ``alpha(alpha)``.  Pairs outside a family's domain give ``+inf``.
    """
    name, param = parse_matrix_family(family, param)
    thr = DEFAULTS.spectral_threshold if threshold is None else threshold
    xi, zeta = as_hermitian(xi), as_hermitian(zeta)
    if xi.n != zeta.n:
        raise DimensionError("matrix sizes differ")
    if name == "umegaki":
        return _umegaki(xi, zeta, thr)
    if name == "logdet":
        return _logdet(xi, zeta, thr)
    if name == "fermi":
        return _fermi(xi, zeta, thr)
    if name == "gammanorm":
        return _gammanorm(xi, zeta, thr, param)
    return _alpha(xi, zeta, thr, param)


def family_potential(family, param=None, n=1) -> PotentialSpec:
    """Vector potential whose spectral lift generates ``family``."""
    name, param = parse_matrix_family(family, param)
    if name == "umegaki":
        return PotentialSpec.make("neg-entropy", n)
    if name == "logdet":
        return PotentialSpec.make("burg", n)
    if name == "fermi":
        return PotentialSpec.make("fermi-dirac", n)
    if name == "gammanorm":
        return PotentialSpec.make("gamma-norm", n, gamma=param)
    return PotentialSpec.make("alpha-power", n, alpha=param)


def logdet_via_h(xi, zeta) -> float:
    """``h(zeta^{-1/2} xi zeta^{-1/2}) - n`` with ``h(X) = tr X - log det X``."""
    xi, zeta = as_hermitian(xi), as_hermitian(zeta)
    z_isqrt = matrix_function(zeta, lambda l: 1.0 / np.sqrt(l))
    M = HermitianMatrix(z_isqrt @ xi.data @ z_isqrt)
    lam = eigen_nonincreasing(M).eigenvalues
    return float(np.sum(lam) - np.sum(np.log(lam))) - xi.n
