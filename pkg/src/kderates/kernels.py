# kernels.py
# Kernel functions on R^d, their partial derivatives, and the scalar
# functionals (sup norms, tail suprema, tail integrals) consumed by the
# bound expressions.
#
# Conventions:
#   All built-in kernels are radial: K(x) = profile(||x||) with profile
#   nonincreasing on [0, inf).  The Gaussian is the only built-in with
#   derivatives; D^s K factorizes per coordinate through probabilists'
#   Hermite polynomials: d^k/dt^k phi(t) = (-1)^k He_k(t) phi(t).

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _iterproduct
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate

__all__ = [
    "Kernel",
    "MultiIndex",
    "QuadratureError",
    "unit_ball_volume",
    "kernel_from_config",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class QuadratureError(RuntimeError):
    """Raised when a quadrature cannot certify the requested accuracy."""

    def __init__(self, message: str, estimate: float | None = None, error: float | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True)
class MultiIndex:
    """Derivative order s in (N u {0})^d with |s| = sum(s)."""

    orders: tuple[int, ...]

    def __post_init__(self):
        if len(self.orders) == 0:
            raise ValueError("multi-index must have at least one component")
        if any((not isinstance(k, (int, np.integer))) or k < 0 for k in self.orders):
            raise ValueError(f"multi-index components must be nonnegative integers, got {self.orders}")
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))

    @property
    def order(self) -> int:
        return sum(self.orders)

    @property
    def dim(self) -> int:
        return len(self.orders)

    def is_zero(self) -> bool:
        return self.order == 0

    @classmethod
    def zero(cls, dim: int) -> "MultiIndex":
        return cls((0,) * dim)

    @classmethod
    def coerce(cls, s, dim: int) -> "MultiIndex":
        """Accept None (zero), a MultiIndex, or a sequence of ints."""
        if s is None:
            return cls.zero(dim)
        if isinstance(s, MultiIndex):
            out = s
        else:
            out = cls(tuple(int(k) for k in s))
        if out.dim != dim:
            raise ValueError(f"multi-index has {out.dim} components, expected {dim}")
        return out


# -- Hermite helpers for the Gaussian ----------------------------------------

def _phi(t: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.square(t)) / _SQRT_2PI


@lru_cache(maxsize=None)
def _herme_coeffs(k: int) -> tuple[float, ...]:
    c = np.zeros(k + 1)
    c[k] = 1.0
    return tuple(c)


def _phi_deriv(k: int, t: np.ndarray) -> np.ndarray:
    """k-th derivative of the standard normal density, vectorized."""
    t = np.asarray(t, dtype=float)
    if k == 0:
        return _phi(t)
    he = hermite_e.hermeval(t, _herme_coeffs(k))
    return ((-1.0) ** k) * he * _phi(t)


@lru_cache(maxsize=None)
def _herme_roots(k: int) -> tuple[float, ...]:
    """Roots of He_k; the critical points of |He_{k-1}| * phi away from its zeros."""
    if k == 0:
        return ()
    nodes, _ = hermite_e.hermegauss(k)
    return tuple(float(v) for v in nodes)


class Kernel:
    """A bounded kernel on R^d with sup norm, Lipschitz constant and tail profile.

    Built-in forms are radial (K(x) = profile(||x||) with a nonincreasing
    profile), so tail suprema reduce to profile evaluation.  Only the
    Gaussian supports partial derivatives (of any order).

    Parameters are normally supplied through the factory classmethods
    :meth:`gaussian`, :meth:`epanechnikov`, :meth:`uniform`,
    :meth:`triangular` and :meth:`custom_radial`.
    """

    def __init__(
        self,
        form: str,
        dim: int,
        profile: Callable[[np.ndarray], np.ndarray],
        sup_norm: float,
        lipschitz: float | None,
        deriv_support: float,
        support_radius: float | None,
        vc_params: tuple[float, float] | None = None,
    ):
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        self.form = form
        self.dim = int(dim)
        self._profile = profile
        self.sup_norm = float(sup_norm)
        self.lipschitz = None if lipschitz is None else float(lipschitz)
        self.deriv_support = deriv_support
        self.support_radius = support_radius
        # (A, nu) metadata for the uniformly-bounded-VC covering bound; the
        # values are user-supplied, not computed (no algorithm is known to us).
        self.vc_params = vc_params

    def __repr__(self):
        return f"Kernel(form={self.form!r}, dim={self.dim})"

    # -- constructors ---------------------------------------------------

    @classmethod
    def gaussian(cls, dim: int) -> "Kernel":
        norm = (2.0 * math.pi) ** (-dim / 2.0)

        def profile(r, _norm=norm):
            return _norm * np.exp(-0.5 * np.square(np.asarray(r, dtype=float)))

        # |grad K| = ||x|| K(x), maximized on the unit sphere.
        lip = norm * math.exp(-0.5)
        return cls("gaussian", dim, profile, norm, lip, math.inf, None)

    @classmethod
    def epanechnikov(cls, dim: int) -> "Kernel":
        c = (dim + 2.0) / (2.0 * unit_ball_volume(dim))

        def profile(r, _c=c):
            r = np.asarray(r, dtype=float)
            return _c * np.clip(1.0 - np.square(r), 0.0, None)

        return cls("epanechnikov", dim, profile, c, 2.0 * c, 0, 1.0)

    @classmethod
    def uniform(cls, dim: int) -> "Kernel":
        c = 1.0 / unit_ball_volume(dim)

        def profile(r, _c=c):
            r = np.asarray(r, dtype=float)
            return np.where(r <= 1.0, _c, 0.0)

        return cls("uniform", dim, profile, c, None, 0, 1.0)

    @classmethod
    def triangular(cls, dim: int) -> "Kernel":
        c = (dim + 1.0) / unit_ball_volume(dim)

        def profile(r, _c=c):
            r = np.asarray(r, dtype=float)
            return _c * np.clip(1.0 - r, 0.0, None)

        return cls("triangular", dim, profile, c, c, 0, 1.0)

    @classmethod
    def custom_radial(
        cls,
        dim: int,
        profile: Callable[[np.ndarray], np.ndarray],
        lipschitz: float | None = None,
        support_radius: float | None = None,
    ) -> "Kernel":
        """Kernel from a nonincreasing radial profile [0, inf) -> [0, inf).

        The profile is probed on a grid to validate monotonicity and read
        off the sup norm; a Lipschitz constant, if not given, is estimated
        from finite differences on the same grid.
        """
        grid = np.linspace(0.0, support_radius if support_radius else 50.0, 20001)
        vals = np.asarray(profile(grid), dtype=float)
        if np.any(vals < 0):
            raise ValueError("custom radial profile must be nonnegative")
        if np.any(np.diff(vals) > 1e-12 * max(1.0, float(vals[0]))):
            raise ValueError("custom radial profile must be nonincreasing")
        sup = float(vals[0])
        if not math.isfinite(sup):
            raise ValueError("custom radial profile must have finite sup norm")
        if lipschitz is None:
            slopes = np.abs(np.diff(vals)) / (grid[1] - grid[0])
            lipschitz = float(slopes.max()) if slopes.size else 0.0
        return cls("custom_radial", dim, profile, sup, lipschitz, 0, support_radius)

    # -- evaluation -------------------------------------------------------

    def profile(self, r) -> np.ndarray:
        """Radial value at distance r (vectorized)."""
        return self._profile(r)

    def _check_point(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 0 and self.dim == 1:
            u = u.reshape(1)
        if u.shape != (self.dim,):
            raise ValueError(f"point has shape {u.shape}, expected ({self.dim},)")
        return u

    def eval(self, u) -> float:
        """K(u) for a single point u in R^d."""
        u = self._check_point(u)
        return float(self._profile(np.linalg.norm(u)))

    def eval_many(self, U: np.ndarray) -> np.ndarray:
        """K at each row of U, shape (m, d)."""
        U = np.asarray(U, dtype=float)
        return self._profile(np.linalg.norm(U, axis=-1))

    def deriv_eval(self, s, u) -> float:
        """D^s K(u); s = 0 coincides with eval."""
        s = MultiIndex.coerce(s, self.dim)
        if s.is_zero():
            return self.eval(u)
        self._require_deriv(s)
        u = self._check_point(u)
        out = 1.0
        for k, t in zip(s.orders, u):
            out *= float(_phi_deriv(k, t))
        return out

    def deriv_eval_many(self, s, U: np.ndarray) -> np.ndarray:
        """D^s K at each row of U, shape (..., d)."""
        s = MultiIndex.coerce(s, self.dim)
        if s.is_zero():
            return self.eval_many(U)
        self._require_deriv(s)
        U = np.asarray(U, dtype=float)
        out = np.ones(U.shape[:-1])
        for i, k in enumerate(s.orders):
            out = out * _phi_deriv(k, U[..., i])
        return out

    def _require_deriv(self, s: MultiIndex):
        if s.order > self.deriv_support:
            raise ValueError(
                f"derivative order |s|={s.order} unsupported for {self.form} "
                f"(deriv_support={self.deriv_support})"
            )

    # -- tail suprema -------------------------------------------------------

    def tail_sup(self, t: float, s=None) -> float:
        """sup over ||x|| >= t of |D^s K(x)|; s = 0 gives the kernel case.

        Exact for s = 0 (radial profiles are nonincreasing).  For Gaussian
        derivatives the supremum is located from the Hermite critical
        points plus a boundary-sphere search.
        """
        if t < 0:
            raise ValueError("t must be nonnegative")
        s = MultiIndex.coerce(s, self.dim)
        if s.is_zero():
            return float(self._profile(t))
        self._require_deriv(s)
        return _gaussian_deriv_shell_sup(s.orders, float(t))

    def deriv_sup_norm(self, s=None) -> float:
        """||D^s K||_inf."""
        return self.tail_sup(0.0, s)

    def deriv_lipschitz(self, s=None) -> float | None:
        """Global Lipschitz constant of D^s K (numeric for s != 0)."""
        s = MultiIndex.coerce(s, self.dim)
        if s.is_zero():
            return self.lipschitz
        self._require_deriv(s)
        return _gaussian_deriv_lipschitz(s.orders)

    # -- integrability functional --------------------------------------------

    def integrability_integral(self, d_vol: float, k: float, s=None) -> float:
        """Tail integral int_0^inf t^(d_vol-1) sup_{||x||>=t} |D^s K(x)|^k dt.

        Computed by adaptive quadrature after the substitution u = t^d_vol
        (which removes the endpoint singularity for d_vol < 1), with the
        truncation point certified against the tail profile.
        """
        if d_vol <= 0:
            raise ValueError("d_vol must be positive")
        if k <= 0:
            raise ValueError("k must be positive")
        s = MultiIndex.coerce(s, self.dim)

        def tail(t):
            return self.tail_sup(t, s)

        if self.support_radius is not None and s.is_zero():
            T = self.support_radius
        else:
            T = 1.0
            while tail(T) ** k * T ** d_vol >= 1e-12:
                T *= 2.0
                if T > 2.0 ** 40:
                    raise QuadratureError("tail does not decay; integral diverges")

        # u = t^d_vol: integral = (1/d_vol) * int_0^{T^d_vol} tail(u^(1/d_vol))^k du
        def g(u):
            return tail(u ** (1.0 / d_vol)) ** k

        main, main_err = integrate.quad(g, 0.0, T ** d_vol, limit=200, epsabs=0.0, epsrel=1e-10)
        if self.support_radius is not None and s.is_zero():
            rest, rest_err = 0.0, 0.0
        else:
            rest, rest_err = integrate.quad(g, T ** d_vol, np.inf, limit=200)
        total = (main + rest) / d_vol
        err = (main_err + rest_err) / d_vol
        if not math.isfinite(total):
            raise QuadratureError("integral diverges", estimate=total, error=err)
        if total > 0 and err / total > 1e-8:
            raise QuadratureError(
                f"quadrature only certified relative error {err / total:.2e}",
                estimate=total,
                error=err,
            )
        return total


# -- Gaussian derivative shell suprema ----------------------------------------


def _gaussian_deriv_abs(orders: tuple[int, ...], X: np.ndarray) -> np.ndarray:
    """|D^s K| for the (2pi)^{-d/2}-normalized Gaussian, rows of X."""
    X = np.asarray(X, dtype=float)
    out = np.ones(X.shape[:-1])
    for i, k in enumerate(orders):
        out = out * np.abs(_phi_deriv(k, X[..., i]))
    return out


@lru_cache(maxsize=None)
def _gaussian_crit_products(orders: tuple[int, ...]) -> np.ndarray:
    """Interior critical points of |D^s K|: per-coordinate He_{s_i+1} roots."""
    axes = [np.asarray(_herme_roots(k + 1)) for k in orders]
    pts = np.array(list(_iterproduct(*axes)))
    return pts.reshape(-1, len(orders))


def _sphere_max(orders: tuple[int, ...], t: float) -> float:
    """max of |D^s K| over the sphere ||x|| = t (coordinatewise-even objective)."""
    d = len(orders)
    if t == 0.0:
        return float(_gaussian_deriv_abs(orders, np.zeros((1, d)))[0])
    if d == 1:
        return float(_gaussian_deriv_abs(orders, np.array([[t]]))[0])
    if d == 2:
        alpha = np.linspace(0.0, math.pi / 2.0, 2049)
        X = t * np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)
        vals = _gaussian_deriv_abs(orders, X)
        j = int(np.argmax(vals))
        lo = alpha[max(j - 1, 0)]
        hi = alpha[min(j + 1, alpha.size - 1)]
        fine = np.linspace(lo, hi, 513)
        Xf = t * np.stack([np.cos(fine), np.sin(fine)], axis=-1)
        return float(np.max(_gaussian_deriv_abs(orders, Xf)))
    # d >= 3: random directions (fixed stream) plus local refinement.
    rng = np.random.Generator(np.random.Philox(key=0))
    Z = np.abs(rng.standard_normal((4096, d)))
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    vals = _gaussian_deriv_abs(orders, t * Z)
    best = Z[int(np.argmax(vals))]
    for scale in (0.3, 0.1, 0.03, 0.01):
        W = best + scale * rng.standard_normal((512, d))
        W = np.abs(W)
        W /= np.linalg.norm(W, axis=1, keepdims=True)
        W = np.vstack([W, best])
        v = _gaussian_deriv_abs(orders, t * W)
        best = W[int(np.argmax(v))]
    return float(_gaussian_deriv_abs(orders, t * best[None, :])[0])


def _gaussian_deriv_shell_sup(orders: tuple[int, ...], t: float) -> float:
    crit = _gaussian_crit_products(orders)
    best = 0.0
    if crit.size:
        norms = np.linalg.norm(crit, axis=1)
        keep = crit[norms >= t]
        if keep.shape[0]:
            best = float(np.max(_gaussian_deriv_abs(orders, keep)))
    if t > 0.0:
        best = max(best, _sphere_max(orders, t))
    else:
        best = max(best, float(_gaussian_deriv_abs(orders, np.zeros((1, len(orders))))[0]))
    return best


@lru_cache(maxsize=None)
def _gaussian_deriv_lipschitz(orders: tuple[int, ...]) -> float:
    """sup_x ||grad D^s K(x)||_2 by dense grid search with refinement."""
    d = len(orders)
    kmax = max(orders)
    L = max(abs(r) for r in _herme_roots(kmax + 2)) + 4.0 if kmax + 2 > 0 else 6.0

    grads = []
    for j in range(d):
        bumped = tuple(k + (1 if i == j else 0) for i, k in enumerate(orders))
        grads.append(bumped)

    def grad_norm(X):
        acc = np.zeros(X.shape[:-1])
        for g in grads:
            acc += np.square(_gaussian_deriv_abs(g, X))
        return np.sqrt(acc)

    n = {1: 200001, 2: 1201, 3: 101}.get(d, 41)
    axes = [np.linspace(0.0, L, n)] * d  # even in every coordinate
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals = grad_norm(mesh)
    best_idx = int(np.argmax(vals))
    best_pt = mesh[best_idx]
    best = float(vals[best_idx])
    step = L / (n - 1)
    for _ in range(3):
        step /= 8.0
        local = [np.linspace(max(0.0, c - 8 * step), c + 8 * step, 17) for c in best_pt]
        mesh = np.stack(np.meshgrid(*local, indexing="ij"), axis=-1).reshape(-1, d)
        vals = grad_norm(mesh)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best = float(vals[j])
            best_pt = mesh[j]
    return best


_FORMS = {
    "gaussian": Kernel.gaussian,
    "epanechnikov": Kernel.epanechnikov,
    "uniform": Kernel.uniform,
    "triangular": Kernel.triangular,
}


def kernel_from_config(cfg: dict) -> Kernel:
    """Build a kernel from a config mapping {form, dim, [vc_params]}."""
    cfg = dict(cfg)
    form = str(cfg.pop("form")).lower()
    dim = int(cfg.pop("dim"))
    vc = cfg.pop("vc_params", None)
    if cfg:
        raise ValueError(f"unknown kernel config keys: {sorted(cfg)}")
    if form not in _FORMS:
        raise ValueError(f"unknown kernel form {form!r}; choose from {sorted(_FORMS)}")
    kernel = _FORMS[form](dim)
    if vc is not None:
        kernel.vc_params = (float(vc[0]), float(vc[1]))
    return kernel
