# dimension.py
# Estimation of the volume dimension from ball-probability decay (exact
# oracles or the empirical measure), plus the comparison estimators:
# box-counting dimension (greedy covers) and correlation dimension
# (pairwise-distance counts).
#
# The limiting definitions carry no finite-sample recipe; the estimators
# here are windowed log-log slopes, and every fit reports its maximal
# log-residual so pre-asymptotic curvature is visible to the caller.

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import ReferenceDistribution

__all__ = [
    "RateFit",
    "RadiusSweep",
    "fit_loglog",
    "voldim_sweep",
    "voldim_estimate",
    "assumption_check",
    "box_dimension_estimate",
    "correlation_dimension_estimate",
    "dyadic_radii",
    "write_radius_sweep_csv",
    "write_rate_fit_csv",
]

_BUCKET_THRESHOLD = 100_000
_CHUNK = 64


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of a log-log relationship over a radius window."""

    slope: float
    intercept: float
    r_window: tuple[float, float]
    residual: float
    n_points: int = 0


@dataclass(frozen=True)
class RadiusSweep:
    """sup_x of the ball probability at each radius, largest radius first."""

    radii: np.ndarray
    sup_probs: np.ndarray
    source: str

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        p = np.asarray(self.sup_probs, dtype=float)
        order = np.argsort(-r)
        object.__setattr__(self, "radii", r[order])
        object.__setattr__(self, "sup_probs", p[order])
        if np.any((self.sup_probs < 0) | (self.sup_probs > 1)):
            raise ValueError("sup_probs must lie in [0, 1]")


def fit_loglog(x, y, window: tuple[float, float] | None = None) -> RateFit:
    """OLS slope of log y against log x restricted to x in [window]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (float(x.min()), float(x.max()))
    keep = (x >= window[0] - 1e-15) & (x <= window[1] + 1e-15)
    x, y = x[keep], y[keep]
    if x.size < 4:
        raise ValueError(f"need at least 4 points inside the window, got {x.size}")
    if np.any(y <= 0):
        bad = float(x[np.argmax(y <= 0)])
        raise ValueError(f"nonpositive value at x = {bad:g}: log-log fit undefined")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return RateFit(float(slope), float(intercept), (float(window[0]), float(window[1])), residual, int(x.size))


def dyadic_radii(diameter: float, j_min: int = 3, j_max: int = 8, per_octave: int = 2) -> np.ndarray:
    """Radii 2^-j * diameter for j in [j_min, j_max], descending."""
    js = np.linspace(j_min, j_max, (j_max - j_min) * per_octave + 1)
    return diameter * 2.0 ** (-js)


def _empirical_counts(sample: np.ndarray, X: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Counts of sample points strictly inside B(x, r); shape (len(radii), len(X)).

    Exact linear scan below the bucket threshold; above it, a grid-bucket
    index with identical output.
    """
    n = sample.shape[0]
    if n <= _BUCKET_THRESHOLD:
        out = np.zeros((radii.size, X.shape[0]), dtype=np.int64)
        for lo in range(0, X.shape[0], _CHUNK):
            hi = min(lo + _CHUNK, X.shape[0])
            diff = X[lo:hi, None, :] - sample[None, :, :]
            d2 = np.einsum("ijk,ijk->ij", diff, diff)
            for i, r in enumerate(radii):
                out[i, lo:hi] = (d2 < r * r).sum(axis=1)
        return out
    out = np.zeros((radii.size, X.shape[0]), dtype=np.int64)
    for i, r in enumerate(radii):
        cells: dict[tuple, list[int]] = {}
        keys = np.floor(sample / r).astype(np.int64)
        for idx, key in enumerate(map(tuple, keys)):
            cells.setdefault(key, []).append(idx)
        d = sample.shape[1]
        offsets = np.stack(np.meshgrid(*([np.arange(-1, 2)] * d), indexing="ij"), axis=-1).reshape(-1, d)
        for j, x in enumerate(X):
            base = np.floor(x / r).astype(np.int64)
            cand: list[int] = []
            for off in offsets:
                cand.extend(cells.get(tuple(base + off), ()))
            if cand:
                pts = sample[np.asarray(cand)]
                d2 = ((pts - x) ** 2).sum(axis=1)
                out[i, j] = int((d2 < r * r).sum())
    return out


def voldim_sweep(source, x_grid, radii) -> RadiusSweep:
    """Radius sweep of sup_x P(B(x, r)) from a distribution oracle or a sample.

    ``source`` is a ReferenceDistribution (oracle ball probabilities) or an
    (n, d) array (empirical frequencies, open balls).  ``x_grid`` supplies
    the candidate supremum locations (an EvalGrid or raw points).
    """
    X = np.atleast_2d(np.asarray(getattr(x_grid, "points", x_grid), dtype=float))
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if isinstance(source, ReferenceDistribution):
        probs = np.empty(radii.size)
        for i, r in enumerate(radii):
            probs[i] = max(source.ball_prob(x, float(r)) for x in X)
        return RadiusSweep(radii, probs, "oracle")
    sample = np.atleast_2d(np.asarray(source, dtype=float))
    counts = _empirical_counts(sample, X, radii)
    probs = counts.max(axis=1) / sample.shape[0]
    return RadiusSweep(radii, probs, f"empirical(n={sample.shape[0]})")


def voldim_estimate(source, x_grid, radii, window: tuple[float, float] | None = None) -> RateFit:
    """Volume-dimension estimate: slope of log sup_x P(B(x, r)) vs log r."""
    sweep = voldim_sweep(source, x_grid, radii)
    try:
        return fit_loglog(sweep.radii, sweep.sup_probs, window)
    except ValueError as exc:
        raise ValueError(f"volume-dimension fit failed: {exc}") from exc


def assumption_check(dist: ReferenceDistribution, x_grid, radii, nu: float) -> dict:
    """Ratio diagnostics P(B(x,r)) / r^nu over the (x, r) grid.

    ``max_ratio`` is the maximum over all (x, r) (finite under the
    upper-decay assumption at nu = d_vol); ``min_liminf_ratio`` is the max
    over x of the minimum over the small-radius half of the sweep (positive
    under the lower-decay assumption).
    """
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    X = np.atleast_2d(np.asarray(getattr(x_grid, "points", x_grid), dtype=float))
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    ratios = np.empty((X.shape[0], radii.size))
    for j, x in enumerate(X):
        for i, r in enumerate(radii):
            ratios[j, i] = dist.ball_prob(x, float(r)) / r**nu
    small = radii.size // 2
    per_x_min = ratios[:, small:].min(axis=1)
    return {"max_ratio": float(ratios.max()), "min_liminf_ratio": float(per_x_min.max())}


def _greedy_cover_count(sample: np.ndarray, delta: float) -> int:
    """Greedy ball cover with centers at the lowest-index uncovered points."""
    n = sample.shape[0]
    alive = np.arange(n)
    count = 0
    d2max = delta * delta
    while alive.size:
        center = sample[alive[0]]
        count += 1
        d2 = ((sample[alive] - center) ** 2).sum(axis=1)
        alive = alive[d2 > d2max]
    return count


def box_dimension_estimate(sample, delta_grid) -> RateFit:
    """Box-counting dimension: slope of log N(delta) against -log delta."""
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    deltas = np.sort(np.asarray(delta_grid, dtype=float))[::-1]
    if deltas.size < 4:
        raise ValueError("need at least 4 deltas")
    counts = np.array([_greedy_cover_count(sample, float(dl)) for dl in deltas], dtype=float)
    if np.all(counts == 1):
        warnings.warn("degenerate sample: greedy cover is a single ball at every delta")
        return RateFit(0.0, 0.0, (float(deltas.min()), float(deltas.max())), 0.0, int(deltas.size))
    lx = -np.log(deltas)
    ly = np.log(counts)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return RateFit(float(slope), float(intercept), (float(deltas.min()), float(deltas.max())), residual, int(deltas.size))


def correlation_dimension_estimate(sample, r_grid) -> RateFit:
    """Correlation dimension: slope of the log pair-fraction against log r.

    The pair fraction is the U-statistic (2/(n(n-1))) #{i<j : ||X_i - X_j|| <= r}.
    """
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    n = sample.shape[0]
    if n < 100:
        raise ValueError("need at least 100 sample points")
    radii = np.sort(np.asarray(r_grid, dtype=float))
    if radii.size < 4:
        raise ValueError("need at least 4 radii")
    edges = np.concatenate([[0.0], radii])
    hist = np.zeros(radii.size, dtype=np.int64)
    chunk = max(1, _CHUNK * 64 // max(1, n // 1000))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        diff = sample[lo:hi, None, :] - sample[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        # keep strict upper-triangle pairs only
        cols = np.arange(n)[None, :]
        rows = np.arange(lo, hi)[:, None]
        vals = d[cols > rows]
        hist += np.histogram(vals, bins=edges)[0]
    counts = np.cumsum(hist).astype(float)
    fracs = counts / (n * (n - 1) / 2.0)
    keep = fracs > 0
    if not keep.all():
        warnings.warn(f"zero pair count below r = {radii[~keep].max():g}; shrinking the window")
    radii, fracs = radii[keep], fracs[keep]
    if radii.size < 4:
        raise ValueError("fewer than 4 radii with nonzero pair counts")
    lx, ly = np.log(radii), np.log(fracs)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return RateFit(float(slope), float(intercept), (float(radii.min()), float(radii.max())), residual, int(radii.size))


def write_radius_sweep_csv(sweep: RadiusSweep, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,sup_prob\n")
        for r, p in zip(sweep.radii, sweep.sup_probs):
            fh.write(f"{r:.17g},{p:.17g}\n")


def write_rate_fit_csv(fit: RateFit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("slope,intercept,r_min,r_max,residual,n_points\n")
        fh.write(
            f"{fit.slope:.17g},{fit.intercept:.17g},{fit.r_window[0]:.17g},"
            f"{fit.r_window[1]:.17g},{fit.residual:.17g},{fit.n_points}\n"
        )
