"""Process families: Fourier symbols, jump densities, weak scaling estimates.

A model is a pure-jump symmetric process on the line that moves only by
jumps whose intensity nu(r) decreases in the jump size.  It is described by
two radial evaluators: the symbol psi (frequency domain) and the jump
density nu (space domain), related by ``psi(xi) = int (1 - cos(xi z)) nu(z) dz``.

The toolkit works under a standing power-growth hypothesis: the symbol must
grow super-linearly at high frequency.  ``estimate_scaling`` certifies this
numerically as extremal chord slopes of log psi over a geometric frequency
grid, and ``require_valid_scaling`` refuses models that fail the check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import stable

__all__ = [
    "LevyModel",
    "ScalingReport",
    "stable_model",
    "stable_mixture_model",
    "truncated_stable_model",
    "custom_model",
    "model_from_config",
    "eval_psi",
    "eval_nu",
    "psi_from_nu",
    "estimate_scaling",
    "check_unimodal",
    "check_levy_integrability",
    "require_valid_scaling",
]


@dataclass(frozen=True)
class LevyModel:
    """Immutable description of one process; safe to share across threads."""

    family: str                       # stable | stable-mixture | truncated-stable | custom
    psi: Callable[[np.ndarray], np.ndarray]
    nu: Callable[[np.ndarray], np.ndarray]
    alpha: float | None = None        # stability index for family == "stable"
    params: tuple = ()                # hashable family parameters, for caching and reports

    def key(self) -> tuple:
        return (self.family, self.alpha, self.params)

    def describe(self) -> dict:
        return {"family": self.family, "alpha": self.alpha, "params": list(self.params)}


def stable_model(alpha: float) -> LevyModel:
    """Symmetric stable process with symbol |xi|^alpha, alpha in (1, 2)."""
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"stability index must lie in (1, 2), got {alpha}")
    c = stable.levy_density_constant(alpha)

    def psi(xi):
        return np.abs(np.asarray(xi, dtype=float)) ** alpha

    def nu(r):
        return c * np.asarray(r, dtype=float) ** (-1.0 - alpha)

    return LevyModel("stable", psi, nu, alpha=alpha, params=(("alpha", alpha),))


def stable_mixture_model(alphas, weights) -> LevyModel:
    """Mixture of stable symbols, psi(xi) = sum w_i |xi|^(alpha_i)."""
    alphas = tuple(float(a) for a in alphas)
    weights = tuple(float(w) for w in weights)
    if len(alphas) != len(weights) or not alphas:
        raise ValueError("alphas and weights must be nonempty and of equal length")
    if any(not 0.0 < a < 2.0 for a in alphas):
        raise ValueError("mixture indices must lie in (0, 2)")
    if any(w <= 0 for w in weights):
        raise ValueError("mixture weights must be positive")
    consts = [w * _density_constant_any(a) for a, w in zip(alphas, weights)]

    def psi(xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        return sum(w * xi ** a for a, w in zip(alphas, weights))

    def nu(r):
        r = np.asarray(r, dtype=float)
        return sum(c * r ** (-1.0 - a) for a, c in zip(alphas, consts))

    return LevyModel("stable-mixture", psi, nu,
                     params=(("alphas", alphas), ("weights", weights)))


def _density_constant_any(alpha: float) -> float:
    # density constant valid on all of (0, 2) except 1, via the reflection identity
    if abs(alpha - 1.0) < 1e-12:
        return 1.0 / math.pi
    from scipy.special import gamma as _g
    return -1.0 / (2.0 * _g(-alpha) * math.cos(math.pi * alpha / 2.0))


def truncated_stable_model(alpha: float, radius: float) -> LevyModel:
    """Stable jump density cut off beyond a fixed radius.

    The density matches the stable one below the cutoff, so all small-scale
    kernels are unchanged; only tails (and the low-frequency symbol) differ.
    The symbol has no closed form and is evaluated by quadrature of nu.
    """
    if not 1.0 < alpha < 2.0:
        raise ValueError(f"stability index must lie in (1, 2), got {alpha}")
    if radius <= 0:
        raise ValueError("truncation radius must be positive")
    c = stable.levy_density_constant(alpha)

    def nu(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= radius, c * r ** (-1.0 - alpha), 0.0)

    def psi(xi):
        arr = np.abs(np.asarray(xi, dtype=float))
        flat = np.atleast_1d(arr).ravel()
        out = np.array([_psi_truncated_scalar(alpha, c, radius, float(x)) for x in flat])
        return out.reshape(arr.shape) if arr.shape else float(out[0])

    return LevyModel("truncated-stable", psi, nu, alpha=alpha,
                     params=(("alpha", alpha), ("radius", float(radius))))


def _psi_truncated_scalar(alpha: float, c: float, radius: float, x: float) -> float:
    if x == 0.0:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(lambda z: 2.0 * np.sin(0.5 * x * z) ** 2 * z ** (-1.0 - alpha),
                                0.0, radius, limit=400)
    return 2.0 * c * val


def custom_model(nu: Callable, psi: Callable | None = None, name: str = "custom") -> LevyModel:
    """Model from a user jump density; the symbol defaults to quadrature of nu."""
    if psi is None:
        def quad_psi(xi):
            arr = np.asarray(xi, dtype=float)
            flat = np.atleast_1d(arr).ravel()
            out = np.array([_psi_by_quadrature(nu, float(t)) for t in flat])
            return out.reshape(arr.shape) if arr.shape else float(out[0])
        psi = quad_psi
    return LevyModel("custom", psi, nu, params=(("name", name),))


def model_from_config(cfg: dict) -> LevyModel:
    """Build a model from a key-value description (see README for the schema)."""
    family = cfg.get("family")
    if family == "stable":
        return stable_model(float(cfg["alpha"]))
    if family == "stable-mixture":
        return stable_mixture_model(cfg["alphas"], cfg.get("weights", [1.0] * len(cfg["alphas"])))
    if family == "truncated-stable":
        return truncated_stable_model(float(cfg["alpha"]), float(cfg["truncation_radius"]))
    raise ValueError(f"unknown model family: {family!r}")


# ---------------------------------------------------------------------------
# evaluators


def eval_psi(model: LevyModel, xi):
    """Symbol at frequency xi >= 0."""
    arr = np.asarray(xi, dtype=float)
    if np.any(arr < 0):
        raise ValueError("frequency must be nonnegative")
    return model.psi(arr)


def eval_nu(model: LevyModel, r):
    """Jump density at radius r > 0."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("radius must be positive")
    return model.nu(arr)


def _psi_by_quadrature(nu: Callable, x: float) -> float:
    """Symbol from the jump density: 2 int_0^inf (1 - cos(x z)) nu(z) dz.

    Rescaled to unit frequency so the oscillatory tail is well conditioned
    for every x.
    """
    if x == 0.0:
        return 0.0
    x = abs(x)

    def g(u):
        return nu(u / x) / x

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, _ = integrate.quad(lambda u: 2.0 * np.sin(0.5 * u) ** 2 * g(u),
                                 0.0, 10.0, limit=400, epsabs=0.0, epsrel=1e-11)
        flat, _ = integrate.quad(lambda t: 10.0 / (t * t) * g(10.0 / t), 0.0, 1.0,
                                 limit=400, epsabs=1e-16, epsrel=1e-11)
        osc, _ = integrate.quad(g, 10.0, np.inf, weight="cos", wvar=1.0,
                                limit=400, epsabs=1e-12)
    return 2.0 * (head + flat - osc)


def psi_from_nu(model: LevyModel, xi) -> float:
    """Quadrature evaluation of the symbol from the jump density (cross-check path)."""
    arr = np.asarray(xi, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    out = np.array([_psi_by_quadrature(model.nu, float(t)) for t in flat])
    return out.reshape(arr.shape) if arr.shape else float(out[0])


# ---------------------------------------------------------------------------
# scaling certification


@dataclass(frozen=True)
class ScalingReport:
    """Empirical power-growth brackets of the symbol on a geometric grid.

    ``alpha_low``/``c_low`` bound psi from below under dilation, with the
    exponent taken as the infimum of chord slopes of log psi (all grid pairs)
    and the constant fitted on the same pairs.  ``alpha_high``/``C_high`` are
    the supremum analog.  The ``*_1`` pair repeats the lower bracket using
    only frequencies above one; the standing hypothesis requires its exponent
    to exceed one.  Constants are empirical brackets, not sharp.
    """

    alpha_low: float
    c_low: float
    alpha_high: float
    C_high: float
    alpha_low_1: float
    c_low_1: float
    theta_min: float
    theta_max: float
    n_grid: int
    ok: bool = True
    reason: str = ""

    @property
    def standing_assumption(self) -> bool:
        return self.ok and self.alpha_low_1 > 1.0

    def to_dict(self) -> dict:
        return {
            "alpha_low": self.alpha_low, "c_low": self.c_low,
            "alpha_high": self.alpha_high, "C_high": self.C_high,
            "alpha_low_1": self.alpha_low_1, "c_low_1": self.c_low_1,
            "theta_min": self.theta_min, "theta_max": self.theta_max,
            "n_grid": self.n_grid, "ok": self.ok, "reason": self.reason,
            "standing_assumption": self.standing_assumption,
        }


def estimate_scaling(model: LevyModel, theta_min: float = 1e-3, theta_max: float = 1e3,
                     n_grid: int | None = None) -> ScalingReport:
    """Estimate power-growth brackets of the symbol over [theta_min, theta_max].

    Defaults to 64 grid points per decade.  Chord slopes are computed for
    every ordered grid pair; non-monotone symbol samples make the report
    fail rather than extrapolate.
    """
    if not 0 < theta_min < theta_max:
        raise ValueError("need 0 < theta_min < theta_max")
    if n_grid is None:
        n_grid = max(16, int(round(64 * np.log10(theta_max / theta_min))))
    if n_grid < 16:
        raise ValueError("n_grid must be at least 16")

    theta = np.geomspace(theta_min, theta_max, n_grid)
    vals = np.asarray(eval_psi(model, theta), dtype=float)

    def failed(reason):
        return ScalingReport(np.nan, np.nan, np.nan, np.nan, np.nan, np.nan,
                             theta_min, theta_max, n_grid, ok=False, reason=reason)

    if np.any(vals <= 0):
        return failed("nonpositive symbol samples")
    if np.any(np.diff(vals) < -1e-12 * vals[:-1]):
        return failed("non-monotone symbol samples")

    lt, lv = np.log(theta), np.log(vals)
    dlt = lt[None, :] - lt[:, None]
    dlv = lv[None, :] - lv[:, None]
    pair = dlt > 0
    slopes = np.where(pair, dlv / np.where(pair, dlt, 1.0), np.nan)

    a_low = float(np.nanmin(slopes))
    a_high = float(np.nanmax(slopes))
    c_low = float(min(1.0, np.exp(np.nanmin(np.where(pair, dlv - a_low * dlt, np.nan)))))
    C_high = float(max(1.0, np.exp(np.nanmax(np.where(pair, dlv - a_high * dlt, np.nan)))))

    above = theta >= 1.0
    if np.count_nonzero(above) >= 2:
        sub = slopes[np.ix_(above, above)]
        a_low_1 = float(np.nanmin(sub))
        psub = pair[np.ix_(above, above)]
        c_low_1 = float(min(1.0, np.exp(np.nanmin(np.where(
            psub, dlv[np.ix_(above, above)] - a_low_1 * dlt[np.ix_(above, above)], np.nan)))))
    else:
        a_low_1, c_low_1 = np.nan, np.nan

    return ScalingReport(a_low, c_low, a_high, C_high, a_low_1, c_low_1,
                         theta_min, theta_max, n_grid, ok=True)


def require_valid_scaling(model: LevyModel, **kwargs) -> ScalingReport:
    """Certify the standing hypothesis (super-linear growth above frequency one)."""
    rep = estimate_scaling(model, **kwargs)
    if not rep.ok:
        raise ValueError(f"scaling estimation failed: {rep.reason}")
    if not rep.standing_assumption:
        raise ValueError(
            f"model rejected: lower scaling exponent above frequency one is "
            f"{rep.alpha_low_1:.4f} <= 1")
    return rep


def check_unimodal(model: LevyModel, n_grid: int = 256,
                   r_min: float = 1e-6, r_max: float = 1e2) -> bool:
    """True iff the jump density is nonincreasing on a geometric radius grid."""
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    r = np.geomspace(r_min, r_max, n_grid)
    v = np.asarray(eval_nu(model, r), dtype=float)
    return bool(np.all(np.diff(v) <= 1e-12 * np.maximum(v[:-1], 1e-300)))


def check_levy_integrability(model: LevyModel) -> float:
    """Quadrature value of int (1 ^ z^2) nu(z) dz; raises if it diverges."""
    head, _ = integrate.quad(lambda z: z * z * model.nu(z), 0.0, 1.0, limit=200)
    tail, _ = integrate.quad(lambda t: model.nu(1.0 / t) / (t * t), 0.0, 1.0, limit=200)
    total = 2.0 * (head + tail)
    if not np.isfinite(total):
        raise ValueError("jump density fails the integrability requirement")
    return total
