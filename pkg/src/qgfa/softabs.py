"""Soft absolute function and the smoothing-parameter solver.

``s(x, eps) = eps * ln(2 cosh(x / eps))`` is an even, smooth surrogate for
``|x|``.  It is always evaluated in the factored form
``|x| + eps * log1p(exp(-2|x|/eps))`` so that nothing overflows for
``eps << |x|``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import BracketError, ParameterError


@dataclass(frozen=True)
class SmoothingParams:
    epsilon_smooth: float
    eta: float
    kappa: float

    def __post_init__(self):
        if not self.epsilon_smooth > 0:
            raise ParameterError(f"epsilon_smooth must be positive, got {self.epsilon_smooth}")
        if not 0 < self.eta < 1:
            raise ParameterError(f"eta must lie in (0, 1), got {self.eta}")
        if not self.kappa >= 1:
            raise ParameterError(f"kappa must be >= 1, got {self.kappa}")


def _check_eps(epsilon_smooth):
    if not np.all(np.asarray(epsilon_smooth) > 0):
        raise ParameterError(f"epsilon_smooth must be positive, got {epsilon_smooth}")


def soft_abs_error(x, epsilon_smooth):
    """Gap ``s(x, eps) - |x| = eps * log1p(exp(-2|x|/eps))``, in ``[0, eps ln 2]``."""
    _check_eps(epsilon_smooth)
    ax = np.abs(x)
    return epsilon_smooth * np.log1p(np.exp(-2.0 * ax / epsilon_smooth))


def soft_abs(x, epsilon_smooth):
    """Soft absolute value of ``x`` (scalar or array)."""
    return np.abs(x) + soft_abs_error(x, epsilon_smooth)


def soft_abs_grad(x, epsilon_smooth):
    _check_eps(epsilon_smooth)
    return np.tanh(np.asarray(x) / epsilon_smooth)


def decay_ratio(y):
    """``(1 - exp(-y)) / y`` with the series ``1 - y/2 + y^2/6 - y^3/24`` near 0."""
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = np.abs(y) < 1e-4
    ys = y[small]
    out[small] = 1.0 - ys / 2.0 + ys * ys / 6.0 - ys**3 / 24.0
    yl = y[~small]
    out[~small] = -np.expm1(-yl) / yl
    return out if out.ndim else float(out)


def _normalize_which(which):
    key = str(getattr(which, "value", which)).lower()
    if key in ("g1",):
        return "g1"
    if key in ("g2", "g2tilde"):
        return "g2"
    raise ParameterError(f"which must be G1 or G2, got {which!r}")


def _rel_error(x, eps, t, which):
    if which == "g1":
        return -np.expm1(-soft_abs_error(x, eps) * t)
    ax = np.abs(x)
    exact = decay_ratio(ax * t)
    smooth = decay_ratio(soft_abs(x, eps) * t)
    return (exact - smooth) / exact


def relative_target_error(x, params: SmoothingParams, t, which):
    """Relative error of the smoothed target against the ``|x|`` target.

    ``which='g1'``: ``1 - exp(-(s - |x|) t)``.
    ``which='g2'``: ``1 - g2~(s t) / g2~(|x| t)`` with ``g2~(y) = (1 - e^-y)/y``.
    """
    which = _normalize_which(which)
    if not np.all(np.asarray(x) > 0):
        raise ParameterError("x must be positive")
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")
    return _rel_error(x, params.epsilon_smooth, t, which)


def solve_epsilon(kappa, t, eta, which, rtol=1e-12):
    """Smoothing parameter ``eps`` with ``r_which(1/kappa, eps) = eta``.

    Bisection on ``[1e-12, 1/kappa]``; the upper end doubles until the
    relative error exceeds ``eta``.
    """
    which = _normalize_which(which)
    if not kappa >= 1:
        raise ParameterError(f"kappa must be >= 1, got {kappa}")
    if not 0 < eta < 1:
        raise ParameterError(f"eta must lie in (0, 1), got {eta}")
    if not t > 0:
        raise ParameterError(f"t must be positive, got {t}")

    x = 1.0 / kappa

    def resid(eps):
        return float(_rel_error(x, eps, t, which)) - eta

    lo, hi = 1e-12, 1.0 / kappa
    if resid(lo) >= 0:
        raise BracketError("relative error already exceeds eta at the lower end", lo, hi)
    for _ in range(200):
        if resid(hi) > 0:
            break
        hi *= 2.0
    else:
        raise BracketError("no sign change while widening the bracket", lo, hi)
    return bisect(resid, lo, hi, xtol=1e-300, rtol=rtol, maxiter=10_000)


def solve_epsilon_pair(kappa, t, eta):
    """``min(eps_g1, eps_g2)``: one smoothing that meets both budgets."""
    return min(solve_epsilon(kappa, t, eta, "g1"), solve_epsilon(kappa, t, eta, "g2"))

