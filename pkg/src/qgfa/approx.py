"""Scalar QSP targets and their parity-restricted Chebyshev fits."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.fft import dct
from scipy.optimize import minimize_scalar

from .errors import FitQualityError, ParameterError
from .softabs import decay_ratio, soft_abs

SAFETY_MARGIN = 1e-4


class Kind(str, enum.Enum):
    G1 = "g1"
    G2TILDE = "g2tilde"
    GINV = "ginv"
    CONST = "const"


@dataclass(frozen=True)
class TargetFunction:
    """Tagged target.  ``G1``/``G2TILDE`` use ``t`` and ``epsilon_smooth``;
    ``GINV`` uses ``kappa`` and ``epsilon_apx``; ``CONST`` uses ``value``."""

    kind: Kind
    t: float | None = None
    epsilon_smooth: float | None = None
    kappa: float | None = None
    epsilon_apx: float | None = None
    value: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind in (Kind.G1, Kind.G2TILDE):
            if self.t is None or self.epsilon_smooth is None:
                raise ParameterError(f"{self.kind.value} needs t and epsilon_smooth")
            if self.t < 0 or not self.epsilon_smooth > 0:
                raise ParameterError("t must be >= 0 and epsilon_smooth > 0")
        elif self.kind is Kind.GINV:
            if self.kappa is None or self.epsilon_apx is None:
                raise ParameterError("ginv needs kappa and epsilon_apx")
            if not (self.kappa >= 1 and 0 < self.epsilon_apx < 1):
                raise ParameterError("ginv needs kappa >= 1 and 0 < epsilon_apx < 1")
        elif self.value is None or abs(self.value) > 1:
            raise ParameterError("const needs |value| <= 1")

    @classmethod
    def g1(cls, t, epsilon_smooth):
        return cls(Kind.G1, t=float(t), epsilon_smooth=float(epsilon_smooth))

    @classmethod
    def g2tilde(cls, t, epsilon_smooth):
        return cls(Kind.G2TILDE, t=float(t), epsilon_smooth=float(epsilon_smooth))

    @classmethod
    def ginv(cls, kappa, epsilon_apx):
        return cls(Kind.GINV, kappa=float(kappa), epsilon_apx=float(epsilon_apx))

    @classmethod
    def constant(cls, value):
        return cls(Kind.CONST, value=float(value))

    @property
    def parity(self) -> int:
        return 1 if self.kind is Kind.GINV else 0

    @property
    def exponent(self) -> float:
        """``kappa^2 ln(kappa/epsilon_apx)`` of the inverse target."""
        return self.kappa**2 * math.log(self.kappa / self.epsilon_apx)

    def domain_of_interest(self) -> tuple[float, float]:
        if self.kind is Kind.GINV:
            return 1.0 / self.kappa, 1.0
        return 0.0, 1.0

    def to_json(self) -> dict:
        return {k: v for k, v in {
            "kind": self.kind.value, "t": self.t, "epsilon_smooth": self.epsilon_smooth,
            "kappa": self.kappa, "epsilon_apx": self.epsilon_apx, "value": self.value,
        }.items() if v is not None}

    @classmethod
    def from_json(cls, doc: dict) -> "TargetFunction":
        return cls(**doc)


def _eval(f: TargetFunction, x: np.ndarray) -> np.ndarray:
    if f.kind is Kind.G1:
        return np.exp(-soft_abs(x, f.epsilon_smooth) * f.t)
    if f.kind is Kind.G2TILDE:
        return decay_ratio(soft_abs(x, f.epsilon_smooth) * f.t)
    if f.kind is Kind.GINV:
        b = f.exponent
        out = np.zeros_like(x)
        nz = x != 0
        xn = x[nz]
        with np.errstate(divide="ignore"):
            out[nz] = -np.expm1(b * np.log1p(-xn * xn)) / xn
        return out
    return np.full_like(x, f.value)


def eval_target(f: TargetFunction, x):
    """Target value at ``x`` in ``[-1, 1]`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0):
        raise ParameterError("x must lie in [-1, 1]")
    out = _eval(f, np.atleast_1d(xa).copy())
    return out.reshape(xa.shape) if xa.ndim else float(out[0])


def qmia_degree(kappa: float, epsilon_apx: float) -> int:
    """Degree ``ceil(sqrt(b log(4b/eps)))`` with ``b = kappa^2 log(kappa/eps)``."""
    if not (kappa >= 1 and 0 < epsilon_apx < 1):
        raise ParameterError("need kappa >= 1 and 0 < epsilon_apx < 1")
    b = kappa**2 * math.log(kappa / epsilon_apx)
    return math.ceil(math.sqrt(b * math.log(4.0 * b / epsilon_apx)))


@dataclass(frozen=True, eq=False)
class ChebyshevFit:
    """Chebyshev series ``sum_k c_k T_k`` realized by QSP.

    ``coefficients`` already include ``safety`` (so ``|p| <= 1 - 1e-4``);
    entries of the wrong parity are exactly zero.  ``sup_error`` compares the
    unscaled series ``p / safety`` with the target on the domain of interest.
    """

    target: TargetFunction
    degree: int
    coefficients: np.ndarray
    safety: float
    sup_error: float
    parity: int

    def __call__(self, x):
        return cheb.chebval(x, self.coefficients)

    def unscaled(self, x):
        return cheb.chebval(x, self.coefficients) / self.safety

    @property
    def parity_coefficients(self) -> np.ndarray:
        return self.coefficients[self.parity::2]

    def to_json(self) -> dict:
        return {
            "target": self.target.to_json(),
            "degree": self.degree,
            "coefficients": self.coefficients.tolist(),
            "safety": self.safety,
            "sup_error": self.sup_error,
            "parity": self.parity,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ChebyshevFit":
        return cls(
            TargetFunction.from_json(doc["target"]), int(doc["degree"]),
            np.asarray(doc["coefficients"], dtype=float), float(doc["safety"]),
            float(doc["sup_error"]), int(doc["parity"]),
        )


def chebyshev_nodes(n: int) -> np.ndarray:
    """First-kind Chebyshev nodes ``cos(pi (k + 1/2) / n)``, ``k = 0..n-1``."""
    k = np.arange(n)
    return np.cos(np.pi * (k + 0.5) / n)


def interpolate(func, n_nodes: int) -> np.ndarray:
    """Coefficients of the degree ``n_nodes - 1`` interpolant at first-kind nodes."""
    values = func(chebyshev_nodes(n_nodes))
    c = dct(values, type=2) / n_nodes
    c[0] /= 2.0
    return c


def validation_grid(f: TargetFunction, degree: int) -> np.ndarray:
    lo, hi = f.domain_of_interest()
    return np.linspace(lo, hi, max(10 * degree, 1000) + 1)


def sup_norm_estimate(coefficients, degree: int, oversample: int = 32, refine: int = 8) -> float:
    """Max of ``|p|`` over ``[-1, 1]``.

    ``p(cos theta)`` is a cosine series, so it is sampled on a uniform angle
    grid of ``oversample * (degree + 1)`` intervals with one DCT-I; the
    ``refine`` largest local maxima are then polished with a bounded scalar
    search.
    """
    c = np.asarray(coefficients, dtype=float)
    m = max(oversample * (degree + 1), 64)
    a = np.zeros(m + 1)
    a[: len(c)] = c
    a[0] *= 2.0
    vals = np.abs(dct(a, type=1) / 2.0)
    theta = np.pi * np.arange(m + 1) / m
    best = float(vals.max())
    order = np.argsort(vals)[::-1][:refine]
    for j in order:
        lo, hi = theta[max(j - 1, 0)], theta[min(j + 1, m)]
        res = minimize_scalar(lambda th: -abs(cheb.chebval(np.cos(th), c)),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def chebyshev_fit(f: TargetFunction, degree: int, grid_size: int | None = None) -> ChebyshevFit:
    """Fit ``f`` by interpolation at ``grid_size`` Chebyshev nodes (default ``degree + 1``).

    The series is truncated to ``degree``, the wrong-parity coefficients are
    zeroed, and the result is rescaled so that ``|p| <= 1 - 1e-4``.  An even
    target asked for an odd degree keeps degree ``degree - 1`` (and vice
    versa); the effective degree is stored.
    """
    if degree < 0:
        raise ParameterError("degree must be >= 0")
    parity = f.parity
    n_nodes = degree + 1 if grid_size is None else int(grid_size)
    if n_nodes < degree + 1:
        raise ParameterError("grid_size must be at least degree + 1")
    effective = degree if degree % 2 == parity else degree - 1
    if effective < 0:
        raise ParameterError(f"no polynomial of parity {parity} has degree <= {degree}")

    c_all = interpolate(lambda x: eval_target(f, x), n_nodes)
    c = np.zeros(effective + 1)
    c[parity::2] = c_all[parity:effective + 1:2]

    sup = sup_norm_estimate(c, effective)
    safety = 1.0 if sup == 0 else min(1.0, (1.0 - SAFETY_MARGIN) / sup)

    xv = validation_grid(f, effective)
    err = float(np.max(np.abs(cheb.chebval(xv, c) - eval_target(f, xv))))
    scale_ref = float(np.max(np.abs(eval_target(f, xv))))
    if not np.isfinite(err) or not np.all(np.isfinite(c)) or err > max(scale_ref, 1.0):
        raise FitQualityError(f"fit of {f.kind.value} at degree {effective} is unusable", err)
    return ChebyshevFit(f, effective, c * safety, safety, err, parity)
