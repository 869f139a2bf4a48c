"""QSP phase factors for parity-definite real polynomials.

Convention (``"Wx-re"``): signal operator
``W(x) = [[x, i sqrt(1-x^2)], [i sqrt(1-x^2), x]]``, phase rotations
``exp(i phi Z)``, sequence ``U = A(phi_0) W A(phi_1) W ... W A(phi_d)`` and
realized polynomial ``Re <0|U|0>``.  Phases are symmetric
(``phi_j = phi_{d-j}``); the solver works on the ``d//2 + 1`` reduced phases
and runs Newton's method on the values at the positive Chebyshev nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .approx import ChebyshevFit, TargetFunction, eval_target
from .errors import ParameterError, SolverError

CONVENTION = "Wx-re"
MAX_ITER = 500


@dataclass(frozen=True, eq=False)
class PhaseSequence:
    phases: np.ndarray
    target: TargetFunction | None = None
    scale: float = 1.0
    residual: float = 0.0
    convention: str = CONVENTION
    fit: ChebyshevFit | None = field(default=None, repr=False)

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float).ravel()
        if phases.size < 1:
            raise ParameterError("a phase sequence needs at least one phase")
        object.__setattr__(self, "phases", phases)

    @property
    def degree(self) -> int:
        """Polynomial degree, equal to the number of signal-operator calls."""
        return len(self.phases) - 1

    @property
    def target_id(self) -> str:
        if self.target is None:
            return "none"
        return ",".join(f"{k}={v}" for k, v in self.target.to_json().items())

    def to_json(self) -> dict:
        doc = {
            "convention": self.convention,
            "phases": self.phases.tolist(),
            "residual": self.residual,
            "scale": self.scale,
            "target": None if self.target is None else self.target.to_json(),
        }
        if self.fit is not None:
            doc["fit"] = self.fit.to_json()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "PhaseSequence":
        if doc.get("convention", CONVENTION) != CONVENTION:
            raise ParameterError(f"unsupported convention {doc['convention']!r}")
        target = doc.get("target")
        fit = doc.get("fit")
        return cls(
            np.asarray(doc["phases"], dtype=float),
            None if target is None else TargetFunction.from_json(target),
            float(doc.get("scale", 1.0)),
            float(doc.get("residual", 0.0)),
            fit=None if fit is None else ChebyshevFit.from_json(fit),
        )


def _as_phases(phases) -> np.ndarray:
    return phases.phases if isinstance(phases, PhaseSequence) else np.asarray(phases, dtype=float)


def _signal(x):
    x = np.asarray(x, dtype=float)
    return x, 1j * np.sqrt(np.clip(1.0 - x * x, 0.0, None))


def qsp_response(phases, x):
    """``Re <0|U_Phi(x)|0>``, vectorized over ``x``."""
    phi = _as_phases(phases)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    c, s = _signal(xa)
    a0 = np.ones_like(xa, dtype=complex)
    a1 = np.zeros_like(a0)
    for j, p in enumerate(phi):
        a0 = a0 * np.exp(1j * p)
        a1 = a1 * np.exp(-1j * p)
        if j < len(phi) - 1:
            a0, a1 = a0 * c + a1 * s, a0 * s + a1 * c
    out = a0.real
    return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])


def qsp_partial_products(phases, x) -> np.ndarray:
    """All partial products ``A_0 W A_1 ... `` as an array ``(2d+1, len(x), 2, 2)``."""
    phi = _as_phases(phases)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    c, s = _signal(xa)
    W = np.empty((len(xa), 2, 2), dtype=complex)
    W[:, 0, 0] = W[:, 1, 1] = c
    W[:, 0, 1] = W[:, 1, 0] = s
    U = np.broadcast_to(np.eye(2, dtype=complex), (len(xa), 2, 2)).copy()
    out = []
    for j, p in enumerate(phi):
        U = U * np.array([np.exp(1j * p), np.exp(-1j * p)])[None, None, :]
        out.append(U.copy())
        if j < len(phi) - 1:
            U = U @ W
            out.append(U.copy())
    return np.stack(out)


def _full_phases(reduced, d):
    return np.concatenate([reduced, reduced[: d + 1 - len(reduced)][::-1]])


def _response_and_jacobian(reduced, d, x):
    """Values ``g(x_k)`` and the Jacobian w.r.t. the reduced phases."""
    phi = _full_phases(reduced, d)
    c, s = _signal(x)
    n = len(x)
    # suffix columns b_j = W A_{j+1} W ... A_d |0>
    b = np.empty((d + 1, n, 2), dtype=complex)
    b[d, :, 0] = 1.0
    b[d, :, 1] = 0.0
    for j in range(d, 0, -1):
        v0 = np.exp(1j * phi[j]) * b[j, :, 0]
        v1 = np.exp(-1j * phi[j]) * b[j, :, 1]
        b[j - 1, :, 0] = c * v0 + s * v1
        b[j - 1, :, 1] = s * v0 + c * v1
    jac_full = np.empty((n, d + 1))
    a0 = np.ones(n, dtype=complex)
    a1 = np.zeros(n, dtype=complex)
    for j in range(d + 1):
        e_p, e_m = np.exp(1j * phi[j]), np.exp(-1j * phi[j])
        jac_full[:, j] = (1j * (a0 * e_p * b[j, :, 0] - a1 * e_m * b[j, :, 1])).real
        a0, a1 = a0 * e_p, a1 * e_m
        if j < d:
            a0, a1 = a0 * c + a1 * s, a0 * s + a1 * c
    values = a0.real
    m = len(reduced)
    jac = jac_full[:, :m].copy()
    for i in range(m):
        mirror = d - i
        if mirror != i:
            jac[:, i] += jac_full[:, mirror]
    return values, jac


def solver_nodes(d: int) -> np.ndarray:
    """Positive Chebyshev nodes ``cos((2k-1) pi / (4 m))``, ``m = d//2 + 1``."""
    m = d // 2 + 1
    k = np.arange(1, m + 1)
    return np.cos((2 * k - 1) * np.pi / (4 * m))


def residual_grid(d: int) -> np.ndarray:
    n = max(2 * (d + 1), 64)
    k = np.arange(n)
    return np.cos(np.pi * (k + 0.5) / n)


def phase_residual(phases, fit: ChebyshevFit) -> float:
    """Max of ``|response - fit|`` over the residual Chebyshev grid."""
    phi = _as_phases(phases)
    x = residual_grid(len(phi) - 1)
    return float(np.max(np.abs(qsp_response(phi, x) - fit(x))))


def find_phases(fit: ChebyshevFit, tol: float = 1e-10, max_iter: int = MAX_ITER) -> PhaseSequence:
    """Symmetric phases whose response reproduces ``fit`` to ``tol``."""
    if tol < 1e-10:
        raise ParameterError("tol must be >= 1e-10")
    d = fit.degree
    if d % 2 != fit.parity:
        raise ParameterError("fit degree and parity disagree")

    if d == 0:
        c0 = float(fit.coefficients[0])
        if abs(c0) > 1:
            raise SolverError("constant exceeds unit norm", abs(c0) - 1)
        phases = np.array([np.arccos(c0)])
    else:
        x = solver_nodes(d)
        target = fit(x)
        reduced = np.zeros(d // 2 + 1)
        reduced[0] = np.pi / 4
        values, jac = _response_and_jacobian(reduced, d, x)
        err = np.max(np.abs(values - target))
        for _ in range(max_iter):
            if err < 1e-14:
                break
            step = np.linalg.lstsq(jac, values - target, rcond=None)[0]
            lam = 1.0
            while True:
                trial = reduced - lam * step
                t_values, t_jac = _response_and_jacobian(trial, d, x)
                t_err = np.max(np.abs(t_values - target))
                if t_err < err or lam < 1e-6:
                    break
                lam *= 0.5
            if t_err >= err:
                break
            reduced, values, jac, err = trial, t_values, t_jac, t_err
        phases = _full_phases(reduced, d)

    seq = PhaseSequence(phases, fit.target, fit.safety, 0.0, fit=fit)
    residual = phase_residual(seq, fit)
    if not residual <= tol:
        raise SolverError(f"phase solve for degree {d} did not reach tol={tol:.1e}", residual)
    return PhaseSequence(phases, fit.target, fit.safety, residual, fit=fit)


@dataclass(frozen=True, eq=False)
class ResponseReport:
    x: np.ndarray
    target: np.ndarray
    response: np.ndarray
    abs_error: np.ndarray

    @property
    def max_abs_error(self) -> float:
        return float(np.max(self.abs_error))

    @property
    def mean_abs_error(self) -> float:
        return float(np.mean(self.abs_error))

    def argmax_in(self, lo: float, hi: float) -> float:
        """Location of the largest error among grid points in ``[lo, hi]``."""
        mask = (self.x >= lo) & (self.x <= hi)
        return float(self.x[mask][np.argmax(self.abs_error[mask])])

    def rows(self):
        return zip(self.x, self.target, self.response, self.abs_error)


def response_report(phases: PhaseSequence, f: TargetFunction, grid: int) -> ResponseReport:
    """Target vs QSP response on ``grid`` uniform points of ``[0, 1]``.

    The response is divided by the sequence's scale so both columns are in
    target units.
    """
    if grid < 2:
        raise ParameterError("grid must have at least 2 points")
    x = np.linspace(0.0, 1.0, grid)
    target = eval_target(f, x)
    response = qsp_response(phases, x) / phases.scale
    return ResponseReport(x, target, response, np.abs(response - target))
