"""Baseline matrix-inverse solver: a single QET branch realizing an odd fit of ``1/x``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approx import ChebyshevFit, Kind, TargetFunction, chebyshev_fit
from .errors import LayoutError, ParameterError
from .fem import SpdSystem
from .flow import relative_error
from .qcirc import apply_polynomial, block_encode, qet_apply
from .qsp import PhaseSequence


@dataclass(frozen=True, eq=False)
class QmiaOutput:
    u_inv: np.ndarray
    success_probability: float
    mode: str
    be_calls: int = 0


def inverse_fit(system: SpdSystem, degree: int, epsilon_apx: float = 1e-3) -> ChebyshevFit:
    """Odd Chebyshev fit of the inverse target for the system's condition number."""
    return chebyshev_fit(TargetFunction.ginv(system.kappa, epsilon_apx), degree)


def run_qmia(system: SpdSystem, phases_inv, mode: str = "circuit") -> QmiaOutput:
    """``u_inv = P(K~) f / ||K||`` with ``P`` the unscaled inverse fit.

    In ``"circuit"`` mode ``phases_inv`` must be a PhaseSequence; the
    post-selected amplitude is ``P_scaled(K~) f^`` and the scale is restored
    from ``||f||`` and the fit's safety factor.
    """
    if mode not in ("circuit", "ideal_polynomial"):
        raise ParameterError(f"unknown mode {mode!r}")
    target = phases_inv.target
    if target is not None and target.kind is not Kind.GINV:
        raise LayoutError(f"expected an inverse branch, got {target.kind.value}")
    if target is not None and not np.isclose(target.kappa, system.kappa, rtol=1e-9):
        raise LayoutError(f"fit built for kappa={target.kappa}, system has {system.kappa}")

    f = system.load
    f_norm = float(np.linalg.norm(f))
    if not f_norm > 0:
        raise ParameterError("load vector is zero")
    norm_k = system.spectral_norm

    if mode == "ideal_polynomial":
        fit = phases_inv.fit if isinstance(phases_inv, PhaseSequence) else phases_inv
        if not isinstance(fit, ChebyshevFit):
            raise ParameterError("ideal_polynomial mode needs a ChebyshevFit")
        amp = apply_polynomial(system, fit, f / f_norm)
        return QmiaOutput(f_norm * amp / (fit.safety * norm_k), float(amp @ amp), mode)

    if not isinstance(phases_inv, PhaseSequence):
        raise ParameterError("circuit mode needs a PhaseSequence")
    amp, prob, calls = qet_apply(phases_inv, block_encode(system), f / f_norm)
    return QmiaOutput(f_norm * amp.real / (phases_inv.scale * norm_k), prob, mode, calls)


def relative_error_inv(u_inv, u_star) -> float:
    """``||u_inv - u*|| / ||u*||``."""
    return relative_error(u_inv, u_star)
