"""Dense statevector simulation of the QET + LCU gradient-flow circuit.

Registers, in tensor-axis order: QSP ancilla ``Q`` (1 qubit), block-encoding
ancillas ``BE`` (``m`` qubits), system (``n`` qubits), LCU ancilla (1 qubit).
Within a register, basis index ``i`` is the usual little-endian integer, so
system basis state ``|i>`` is dof ``i`` of the SpdSystem.

Phases come in the ``Wx-re`` convention of :mod:`qgfa.qsp`.  The circuit
uses projector-controlled rotations ``exp(i theta (2 Pi - I))`` around a
reflection-type block encoding, so the phases are shifted on entry (see
:func:`reflection_phases`).  Hadamards on ``Q`` before and after the QET
sequence average the sequence with its complex conjugate, leaving the real
part of the realized polynomial after post-selecting ``Q = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .approx import ChebyshevFit, Kind
from .errors import LayoutError, ParameterError
from .fem import SpdSystem
from .qsp import CONVENTION, PhaseSequence

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class CircuitLayout:
    n_sys: int
    m_be: int = 1
    n_lcu: int = 1

    def __post_init__(self):
        if self.n_sys < 0 or self.m_be < 1 or self.n_lcu not in (0, 1):
            raise LayoutError(f"invalid layout {self}")

    @property
    def total_qubits(self) -> int:
        return 1 + self.m_be + self.n_sys + self.n_lcu

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (2, 2**self.m_be, 2**self.n_sys, 2**self.n_lcu)

    @classmethod
    def for_dim(cls, dim: int, m_be: int = 1, n_lcu: int = 1) -> "CircuitLayout":
        n = int(dim).bit_length() - 1
        if dim < 1 or 2**n != dim:
            raise LayoutError(f"system dimension {dim} is not a power of two; pad it first")
        return cls(n, m_be, n_lcu)


@dataclass(frozen=True, eq=False)
class BlockEncoding:
    unitary: np.ndarray
    normalization: float
    m_be: int = 1

    @property
    def dim(self) -> int:
        return self.unitary.shape[0] >> self.m_be

    @property
    def top_left(self) -> np.ndarray:
        return self.unitary[: self.dim, : self.dim]


def dilation(k_tilde) -> np.ndarray:
    """Hermitian dilation ``[[A, S], [S, -A]]`` with ``S = sqrt(I - A^2)``."""
    a = np.asarray(k_tilde, dtype=float)
    lam, V = np.linalg.eigh(a)
    if np.max(np.abs(lam)) > 1.0 + 1e-12:
        raise ParameterError(f"normalized matrix has norm {np.max(np.abs(lam))} > 1")
    s = (V * np.sqrt(np.clip(1.0 - lam**2, 0.0, None))) @ V.T
    return np.block([[a, s], [s, -a]])


def block_encode(system: SpdSystem) -> BlockEncoding:
    """One-ancilla block encoding of ``K / ||K||``."""
    CircuitLayout.for_dim(system.dim)
    u = dilation(system.matrix / system.spectral_norm)
    return BlockEncoding(u, system.spectral_norm, 1)


def state_prep(v) -> np.ndarray:
    """Real orthogonal ``W`` with ``W e_0 = v / ||v||`` (Householder completion)."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if not nrm > 0:
        raise ParameterError("cannot prepare the zero vector")
    u = v / nrm
    sign = 1.0 if u[0] >= 0 else -1.0
    w = u.copy()
    w[0] += sign
    h = np.eye(len(u)) - 2.0 * np.outer(w, w) / (w @ w)
    return -sign * h


def reflection_phases(phases) -> np.ndarray:
    """Map ``Wx`` phases to the reflection convention used in the circuit.

    ``W(x) = i e^{-i pi Z/4} R(x) e^{-i pi Z/4}``, so the inner phases shift by
    ``-pi/2``, the outer ones by ``-pi/4`` and the global ``i^d`` is pushed
    into the first rotation, which only matters for the ``<0|.|0>`` entry.
    """
    phi = phases.phases if isinstance(phases, PhaseSequence) else np.asarray(phases, dtype=float)
    d = len(phi) - 1
    if d == 0:
        return phi.copy()
    theta = phi - np.pi / 2
    theta[0] = phi[0] - np.pi / 4 + d * np.pi / 2
    theta[-1] = phi[-1] - np.pi / 4
    return theta


class _Sim:
    """Statevector with the handful of gates the circuit needs."""

    def __init__(self, layout: CircuitLayout, be: BlockEncoding):
        if be.m_be != layout.m_be or be.dim != 2**layout.n_sys:
            raise LayoutError("block encoding does not fit the layout")
        self.layout = layout
        self.be = be
        self.state = np.zeros(layout.shape, dtype=complex)
        self.be_calls = 0
        self.max_drift = 0.0

    def _check(self):
        drift = abs(np.linalg.norm(self.state) - 1.0)
        self.max_drift = max(self.max_drift, drift)

    def load(self, vec_per_lcu):
        """Write ``|0>_Q |0>_BE sum_l vec_l |l>_LCU``."""
        for l, vec in enumerate(vec_per_lcu):
            self.state[0, 0, :, l] = vec
        self._check()

    def hadamard_q(self):
        self.state = np.einsum("ab,b...->a...", _H, self.state)
        self._check()

    def lcu(self, gate):
        self.state = np.einsum("...l,kl->...k", self.state, gate)
        self._check()

    def apply_be(self):
        q, b, n, l = self.state.shape
        flat = self.state.reshape(q, b * n, l)
        self.state = np.einsum("ij,qjl->qil", self.be.unitary, flat).reshape(q, b, n, l)
        self.be_calls += 1
        self._check()

    def _c0m(self):
        # flip Q where every BE ancilla is 0
        self.state[:, 0] = self.state[::-1, 0].copy()

    def rotation(self, theta_per_lcu):
        """``C_{0^m} exp(-i theta_l Z_Q) C_{0^m}`` with ``theta_l`` chosen by the LCU qubit."""
        self._c0m()
        th = np.asarray(theta_per_lcu, dtype=float)
        self.state[0] *= np.exp(-1j * th)
        self.state[1] *= np.exp(1j * th)
        self._c0m()
        self._check()


def _qet_sequence(sim: _Sim, thetas: np.ndarray):
    """Rotation / U_K alternation for ``thetas`` of shape ``(n_lcu_states, d + 1)``."""
    d = thetas.shape[1] - 1
    sim.hadamard_q()
    for j in range(d + 1):
        sim.rotation(thetas[:, j])
        if j < d:
            # U_K and U_K^dagger alternate; the dilation is Hermitian so both are U_K
            sim.apply_be()
    sim.hadamard_q()


def qet_apply(phases: PhaseSequence, be: BlockEncoding, psi) -> tuple[np.ndarray, float, int]:
    """Post-selected ``P(K~) psi`` for the realized (scaled) polynomial ``P``.

    Returns the projected system vector (complex, imaginary part at round-off),
    the success probability ``||P psi||^2 / ||psi||^2`` and the number of
    block-encoding applications.
    """
    psi = np.asarray(psi, dtype=complex)
    layout = CircuitLayout.for_dim(len(psi), be.m_be, n_lcu=0)
    if be.dim != len(psi):
        raise LayoutError(f"state of dim {len(psi)} vs block encoding of dim {be.dim}")
    nrm = np.linalg.norm(psi)
    if not nrm > 0:
        raise ParameterError("psi must be nonzero")
    sim = _Sim(layout, be)
    sim.load([psi / nrm])
    _qet_sequence(sim, reflection_phases(phases)[None, :])
    out = sim.state[0, 0, :, 0] * nrm
    return out, float(np.linalg.norm(out) ** 2 / nrm**2), sim.be_calls


@dataclass(frozen=True, eq=False)
class QgfaOutput:
    u_qc: np.ndarray
    success_probability: float
    alpha: float
    beta: float
    t: float
    mode: str
    be_calls: int = 0
    max_norm_drift: float = 0.0
    max_imag: float = 0.0
    lcu_scale: float = 1.0
    amplitudes: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        doc = {
            "u_qc": self.u_qc.tolist(), "success_probability": self.success_probability,
            "alpha": self.alpha, "beta": self.beta, "t": self.t, "mode": self.mode,
            "be_calls": self.be_calls, "max_norm_drift": self.max_norm_drift,
            "max_imag": self.max_imag, "lcu_scale": self.lcu_scale,
        }
        if self.amplitudes is not None:
            doc["amplitudes"] = [[z.real, z.imag] for z in self.amplitudes.ravel()]
        return doc


def success_probability(output: QgfaOutput) -> float:
    return output.success_probability


def dump_statevector(state, path) -> None:
    """Write a statevector as JSON ``[[re, im], ...]`` in flat (row-major) order."""
    flat = np.asarray(state, dtype=complex).ravel()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"shape": list(np.shape(state)), "amplitudes": [[z.real, z.imag] for z in flat]}, fh)


def _fit_of(branch) -> ChebyshevFit:
    fit = branch.fit if isinstance(branch, PhaseSequence) else branch
    if not isinstance(fit, ChebyshevFit):
        raise ParameterError("ideal_polynomial mode needs a ChebyshevFit (or phases that carry one)")
    return fit


def _scale_of(branch) -> float:
    return branch.scale if isinstance(branch, PhaseSequence) else branch.safety


def _check_branch(branch, kind: Kind, t: float):
    target = branch.target
    if target is None or target.kind is Kind.CONST:
        return
    if target.kind is not kind:
        raise LayoutError(f"expected a {kind.value} branch, got {target.kind.value}")
    if not np.isclose(target.t, t, rtol=1e-12, atol=0.0):
        raise LayoutError(f"branch was built for t={target.t}, run asked for t={t}")


def _unit(v):
    nrm = float(np.linalg.norm(v))
    return (v / nrm if nrm > 0 else np.zeros_like(v, dtype=float)), nrm


def apply_polynomial(system: SpdSystem, poly, v) -> np.ndarray:
    """``V diag(poly(lambda_i / ||K||)) V^T v``."""
    lam, V = system.eig
    return V @ (poly(lam / system.spectral_norm) * (V.T @ v))


def run_qgfa(system: SpdSystem, branch1, branch2, t: float, mode: str = "circuit",
             u0=None, keep_amplitudes: bool = False) -> QgfaOutput:
    """``u_qc = alpha P1(K~) u0^ + beta P2(K~) f^`` with ``alpha = ||u0||``, ``beta = t ||f|| / ||K||``.

    ``branch1`` realizes the G1 fit and ``branch2`` the G2tilde fit (both at
    the same ``t``).  In ``"circuit"`` mode they must be PhaseSequences; in
    ``"ideal_polynomial"`` mode the fits are applied through the
    eigendecomposition.  The returned vector undoes the LCU normalization and
    the fits' safety factors, so it approximates the classical flow at time
    ``t / ||K||``.
    """
    if mode not in ("circuit", "ideal_polynomial"):
        raise ParameterError(f"unknown mode {mode!r}")
    if t < 0:
        raise ParameterError("t must be nonnegative")
    _check_branch(branch1, Kind.G1, t)
    _check_branch(branch2, Kind.G2TILDE, t)

    u0 = system.hot_start if u0 is None else np.asarray(u0, dtype=float)
    u0_hat, alpha = _unit(u0)
    f_hat, f_norm = _unit(system.load)
    beta = t * f_norm / system.spectral_norm
    s1, s2 = _scale_of(branch1), _scale_of(branch2)
    a1, b1 = alpha / s1, beta / s2
    lcu_scale = a1 + b1
    if not lcu_scale > 0:
        raise ParameterError("alpha and beta are both zero; nothing to evolve")

    if mode == "ideal_polynomial":
        p1, p2 = _fit_of(branch1), _fit_of(branch2)
        amp = (a1 * apply_polynomial(system, p1, u0_hat)
               + b1 * apply_polynomial(system, p2, f_hat)) / lcu_scale
        return QgfaOutput(
            lcu_scale * amp, float(amp @ amp), alpha, beta, float(t), mode,
            amplitudes=amp.astype(complex) if keep_amplitudes else None, lcu_scale=lcu_scale,
        )

    if not (isinstance(branch1, PhaseSequence) and isinstance(branch2, PhaseSequence)):
        raise ParameterError("circuit mode needs PhaseSequences for both branches")
    if branch1.convention != CONVENTION or branch2.convention != CONVENTION:
        raise LayoutError("phase convention mismatch")
    if len(branch1.phases) != len(branch2.phases):
        raise LayoutError("both branches must have the same number of phases")

    be = block_encode(system)
    layout = CircuitLayout.for_dim(system.dim)
    sim = _Sim(layout, be)
    # The LCU qubit starts in |0>; S_{a,b} then the controlled state preparations.
    mix = np.array([[np.sqrt(a1), -np.sqrt(b1)], [np.sqrt(b1), np.sqrt(a1)]]) / np.sqrt(lcu_scale)
    e0 = np.zeros(system.dim)
    e0[0] = 1.0
    sim.load([e0, np.zeros(system.dim)])
    sim.lcu(mix)
    w1 = state_prep(u0_hat) if alpha > 0 else np.eye(system.dim)
    w2 = state_prep(f_hat) if beta > 0 else np.eye(system.dim)
    sim.state[..., 0] = np.einsum("ij,qbj->qbi", w1, sim.state[..., 0])
    sim.state[..., 1] = np.einsum("ij,qbj->qbi", w2, sim.state[..., 1])
    sim._check()
    thetas = np.stack([reflection_phases(branch1), reflection_phases(branch2)])
    _qet_sequence(sim, thetas)
    sim.lcu(mix.T)

    amp = sim.state[0, 0, :, 0].copy()
    return QgfaOutput(
        lcu_scale * amp.real, float(np.vdot(amp, amp).real), alpha, beta, float(t), mode,
        be_calls=sim.be_calls, max_norm_drift=sim.max_drift,
        max_imag=float(np.max(np.abs(amp.imag))) * lcu_scale, lcu_scale=lcu_scale,
        amplitudes=amp if keep_amplitudes else None,
    )
