"""Decoherence of the dimer beam on its way to the cavity.

Two independent single-atom channels are supported: pure dephasing (PDC) and
thermal emission/absorption (GADC). Closed forms are provided for both, plus
a direct integration of the two-atom Lindblad equation that serves as an
oracle for the closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dimer import EG, GE, DimerState, summarize
from .qstate import dissipator, evolve_ode

# single-atom operators in the (e, g) basis
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
_I2 = np.eye(2, dtype=complex)


class ChannelKind(str, enum.Enum):
    PDC = "PDC"
    GADC = "GADC"


@dataclass(frozen=True)
class TransferChannel:
    """Decoherence acting during the transfer time ``t_tr``.

    ``gamma_d`` is used by PDC only; ``gamma`` and ``n_env`` by GADC only.
    """

    kind: ChannelKind
    t_tr: float
    gamma_d: float = 0.0
    gamma: float = 0.0
    n_env: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        for name in ("t_tr", "gamma_d", "gamma", "n_env"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")

    def after(self, t_tr: float) -> "TransferChannel":
        return TransferChannel(self.kind, t_tr, self.gamma_d, self.gamma, self.n_env)


def evolve_pdc(s: DimerState, ch: TransferChannel) -> DimerState:
    if ch.kind is not ChannelKind.PDC:
        raise ValueError(f"expected a PDC channel, got {ch.kind.value}")
    decay = math.exp(-8.0 * ch.gamma_d * ch.t_tr)
    return DimerState(s.p11, s.p22, s.p33, s.p44, s.c23 * decay)


def gad_kraus(gamma: float, n_env: float, t: float) -> list[np.ndarray]:
    """Kraus operators of the single-atom generalized amplitude-damping channel.

    The excited population relaxes at rate ``gamma (2 n_env + 1)`` towards
    ``n_env / (2 n_env + 1)``; single-atom coherences decay at half that rate.
    """
    total = gamma * (2.0 * n_env + 1.0)
    lam = -math.expm1(-total * t)
    p_down = (n_env + 1.0) / (2.0 * n_env + 1.0)
    keep = math.sqrt(1.0 - lam)
    # (e, g) ordering: index 0 is excited
    return [
        math.sqrt(p_down) * np.array([[keep, 0], [0, 1]], dtype=complex),
        math.sqrt(p_down) * np.array([[0, 0], [math.sqrt(lam), 0]], dtype=complex),
        math.sqrt(1 - p_down) * np.array([[1, 0], [0, keep]], dtype=complex),
        math.sqrt(1 - p_down) * np.array([[0, math.sqrt(lam)], [0, 0]], dtype=complex),
    ]


def evolve_gadc(s: DimerState, ch: TransferChannel) -> DimerState:
    """Apply the product of two single-atom GAD channels to the dimer."""
    if ch.kind is not ChannelKind.GADC:
        raise ValueError(f"expected a GADC channel, got {ch.kind.value}")
    if ch.t_tr == 0 or ch.gamma == 0:
        return s
    K = gad_kraus(ch.gamma, ch.n_env, ch.t_tr)
    rho = s.matrix()
    out = np.zeros((4, 4), dtype=complex)
    for A in K:
        for B in K:
            E = np.kron(A, B)
            out += E @ rho @ E.conj().T
    return DimerState.from_matrix(out)


def evolve(s: DimerState, ch: TransferChannel) -> DimerState:
    if ch.kind is ChannelKind.PDC:
        return evolve_pdc(s, ch)
    return evolve_gadc(s, ch)


def gadc_closed_form(delta0: float, C0: float, gamma_t: float, n_env: float) -> tuple[float, float]:
    """``(delta, C)`` after GADC evolution for dimensionless time ``gamma * t_tr``."""
    w = 2.0 * n_env + 1.0
    decay = math.exp(-w * gamma_t)
    return (2.0 / w + delta0) * decay - 2.0 / w, C0 * decay


def _two_atom_ops():
    out = {}
    for label, op in (("z", SIGMA_Z), ("m", SIGMA_MINUS), ("p", SIGMA_PLUS)):
        out[label] = (np.kron(op, _I2), np.kron(_I2, op))
    return out


_OPS = _two_atom_ops()


def dimer_generator(ch: TransferChannel):
    """Right-hand side of the two-atom master equation for channel ``ch``."""
    if ch.kind is ChannelKind.PDC:
        g = ch.gamma_d

        def rhs(rho):
            # sum_i gamma_d (2 sz rho sz - 2 rho); dissipator(sz) equals that since sz^2 = 1
            return g * sum(dissipator(sz, rho) for sz in _OPS["z"])

        return rhs

    down = 0.5 * ch.gamma * (ch.n_env + 1.0)
    up = 0.5 * ch.gamma * ch.n_env

    def rhs(rho):
        out = np.zeros_like(rho)
        for sm, sp in zip(_OPS["m"], _OPS["p"]):
            out += down * dissipator(sm, rho) + up * dissipator(sp, rho)
        return out

    return rhs


def lindblad_dimer_oracle(s: DimerState, ch: TransferChannel, steps: int = 1, xtol: float = 1e-10) -> DimerState:
    """Integrate the full 4x4 Lindblad equation numerically.

    The transfer time is split into ``steps`` equal legs; after each leg the
    matrix is checked to still be of X form within ``xtol``.
    """
    if steps < 1:
        raise ValueError("steps must be a positive integer")
    rho = s.matrix()
    if ch.t_tr == 0:
        return s
    rhs = dimer_generator(ch)
    dt = ch.t_tr / steps
    for _ in range(steps):
        rho = evolve_ode(rhs, rho, dt, rtol=1e-12, atol=1e-14)
        DimerState.from_matrix(rho, tol=xtol)
    return DimerState.from_matrix(rho, tol=xtol)


def oracle_matrix(s: DimerState, ch: TransferChannel) -> np.ndarray:
    """Raw 4x4 output of the Lindblad integration (no X-form projection)."""
    return evolve_ode(dimer_generator(ch), s.matrix(), ch.t_tr, rtol=1e-12, atol=1e-14)


def transfer_summary(s: DimerState, ch: TransferChannel):
    return summarize(evolve(s, ch))
