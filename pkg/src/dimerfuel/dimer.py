"""Two-atom X states in the basis ``{|ee>, |eg>, |ge>, |gg>}``.

Only the single-excitation coherence ``c23 = <eg|rho|ge>`` is allowed off the
diagonal; it is the coherence that shifts the cavity temperature without
displacing or squeezing the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError
from .qstate import eigen_hermitian

TRACE_TOL = 1e-12
PPT_BAND = 1e-10

EE, EG, GE, GG = range(4)


@dataclass(frozen=True)
class DimerState:
    p11: float
    p22: float
    p33: float
    p44: float
    c23: complex = 0.0

    def matrix(self) -> np.ndarray:
        rho = np.diag([self.p11, self.p22, self.p33, self.p44]).astype(complex)
        rho[EG, GE] = self.c23
        rho[GE, EG] = np.conj(self.c23)
        return rho

    @classmethod
    def from_matrix(cls, rho, tol: float = 1e-10) -> "DimerState":
        """Read an X-structured 4x4 matrix back into a state.

        Entries outside the diagonal and the ``eg/ge`` pair must vanish within
        ``tol``; small negative populations from round-off are clipped.
        """
        rho = np.asarray(rho, dtype=complex)
        mask = np.ones((4, 4), dtype=bool)
        np.fill_diagonal(mask, False)
        mask[EG, GE] = mask[GE, EG] = False
        stray = np.max(np.abs(rho[mask]))
        if stray > tol:
            raise InvalidStateError(f"matrix is not of dimer X form (stray element {stray:.2e})")
        p = np.clip(rho.diagonal().real, 0.0, None)
        p = p / p.sum()
        c = 0.5 * (rho[EG, GE] + np.conj(rho[GE, EG]))
        bound = math.sqrt(p[1] * p[2])
        if abs(c) > bound:
            c = c * (bound / abs(c))
        return cls(float(p[0]), float(p[1]), float(p[2]), float(p[3]), complex(c))


@dataclass(frozen=True)
class DimerSummary:
    delta: float
    coherence_C: float
    energy: float


def make_dimer(p11: float, p22: float, p33: float, p44: float, c23: complex = 0.0) -> DimerState:
    """Build a validated dimer state; raises :class:`InvalidStateError` if unphysical."""
    pops = (p11, p22, p33, p44)
    if not all(math.isfinite(p) for p in pops) or not np.isfinite(c23):
        raise InvalidStateError("dimer entries must be finite")
    if any(p < 0 for p in pops):
        raise InvalidStateError(f"negative population in {pops}")
    if abs(sum(pops) - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"populations sum to {sum(pops)!r}, not 1")
    if abs(c23) ** 2 > p22 * p33 + TRACE_TOL:
        raise InvalidStateError(
            f"|c23|^2 = {abs(c23) ** 2:.6g} exceeds p22*p33 = {p22 * p33:.6g}"
        )
    return DimerState(float(p11), float(p22), float(p33), float(p44), complex(c23))


def psi_plus() -> DimerState:
    return make_dimer(0.0, 0.5, 0.5, 0.0, 0.5)


def psi_minus() -> DimerState:
    return make_dimer(0.0, 0.5, 0.5, 0.0, -0.5)


def rho_mix() -> DimerState:
    return make_dimer(0.0, 0.5, 0.5, 0.0, 0.0)


def excited() -> DimerState:
    return make_dimer(1.0, 0.0, 0.0, 0.0)


def ground() -> DimerState:
    return make_dimer(0.0, 0.0, 0.0, 1.0)


NAMED_STATES = {
    "psi_plus": psi_plus,
    "psi_minus": psi_minus,
    "rho_mix": rho_mix,
    "ee": excited,
    "gg": ground,
}


def summarize(s: DimerState) -> DimerSummary:
    delta = 2.0 * (s.p11 - s.p44)
    return DimerSummary(
        delta=delta,
        coherence_C=2.0 * complex(s.c23).real,
        # 2 p11 + p22 + p33 in units of the transition energy
        energy=1.0 + delta / 2.0,
    )


def partial_transpose(rho) -> np.ndarray:
    """Transpose the second atom of a 4x4 two-qubit matrix."""
    return np.asarray(rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def min_pt_eigenvalue(s: DimerState) -> float:
    lam, _ = eigen_hermitian(partial_transpose(s.matrix()))
    return float(lam[0])


def is_entangled(s: DimerState) -> bool:
    """Peres-Horodecki test; the boundary ``|c23|^2 = p11 p44`` counts as separable.

    The closed-form condition is cross-checked against the spectrum of the
    partial transpose whenever that spectrum is clear of zero.
    """
    closed = abs(s.c23) ** 2 > s.p11 * s.p44
    lam_min = min_pt_eigenvalue(s)
    if abs(lam_min) > PPT_BAND and closed != (lam_min < 0):
        raise AssertionError(
            f"PPT disagreement: closed form {closed}, min eigenvalue {lam_min:.3e}"
        )
    return closed


def max_coherence(delta: float) -> float:
    """Largest ``|C|`` compatible with positivity at inversion ``delta``."""
    if abs(delta) > 2.0:
        raise ValueError(f"|delta| must not exceed 2, got {delta}")
    return 1.0 - abs(delta) / 2.0


def maximally_heating_state(delta: float, p44: float | None = None) -> DimerState:
    """State with ``C = 1 - |delta|/2`` at the given inversion.

    The ground population is forced by positivity: ``p44 = 0`` for
    ``delta >= 0`` and ``p44 = |delta|/2`` otherwise. If ``p44`` is passed it
    must match. The single-excitation populations are split symmetrically.
    """
    if not -2.0 < delta < 2.0:
        raise ValueError(f"delta must lie in (-2, 2), got {delta}")
    required = 0.0 if delta >= 0 else -delta / 2.0
    if p44 is None:
        p44 = required
    elif abs(p44 - required) > TRACE_TOL:
        raise ValueError(
            f"p44={p44} is inconsistent with delta={delta}; only p44={required} admits C = 1 - |delta|/2"
        )
    c = 0.5 - abs(delta) / 4.0
    p11 = p44 + delta / 2.0
    p_single = 0.5 * (1.0 - p11 - p44)
    return make_dimer(max(p11, 0.0), p_single, p_single, p44, c)
