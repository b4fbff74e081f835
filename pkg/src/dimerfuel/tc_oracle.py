"""Brute-force check of the coarse-grained cavity master equation.

A dimer crossing the cavity evolves jointly with the field under the resonant
Tavis-Cummings interaction ``H = g sum_k (a s_k^+ + a^+ s_k^-)`` for a time
``tau``. Tracing out the atoms gives a map ``S(tau)`` on the field, and pairs
arriving at rate ``p`` generate ``p (S - 1)``. To second order in ``g tau``
that generator should equal ``mu (r_+/2 L_e + r_-/2 L_d)`` with
``mu = p (g tau)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decoherence import SIGMA_MINUS, SIGMA_PLUS
from .dimer import DimerState
from .errors import ModelMismatchError
from .qstate import FockSpace, dissipator, matrix_exponential

MAX_G_TAU = 0.05
# residual allowed before declaring the two-dissipator model inadequate,
# in units of (g tau)^4
RESIDUAL_BAND = 1e3
PROBE_LEVELS = 3

_I2 = np.eye(2, dtype=complex)
_COLLECTIVE_PLUS = np.kron(SIGMA_PLUS, _I2) + np.kron(_I2, SIGMA_PLUS)


@dataclass(frozen=True)
class OracleConfig:
    g: float
    tau: float
    p: float = 1.0
    fock_dim: int = 20

    def __post_init__(self):
        if self.g < 0 or self.tau < 0 or self.p <= 0:
            raise ValueError("g and tau must be non-negative and p positive")
        if self.g * self.tau > MAX_G_TAU:
            raise ValueError(f"g*tau = {self.g * self.tau:g} is outside the weak-coupling regime (<= {MAX_G_TAU})")
        if self.fock_dim < PROBE_LEVELS + 4:
            raise ValueError(f"fock_dim must be at least {PROBE_LEVELS + 4}")

    @property
    def g_tau(self) -> float:
        return self.g * self.tau

    @property
    def mu(self) -> float:
        return self.p * self.g_tau ** 2

    def with_tau(self, tau: float) -> "OracleConfig":
        return OracleConfig(self.g, tau, self.p, self.fock_dim)


def interaction_hamiltonian(fock_dim: int, g: float = 1.0) -> np.ndarray:
    F = FockSpace(fock_dim)
    raise_atoms = np.kron(_COLLECTIVE_PLUS, F.a)
    return g * (raise_atoms + raise_atoms.conj().T)


def build_propagator(cfg: OracleConfig) -> np.ndarray:
    """``exp(-i H tau)`` on the atom-major ``4 * fock_dim`` space."""
    return matrix_exponential(interaction_hamiltonian(cfg.fock_dim, cfg.g), -1j * cfg.tau)


class InjectionMap:
    """The field map ``X -> Tr_atoms[U (rho (x) X) U^+]`` for a fixed dimer state."""

    def __init__(self, dimer: DimerState, cfg: OracleConfig):
        N = cfg.fock_dim
        self.fock_dim = N
        U = build_propagator(cfg)
        # blocks[n, i] maps field states for atom input i to atom output n
        self._blocks = U.reshape(4, N, 4, N).transpose(0, 2, 1, 3)
        self._rho = dimer.matrix()

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        B = self._blocks
        out = np.zeros_like(X)
        for i, j in zip(*np.nonzero(self._rho)):
            out += self._rho[i, j] * np.einsum("nab,bc,ndc->ad", B[:, i], X, B[:, j].conj())
        return out

    def matrix(self) -> np.ndarray:
        """Superoperator acting on row-major vectorised matrices."""
        N = self.fock_dim
        cols = []
        for k in range(N * N):
            E = np.zeros(N * N, dtype=complex)
            E[k] = 1.0
            cols.append(self(E.reshape(N, N)).ravel())
        return np.array(cols).T

    def choi(self) -> np.ndarray:
        N = self.fock_dim
        J = np.zeros((N * N, N * N), dtype=complex)
        for i in range(N):
            for j in range(N):
                E = np.zeros((N, N), dtype=complex)
                E[i, j] = 1.0
                J[i * N:(i + 1) * N, j * N:(j + 1) * N] = self(E)
        return J


def injection_superoperator(dimer: DimerState, cfg: OracleConfig) -> InjectionMap:
    return InjectionMap(dimer, cfg)


def _probes(fock_dim: int, levels: int = PROBE_LEVELS):
    F = FockSpace(fock_dim)
    out = [F.projector(n) for n in range(levels)]
    for n in range(levels - 1):
        E = np.zeros((fock_dim, fock_dim), dtype=complex)
        E[n, n + 1] = 1.0
        out += [E, E.T.copy()]
    return out


@dataclass(frozen=True)
class RateEstimate:
    r_plus: float
    r_minus: float
    residual: float
    raw_r_plus: float
    raw_r_minus: float
    g_tau: float


def _fit(dimer: DimerState, cfg: OracleConfig):
    F = FockSpace(cfg.fock_dim)
    S = InjectionMap(dimer, cfg)
    cols, rhs, raw = [], [], []
    for X in _probes(cfg.fock_dim):
        diff = S(X) - X
        raw.append(diff.ravel())
        rhs.append(diff.ravel() / cfg.g_tau ** 2)
        cols.append(np.stack([dissipator(F.a, X).ravel(), dissipator(F.adag, X).ravel()], axis=1))
    A = np.vstack(cols)
    b = np.concatenate(rhs)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    # non-Lindblad remainder of S - 1, in units where mu/p = (g tau)^2
    residual = float(np.linalg.norm(np.concatenate(raw) - cfg.g_tau ** 2 * (A @ coef)))
    a_down, a_up = coef.real
    return 2.0 * a_up, 2.0 * a_down, residual


def extract_rates(dimer: DimerState, cfg: OracleConfig, check: bool = True) -> RateEstimate:
    """Estimate ``r_pm`` by projecting ``p (S - 1)`` onto the two dissipators.

    A single-``tau`` fit carries an ``O((g tau)^2)`` relative bias from the
    quartic part of ``S``; since ``S`` is even in ``tau``, combining fits at
    ``tau`` and ``tau/2`` cancels it and isolates the quadratic coefficient.
    The single-``tau`` estimates are kept in ``raw_r_plus``/``raw_r_minus``.
    ``residual`` is the norm of the part of ``S - 1`` at ``tau`` that the two
    dissipators cannot represent.
    """
    rp1, rm1, residual = _fit(dimer, cfg)
    if check and residual > RESIDUAL_BAND * cfg.g_tau ** 4:
        raise ModelMismatchError(
            f"fit residual {residual:.3e} exceeds {RESIDUAL_BAND:g} (g tau)^4", residual=residual
        )
    rp2, rm2, _ = _fit(dimer, cfg.with_tau(cfg.tau / 2.0))
    return RateEstimate(
        r_plus=(4.0 * rp2 - rp1) / 3.0,
        r_minus=(4.0 * rm2 - rm1) / 3.0,
        residual=residual,
        raw_r_plus=rp1,
        raw_r_minus=rm1,
        g_tau=cfg.g_tau,
    )
