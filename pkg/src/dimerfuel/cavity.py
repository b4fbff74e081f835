"""Cavity mode pumped by a dimer beam and coupled to a thermal environment.

The field obeys a two-dissipator master equation with de-excitation rate
``mu r_-/2 + kappa (n_env + 1)`` and excitation rate ``mu r_+/2 + kappa n_env``,
where ``r_pm = 1 + C +- delta/2``. Below threshold (``mu delta < 2 kappa``) the
steady state is Gibbsian with Boltzmann ratio equal to the ratio of the two
rates.

``mu = r (g tau)^2`` lumps together the pair injection rate ``r``, the coupling
``g`` and the transit time ``tau``; the model assumes ``tau << 1/g`` and
``tau << 1/r``. Only ``mu`` enters the dynamics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dimer import DimerState, DimerSummary, summarize
from .errors import AboveThresholdError, TruncationError
from .qstate import DensityOperator, FockSpace, evolve_ode

DEFAULT_FOCK_DIM = 40
MAX_FOCK_DIM = 640
TRUNCATION_LEAK = 1e-10


def bose_occupation(temperature: float, omega: float = 1.0) -> float:
    if temperature <= 0:
        return 0.0
    return 1.0 / math.expm1(omega / temperature)


def temperature_from_ratio(x: float, omega: float = 1.0) -> float:
    """Temperature of a mode whose populations fall off as ``x**n``."""
    if x <= 0:
        return 0.0
    if x >= 1:
        return math.inf
    return omega / -math.log(x)


@dataclass(frozen=True)
class CavityParams:
    mu: float
    kappa: float
    n_env: float
    omega_c: float = 1.0

    def __post_init__(self):
        if not (self.mu >= 0 and self.n_env >= 0):
            raise ValueError("mu and n_env must be non-negative")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.omega_c > 0:
            raise ValueError("omega_c must be positive")

    @classmethod
    def from_temperature(cls, mu, kappa, T_env, omega_c=1.0):
        return cls(mu, kappa, bose_occupation(T_env, omega_c), omega_c)

    @property
    def T_env(self) -> float:
        return temperature_from_ratio(self.x_env, self.omega_c)

    @property
    def x_env(self) -> float:
        return self.n_env / (self.n_env + 1.0)


@dataclass(frozen=True)
class MaserCoefficients:
    r_plus: float
    r_minus: float


@dataclass(frozen=True)
class SteadyReport:
    """Steady state of the cavity field.

    ``temperature_ratio`` is ``T_c / T_env`` and is ``None`` when the
    environment is at zero temperature; ``temperature`` is always the
    absolute value in units of the mode frequency.
    """

    temperature_ratio: float | None
    boltzmann_x: float
    mean_photons: float
    below_threshold: bool
    relaxation_rate: float
    temperature: float


def summary_of(delta: float, C: float) -> DimerSummary:
    return DimerSummary(delta=delta, coherence_C=C, energy=1.0 + delta / 2.0)


def _summary(s) -> DimerSummary:
    return summarize(s) if isinstance(s, DimerState) else s


def coefficients(summary) -> MaserCoefficients:
    s = _summary(summary)
    return MaserCoefficients(
        r_plus=1.0 + s.coherence_C + s.delta / 2.0,
        r_minus=1.0 + s.coherence_C - s.delta / 2.0,
    )


def lindblad_rates(summary, params: CavityParams) -> tuple[float, float]:
    """``(de-excitation, excitation)`` prefactors of the two dissipators."""
    r = coefficients(summary)
    down = params.mu * r.r_minus / 2.0 + params.kappa * (params.n_env + 1.0)
    up = params.mu * r.r_plus / 2.0 + params.kappa * params.n_env
    return down, up


def relaxation_rate(summary, params: CavityParams) -> float:
    return 2.0 * params.kappa - params.mu * _summary(summary).delta


def below_threshold(summary, params: CavityParams) -> bool:
    # delta < 2 kappa / mu, written without dividing by mu
    return params.mu * _summary(summary).delta < 2.0 * params.kappa


def steady_temperature(summary, params: CavityParams) -> SteadyReport:
    s = _summary(summary)
    if not below_threshold(s, params):
        raise AboveThresholdError(
            f"delta={s.delta:g} >= 2 kappa/mu={2 * params.kappa / params.mu:g}: no finite steady temperature"
        )
    down, up = lindblad_rates(s, params)
    x = up / down
    if not x < 1.0:
        raise AboveThresholdError(f"Boltzmann ratio {x:g} >= 1: no finite steady temperature")
    r = coefficients(s)
    gamma = relaxation_rate(s, params)
    n_ss = (2.0 * params.kappa * params.n_env + params.mu * r.r_plus) / gamma
    if params.n_env > 0 and x > 0:
        ratio = math.log(params.x_env) / math.log(x)
    else:
        ratio = None
    return SteadyReport(
        temperature_ratio=ratio,
        boltzmann_x=x,
        mean_photons=n_ss,
        below_threshold=True,
        relaxation_rate=gamma,
        temperature=temperature_from_ratio(x, params.omega_c),
    )


def heating_condition(summary, params: CavityParams) -> bool:
    """True when the beam heats the cavity above the environment temperature."""
    s = _summary(summary)
    return s.coherence_C > -1.0 - (params.n_env + 0.5) * s.delta


def carnot_bound(t_ratio_hot: float) -> float:
    if not t_ratio_hot > 1.0:
        raise ValueError(f"hot/cold temperature ratio must exceed 1, got {t_ratio_hot}")
    return 1.0 - 1.0 / t_ratio_hot


def photon_number_trajectory(n0: float, summary, params: CavityParams, t: float) -> float:
    """Mean photon number at time ``t`` from the closed-form rate equation."""
    s = _summary(summary)
    r = coefficients(s)
    drive = 2.0 * params.kappa * params.n_env + params.mu * r.r_plus
    gamma = relaxation_rate(s, params)
    if gamma == 0:
        warnings.warn("at threshold: photon number grows linearly", RuntimeWarning, stacklevel=2)
        return n0 + drive * t
    if gamma < 0:
        warnings.warn("above threshold: photon number grows exponentially", RuntimeWarning, stacklevel=2)
    n_ss = drive / gamma
    return n_ss + (n0 - n_ss) * math.exp(-gamma * t)


class MasterEquation:
    """Generator of the pumped, damped cavity on a truncated Fock space."""

    def __init__(self, summary, params: CavityParams, fock_dim: int):
        self.space = FockSpace(fock_dim)
        self.down, self.up = lindblad_rates(summary, params)
        n = np.arange(fock_dim, dtype=float)
        # a and a^+ are single off-diagonal bands, so every term is a shifted,
        # rescaled copy of rho; a a^+ is diag(1, ..., N-1, 0) after truncation
        sq = np.sqrt(n[1:])
        self._jump = np.outer(sq, sq)
        aad = np.append(n[1:], 0.0)
        self._loss = n[:, None] + n[None, :]
        self._gain = aad[:, None] + aad[None, :]

    def __call__(self, rho):
        out = -(self.down * self._loss + self.up * self._gain) * rho
        # 2 a rho a^+ feeds (m, n) from (m+1, n+1); 2 a^+ rho a the reverse
        out[:-1, :-1] += 2.0 * self.down * self._jump * rho[1:, 1:]
        out[1:, 1:] += 2.0 * self.up * self._jump * rho[:-1, :-1]
        return out

    def photon_rate(self, rho) -> float:
        return float(np.trace(self.space.number @ self(rho)).real)


def _check_truncation(rho: np.ndarray):
    p = rho.diagonal().real
    leak = float(p[-2:].sum())
    if leak > TRUNCATION_LEAK:
        raise TruncationError(
            f"population {leak:.2e} in the top two of {len(p)} Fock levels", dim=len(p), leak=leak
        )


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)


# Tiny absolute tolerance: populations are controlled in relative terms so the
# Boltzmann ratio can be read off levels far below unit population.
_RTOL = 1e-10
_ATOL = 1e-30


def evolve_master(rho_c, summary, params: CavityParams, t: float, t_eval=None):
    """Integrate the cavity master equation for time ``t``.

    Returns a :class:`DensityOperator`, or a list of them at ``t_eval``.
    Raises :class:`TruncationError` if the top two Fock levels end up holding
    more than ``1e-10`` of the population.
    """
    rho0 = _matrix(rho_c)
    gen = MasterEquation(summary, params, rho0.shape[0])
    if t_eval is not None:
        out = evolve_ode(gen, rho0, t, t_eval=t_eval, rtol=_RTOL, atol=_ATOL)
        for r in out:
            _check_truncation(r)
        return [DensityOperator(r) for r in out]
    rho = evolve_ode(gen, rho0, t, rtol=_RTOL, atol=_ATOL)
    _check_truncation(rho)
    return DensityOperator(rho)


def embed(rho, fock_dim: int) -> np.ndarray:
    """Pad a cavity matrix with empty levels up to ``fock_dim``."""
    rho = _matrix(rho)
    out = np.zeros((fock_dim, fock_dim), dtype=complex)
    n = rho.shape[0]
    out[:n, :n] = rho
    return out


def relax_to_steady(rho_c, summary, params: CavityParams, rel_tol: float = 1e-12, max_relaxations: float = 60.0):
    """Evolve until ``|d<n>/dt| < rel_tol * <n>``.

    Integration proceeds in legs of one relaxation time ``1/(2 kappa - mu delta)``.
    If round-off keeps the derivative from reaching the relative target (tiny
    ``<n>``), the run stops after ``max_relaxations`` relaxation times, by which
    point the transient is below double precision.
    """
    s = _summary(summary)
    if not below_threshold(s, params):
        raise AboveThresholdError("no steady state above threshold")
    rho = _matrix(rho_c)
    gen = MasterEquation(s, params, rho.shape[0])
    leg = 1.0 / relaxation_rate(s, params)
    elapsed = 0.0
    while True:
        rho = evolve_ode(gen, rho, leg, rtol=_RTOL, atol=_ATOL)
        _check_truncation(rho)
        elapsed += leg
        n = float(np.trace(gen.space.number @ rho).real)
        if abs(gen.photon_rate(rho)) < rel_tol * n or elapsed >= max_relaxations * leg:
            return DensityOperator(rho)


def numeric_steady_state(summary, params: CavityParams, fock_dim: int = DEFAULT_FOCK_DIM, rho0=None):
    """Long-time state from ``rho0`` (vacuum by default), doubling the Fock
    space on truncation overflow."""
    dim = fock_dim
    while True:
        start = FockSpace(dim).projector(0) if rho0 is None else embed(rho0, dim)
        try:
            return relax_to_steady(start, summary, params)
        except TruncationError:
            if dim * 2 > MAX_FOCK_DIM:
                raise
            dim *= 2


def extract_temperature(rho, floor: float = 1e-12, offdiag_tol: float = 1e-8) -> tuple[float, float]:
    """Boltzmann ratio of a diagonal cavity state and its Gibbs-form deviation.

    The ratio is the population-weighted geometric mean of ``p_{n+1}/p_n``
    over consecutive levels that both exceed ``floor``; the deviation is the
    largest relative departure of any such ratio from that mean.
    """
    M = _matrix(rho)
    off = np.abs(M - np.diag(M.diagonal())).sum()
    if off > offdiag_tol:
        raise ValueError(f"state is not diagonal (off-diagonal mass {off:.2e})")
    p = M.diagonal().real
    ok = (p[:-1] > floor) & (p[1:] > floor)
    if not ok.any():
        return 0.0, 0.0
    ratios = p[1:][ok] / p[:-1][ok]
    w = p[:-1][ok]
    x = float(np.exp(np.sum(w * np.log(ratios)) / np.sum(w)))
    dev = float(np.max(np.abs(ratios - x)) / x)
    return x, dev


def mean_photons(rho) -> float:
    M = _matrix(rho)
    return float(np.dot(np.arange(M.shape[0]), M.diagonal().real))
