"""Three-level "phaseonium" atoms as a comparison fuel.

Each atom has an excited level and two nearly degenerate ground levels
``g1`` (upper, split by ``delta_g``) and ``g2``. Coherence ``eps e^{i phi}`` is
injected unitarily into the ground manifold before the atom enters the cavity.

The cavity sees a de-excitation prefactor
``mu/4 (p_g1 + p_g2 + 2|eps| cos phi) + kappa (n_env + 1)`` and an excitation
prefactor ``mu/2 p_e + kappa n_env``. The 1/4 versus 1/2 asymmetry between
the two prefactors is intentional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .cavity import CavityParams, SteadyReport, temperature_from_ratio
from .errors import AboveThresholdError, InjectionBoundError


@dataclass(frozen=True)
class PhaseoniumParams:
    T_a: float
    delta_g: float
    omega_c: float = 1.0

    def __post_init__(self):
        if not self.T_a > 0:
            raise ValueError("atomic temperature must be positive")
        if not 0 < self.delta_g < self.omega_c:
            raise ValueError("ground splitting must satisfy 0 < delta_g < omega_c")


@dataclass(frozen=True)
class PhaseoniumState:
    """Thermal populations plus injected ground-state coherence.

    ``pe, pg1, pg2`` are the populations before injection. Injection shifts
    the ground populations to ``pg1 - xi`` and ``pg2 + xi``.
    """

    pe: float
    pg1: float
    pg2: float
    eps_mag: float = 0.0
    phi: float = 0.0
    xi: float = 0.0

    @property
    def eps(self) -> complex:
        return self.eps_mag * complex(math.cos(self.phi), math.sin(self.phi))

    @property
    def coherence_C(self) -> float:
        return 2.0 * self.eps_mag * math.cos(self.phi)

    @property
    def max_eps(self) -> float:
        """Supremum of injectable ``|eps|`` (the bound itself is excluded)."""
        return max(self.pg2 - self.pg1, 0.0) / 2.0

    def thermal_matrix(self) -> np.ndarray:
        return np.diag([self.pe, self.pg1, self.pg2]).astype(complex)

    def matrix(self) -> np.ndarray:
        rho = np.diag([self.pe, self.pg1 - self.xi, self.pg2 + self.xi]).astype(complex)
        rho[1, 2] = self.eps
        rho[2, 1] = np.conj(self.eps)
        return rho


def thermal_phaseonium(params: PhaseoniumParams) -> PhaseoniumState:
    # weights relative to g2; exp of non-positive arguments never overflows
    w_g1 = math.exp(-params.delta_g / params.T_a)
    w_e = math.exp(-params.omega_c / params.T_a)
    Z = 1.0 + w_g1 + w_e
    return PhaseoniumState(pe=w_e / Z, pg1=w_g1 / Z, pg2=1.0 / Z)


def inject_coherence(s: PhaseoniumState, eps_mag: float, phi: float = 0.0) -> PhaseoniumState:
    """Unitarily inject ground-state coherence of magnitude ``eps_mag``.

    Isospectrality fixes the population shift through
    ``(pg1 - xi)(pg2 + xi) - |eps|^2 = pg1 pg2``, i.e.
    ``xi^2 + (pg2 - pg1) xi + |eps|^2 = 0``. The root of smaller magnitude is
    used, so ``xi -> 0`` as ``eps -> 0`` and the ground populations move
    towards each other.
    """
    if eps_mag < 0:
        raise ValueError("eps_mag must be non-negative")
    if eps_mag == 0:
        return replace(s, eps_mag=0.0, phi=float(phi), xi=0.0)
    gap = s.pg2 - s.pg1
    if not 2.0 * eps_mag < gap:
        raise InjectionBoundError(
            f"2|eps| = {2 * eps_mag:.6g} must stay below pg2 - pg1 = {gap:.6g}",
            max_eps=max(gap, 0.0) / 2.0,
        )
    disc = math.sqrt(gap * gap - 4.0 * eps_mag * eps_mag)
    # (-gap + disc)/2 written without cancellation
    xi = -2.0 * eps_mag * eps_mag / (gap + disc)
    return replace(s, eps_mag=float(eps_mag), phi=float(phi), xi=xi)


def phaseonium_rates(s: PhaseoniumState, params: CavityParams) -> tuple[float, float]:
    """``(cooling, heating)`` prefactors of the de-excitation and excitation dissipators."""
    pg_sum = (s.pg1 - s.xi) + (s.pg2 + s.xi)
    cooling = params.mu / 4.0 * (pg_sum + 2.0 * s.eps_mag * math.cos(s.phi)) + params.kappa * (params.n_env + 1.0)
    heating = params.mu / 2.0 * s.pe + params.kappa * params.n_env
    if cooling < 0:
        raise ValueError(f"negative cooling prefactor {cooling:g}: coherence is unphysical")
    return cooling, heating


def threshold_margin(s: PhaseoniumState, params: CavityParams) -> float:
    """Relaxation rate of <n>; positive below threshold."""
    return (
        2.0 * params.kappa
        + params.mu / 2.0 * (s.pg1 + s.pg2 - 2.0 * s.pe)
        + params.mu * s.eps_mag * math.cos(s.phi)
    )


def phaseonium_steady(s: PhaseoniumState, params: CavityParams) -> SteadyReport:
    margin = threshold_margin(s, params)
    if not margin > 0:
        raise AboveThresholdError(f"phaseonium micromaser above threshold (margin {margin:g})")
    cooling, heating = phaseonium_rates(s, params)
    # Boltzmann ratio formed from the two dissipator prefactors, as for the dimer beam
    x = heating / cooling
    n_ss = (2.0 * params.kappa * params.n_env + params.mu * s.pe) / margin
    if params.n_env > 0 and x > 0:
        ratio = math.log(params.x_env) / math.log(x)
    else:
        ratio = None
    return SteadyReport(
        temperature_ratio=ratio,
        boltzmann_x=x,
        mean_photons=n_ss,
        below_threshold=True,
        relaxation_rate=margin,
        temperature=temperature_from_ratio(x, params.omega_c),
    )


def phaseonium_photon_trajectory(n0: float, s: PhaseoniumState, params: CavityParams, t: float) -> float:
    drive = params.mu * s.pe + 2.0 * params.kappa * params.n_env
    rate = threshold_margin(s, params)
    if rate == 0:
        return n0 + drive * t
    n_ss = drive / rate
    return n_ss + (n0 - n_ss) * math.exp(-rate * t)


def coherence_gain(s: PhaseoniumState, params: CavityParams) -> float:
    """``T_c(eps, phi) / T_c(0)`` at the same thermal populations."""
    bare = replace(s, eps_mag=0.0, phi=0.0, xi=0.0)
    T0 = phaseonium_steady(bare, params).temperature
    return phaseonium_steady(s, params).temperature / T0
