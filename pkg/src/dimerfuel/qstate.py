"""Dense matrix and truncated Fock-space numerics.

Conventions used throughout the package: hbar = k_B = 1, frequencies in
units of the cavity frequency. Composite atom-cavity spaces are ordered
atom-major, i.e. the basis index of ``|i> (x) |n>`` is ``i * N + n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import IntegrationError, InvalidStateError

HERMITIAN_TOL = 1e-12


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return bool(np.max(np.abs(M - M.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(M), initial=0.0)))


def matrix_exponential(M, scale: complex = 1.0) -> np.ndarray:
    """Return ``exp(scale * M)``.

    Hermitian ``M`` goes through an eigendecomposition, which keeps the
    result unitary to machine precision when ``scale`` is imaginary.
    Everything else uses scaling-and-squaring with a Pade kernel.
    """
    M = _as_square(M)
    if scale == 0:
        return np.eye(M.shape[0], dtype=complex)
    if is_hermitian(M):
        w, v = np.linalg.eigh(M)
        return (v * np.exp(scale * w)) @ v.conj().T
    return scipy.linalg.expm(scale * M)


def eigen_hermitian(M, tol: float = 1e-10):
    """Eigenvalues (ascending) and column eigenvectors of a Hermitian matrix."""
    M = _as_square(M)
    if not is_hermitian(M, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh(0.5 * (M + M.conj().T))


def partial_trace_atoms(rho_total, fock_dim: int, atom_dim: int = 4) -> np.ndarray:
    """Trace out the atomic factor of an atom-major ``atom_dim * fock_dim`` matrix."""
    rho_total = _as_square(rho_total)
    if rho_total.shape[0] != atom_dim * fock_dim:
        raise ValueError(
            f"dimension {rho_total.shape[0]} does not match {atom_dim} x {fock_dim}"
        )
    return np.einsum("inim->nm", rho_total.reshape(atom_dim, fock_dim, atom_dim, fock_dim))


def dissipator(L: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``2 L rho L^+ - L^+ L rho - rho L^+ L`` (note the factor 2 convention)."""
    Ld = L.conj().T
    LdL = Ld @ L
    return 2.0 * L @ rho @ Ld - LdL @ rho - rho @ LdL


@dataclass(frozen=True)
class FockSpace:
    """Single bosonic mode truncated to levels ``0 .. dim-1``."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"Fock dimension must be a positive integer, got {self.dim}")

    @cached_property
    def a(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dim, dtype=float)), 1).astype(complex)

    @cached_property
    def adag(self) -> np.ndarray:
        return self.a.conj().T.copy()

    @cached_property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dim, dtype=float)).astype(complex)

    def basis(self, n: int) -> np.ndarray:
        ket = np.zeros(self.dim, dtype=complex)
        ket[n] = 1.0
        return ket

    def projector(self, n: int) -> np.ndarray:
        P = np.zeros((self.dim, self.dim), dtype=complex)
        P[n, n] = 1.0
        return P

    def thermal(self, x: float) -> np.ndarray:
        """Normalised Gibbs state with Boltzmann ratio ``x`` (``p_{n+1}/p_n = x``)."""
        if not 0.0 <= x < 1.0:
            raise ValueError(f"Boltzmann ratio must lie in [0, 1), got {x}")
        p = x ** np.arange(self.dim, dtype=float)
        return np.diag(p / p.sum()).astype(complex)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Validated density matrix. ``matrix`` is copied and made read-only."""

    matrix: np.ndarray
    trace_tol: float = 1e-10
    psd_tol: float = 1e-8

    def __post_init__(self):
        M = np.array(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InvalidStateError(f"density matrix must be square, got {M.shape}")
        tr = np.trace(M)
        if abs(tr - 1.0) > self.trace_tol:
            raise InvalidStateError(f"trace {tr.real:.3e} differs from 1")
        if not is_hermitian(M, max(self.trace_tol, HERMITIAN_TOL)):
            raise InvalidStateError("density matrix is not Hermitian")
        lam = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
        if lam[0] < -self.psd_tol:
            raise InvalidStateError(f"negative eigenvalue {lam[0]:.3e}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def expect(self, op) -> float:
        return float(np.trace(op @ self.matrix).real)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def evolve_ode(rhs, rho0: np.ndarray, t: float, t_eval=None, rtol: float = 1e-10, atol: float = 1e-12):
    """Integrate ``d rho/dt = rhs(rho)`` with an adaptive 8th-order Dormand-Prince stepper.

    Returns the final matrix, or the stack of matrices at ``t_eval`` when given.
    """
    shape = rho0.shape
    if t == 0 and t_eval is None:
        return np.array(rho0, dtype=complex)

    def f(_, y):
        return rhs(y.reshape(shape)).ravel()

    sol = solve_ivp(
        f,
        (0.0, t),
        np.asarray(rho0, dtype=complex).ravel(),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
    )
    if not sol.success:
        raise IntegrationError(sol.message)
    if t_eval is not None:
        return sol.y.T.reshape((-1,) + shape)
    return sol.y[:, -1].reshape(shape)
