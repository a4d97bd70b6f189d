"""Equilibrium structure and transverse normal modes of a linear ion chain.

Lengths inside the Coulomb-crystal problem are expressed in units of
l = (q^2 k_C / (M omega_z^2))^(1/3), which makes the axial potential

    V(u) = sum_i u_i^2 / 2 + sum_{i<j} 1 / |u_i - u_j|

dimensionless and independent of the trap parameters.
"""

import dataclasses
import hashlib
import json
import math

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import (ConvergenceError, InfeasibleTrapError, SchemaError,
                     ZigzagInstabilityError)

CHAIN_SCHEMA = "chain/1"


@dataclasses.dataclass(frozen=True)
class TrapConfig:
    """Harmonic trap frequencies (rad/s) for a chain of n_ions ions."""

    n_ions: int
    omega_x: float
    omega_z: float

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError("n_ions must be >= 1")
        if not (self.omega_x > self.omega_z > 0):
            raise ValueError("need omega_x > omega_z > 0 for a linear chain")

    def to_dict(self) -> dict:
        return {
            "n_ions": self.n_ions,
            "f_x_hz": self.omega_x / (2 * math.pi),
            "f_z_hz": self.omega_z / (2 * math.pi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrapConfig":
        return cls(
            n_ions=int(d["n_ions"]),
            omega_x=2 * math.pi * d["f_x_hz"],
            omega_z=2 * math.pi * d["f_z_hz"],
        )


@dataclasses.dataclass(frozen=True)
class ChainModel:
    """Fixed physical background: positions, transverse modes, Lamb-Dicke couplings.

    mode_freqs are sorted descending, so index 0 is the center-of-mass mode
    at omega_x.  mode_matrix columns are the eigenvectors in the same order;
    lamb_dicke[i, m] couples ion i to mode m.
    """

    trap: TrapConfig
    constants: PhysicalConstants
    positions: np.ndarray
    length_scale: float
    mode_freqs: np.ndarray
    mode_matrix: np.ndarray
    lamb_dicke: np.ndarray

    @property
    def n_ions(self) -> int:
        return self.trap.n_ions

    def fingerprint(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {
            "schema": CHAIN_SCHEMA,
            "trap": self.trap.to_dict(),
            "constants": self.constants.to_dict(),
            "positions": self.positions.tolist(),
            "length_scale_m": self.length_scale,
            "mode_freqs_hz": (self.mode_freqs / (2 * math.pi)).tolist(),
            "mode_matrix": self.mode_matrix.tolist(),
            "lamb_dicke": self.lamb_dicke.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainModel":
        if d.get("schema") != CHAIN_SCHEMA:
            raise SchemaError(f"expected schema {CHAIN_SCHEMA!r}, got {d.get('schema')!r}")
        return cls(
            trap=TrapConfig.from_dict(d["trap"]),
            constants=PhysicalConstants.from_dict(d["constants"]),
            positions=np.asarray(d["positions"], dtype=float),
            length_scale=float(d["length_scale_m"]),
            mode_freqs=2 * math.pi * np.asarray(d["mode_freqs_hz"], dtype=float),
            mode_matrix=np.asarray(d["mode_matrix"], dtype=float),
            lamb_dicke=np.asarray(d["lamb_dicke"], dtype=float),
        )


def potential_gradient(u: np.ndarray) -> np.ndarray:
    """Gradient of the dimensionless axial potential at positions u."""
    diff = u[:, None] - u[None, :]
    dist = np.abs(diff)
    np.fill_diagonal(dist, 1.0)
    coulomb = diff / dist ** 3
    np.fill_diagonal(coulomb, 0.0)
    return u - coulomb.sum(axis=1)


def _potential_hessian(u):
    diff = u[:, None] - u[None, :]
    dist = np.abs(diff)
    np.fill_diagonal(dist, 1.0)
    inv3 = 1.0 / dist ** 3
    np.fill_diagonal(inv3, 0.0)
    hess = -2.0 * inv3
    np.fill_diagonal(hess, 1.0 + 2.0 * inv3.sum(axis=1))
    return hess


def equilibrium_positions(n_ions: int, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Dimensionless equilibrium positions, sorted ascending.

    Damped Newton iteration from a uniformly spaced initial guess; the
    step is halved until the gradient norm decreases.  Deterministic for
    fixed n_ions.
    """
    if n_ions < 1:
        raise ValueError("n_ions must be >= 1")
    if n_ions == 1:
        return np.zeros(1)

    # Uniform spacing with the asymptotic minimum-gap estimate keeps the
    # initial guess in the Newton basin for every N tried (N <= 100).
    spacing = 2.018 / n_ions ** 0.559
    u = (np.arange(n_ions) - (n_ions - 1) / 2.0) * spacing

    grad = potential_gradient(u)
    gnorm = np.max(np.abs(grad))
    for _ in range(max_iter):
        if gnorm < tol:
            break
        step = np.linalg.solve(_potential_hessian(u), grad)
        scale = 1.0
        while scale > 1e-6:
            trial = u - scale * step
            trial_grad = potential_gradient(trial)
            trial_norm = np.max(np.abs(trial_grad))
            if trial_norm < gnorm:
                u, grad, gnorm = trial, trial_grad, trial_norm
                break
            scale *= 0.5
        else:
            break
    if not gnorm < tol:
        raise ConvergenceError(
            f"equilibrium positions did not converge for N={n_ions}: "
            f"max |gradient| = {gnorm:.3e}", residual=gnorm)

    # The crystal is symmetric about the trap center; symmetrizing removes
    # the last rounding asymmetry without disturbing the stationary point.
    u = 0.5 * (u - u[::-1])
    return np.sort(u)


def transverse_modes(positions: np.ndarray, trap: TrapConfig):
    """Transverse mode frequencies (rad/s, descending) and eigenvector matrix.

    Diagonalizes A_ii = (omega_x/omega_z)^2 - sum_{m != i} |u_i - u_m|^-3,
    A_ij = |u_i - u_j|^-3.  Row sums of A are all (omega_x/omega_z)^2, so the
    uniform vector is always an eigenvector: the center-of-mass mode at
    omega_x, which is the highest transverse mode.
    """
    u = np.asarray(positions, dtype=float)
    n = u.size
    ratio2 = (trap.omega_x / trap.omega_z) ** 2
    if n == 1:
        return np.array([trap.omega_x]), np.ones((1, 1))

    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    inv3 = 1.0 / np.abs(diff) ** 3
    a = inv3.copy()
    np.fill_diagonal(a, ratio2 - inv3.sum(axis=1))

    eigvals, eigvecs = np.linalg.eigh(a)
    if eigvals[0] <= 0:
        raise ZigzagInstabilityError(
            f"chain of N={n} is not linear at omega_x/omega_z = "
            f"{math.sqrt(ratio2):.4f}: transverse eigenvalue {eigvals[0]:.3e} <= 0")

    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    # Fix the global sign of each eigenvector: largest-|component| entry positive.
    for m in range(n):
        k = np.argmax(np.abs(eigvecs[:, m]))
        if eigvecs[k, m] < 0:
            eigvecs[:, m] = -eigvecs[:, m]

    freqs = trap.omega_z * np.sqrt(eigvals)
    return freqs, eigvecs


def lamb_dicke_matrix(mode_matrix: np.ndarray, mode_freqs: np.ndarray,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """eta[i, m] = b[i, m] * delta_k * sqrt(hbar / (2 M omega_m))."""
    b = np.asarray(mode_matrix, dtype=float)
    w = np.asarray(mode_freqs, dtype=float)
    if b.shape != (w.size, w.size):
        raise ValueError("mode_matrix and mode_freqs disagree on N")
    if np.any(w <= 0):
        raise ValueError("mode frequencies must be positive")
    x0 = np.sqrt(constants.hbar / (2 * constants.ion_mass * w))
    return b * constants.delta_k * x0[None, :]


def build_chain(trap: TrapConfig,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ChainModel:
    """Assemble the full ChainModel for a trap configuration."""
    positions = equilibrium_positions(trap.n_ions)
    freqs, vecs = transverse_modes(positions, trap)
    eta = lamb_dicke_matrix(vecs, freqs, constants)
    length_scale = (constants.elementary_charge ** 2 * constants.coulomb_constant
                    / (constants.ion_mass * trap.omega_z ** 2)) ** (1.0 / 3.0)
    return ChainModel(trap=trap, constants=constants, positions=positions,
                      length_scale=length_scale, mode_freqs=freqs,
                      mode_matrix=vecs, lamb_dicke=eta)


def tune_trap(n_ions: int, f_low: float = 1e6, f_high: float = 5e6,
              rel_tol: float = 1e-6) -> TrapConfig:
    """Pick trap frequencies placing all transverse modes inside [f_low, f_high].

    omega_x is pinned to 2 pi f_high (the center-of-mass mode).  The axial
    frequency is the largest omega_z keeping the lowest transverse mode at or
    above 2 pi f_low, found by bisection to rel_tol; stiffer axial confinement
    shortens the chain, so the lowest mode is monotone decreasing in omega_z.
    """
    if n_ions < 1:
        raise ValueError("n_ions must be >= 1")
    if not (0 < f_low < f_high):
        raise ValueError("need 0 < f_low < f_high")

    omega_x = 2 * math.pi * f_high
    omega_min = 2 * math.pi * f_low
    positions = equilibrium_positions(n_ions)

    def lowest_mode(omega_z):
        trap = TrapConfig(n_ions=n_ions, omega_x=omega_x, omega_z=omega_z)
        try:
            freqs, _ = transverse_modes(positions, trap)
        except ZigzagInstabilityError:
            return -1.0
        return freqs[-1]

    hi = omega_x * (1 - 1e-9)
    if lowest_mode(hi) >= omega_min:
        return TrapConfig(n_ions=n_ions, omega_x=omega_x, omega_z=hi)

    lo = omega_min * 1e-3
    if lowest_mode(lo) < omega_min:
        raise InfeasibleTrapError(
            f"no omega_z in the bisection bracket keeps the lowest mode above "
            f"{f_low:.3e} Hz for N={n_ions}")

    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if lowest_mode(mid) >= omega_min:
            lo = mid
        else:
            hi = mid
    return TrapConfig(n_ions=n_ions, omega_x=omega_x, omega_z=lo)
