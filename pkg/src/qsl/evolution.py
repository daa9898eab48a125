"""State propagation under rotated time-dependent Hamiltonians.

The systems handled here have an instantaneous Hamiltonian obtained by
conjugating a fixed Hermitian operator H with the unitary group generated by
a second Hermitian operator A:

    H(t) = exp(-iAt) H exp(+iAt)

The Schroedinger-picture propagator factors exactly as
exp(-iAt) exp(-i(H-A)t), which is what `propagate_exact` applies. A classical
fixed-step 4th-order integrator of the same equation of motion is provided as
an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, DomainError, StepTooLarge
from .linalg import (
    DEFAULT_OCCUPATION_TOL,
    HermitianOperator,
    PureState,
    _level_groups,
)

NORM_DRIFT_TOL = 1e-6


def bloch_operators() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Axis operators for two-level Bloch coordinates.

    The first basis vector sits on the positive x axis: X = diag(1, -1),
    Y = i(|e1><e2| - |e2><e1|), Z = |e1><e2| + |e2><e1|.
    """
    x = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    y = np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex)
    z = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return x, y, z


class RotatedHamiltonianSystem:
    """A fixed Hermitian pair (H, A) plus an initial pure state."""

    def __init__(self, H: HermitianOperator, A: HermitianOperator, initial: PureState):
        if not (H.dim == A.dim == initial.dim):
            raise DimensionMismatch(
                f"dims differ: H {H.dim}, A {A.dim}, state {initial.dim}"
            )
        self.H = H
        self.A = A
        self.initial = initial

    @property
    def dim(self) -> int:
        return self.H.dim

    @cached_property
    def effective(self) -> HermitianOperator:
        """The rotating-frame generator H - A."""
        return HermitianOperator(self.H.entries - self.A.entries)

    @cached_property
    def is_isolated(self) -> bool:
        return float(np.linalg.norm(self.A.entries)) <= 1e-14 * (
            1.0 + float(np.linalg.norm(self.H.entries))
        )

    def hamiltonian_at(self, t: float) -> HermitianOperator:
        """The instantaneous Hamiltonian exp(-iAt) H exp(+iAt)."""
        a, V = self.A.eig
        phases = np.exp(-1j * a * float(t))
        rot = (V * phases) @ V.conj().T
        return HermitianOperator(rot @ self.H.entries @ rot.conj().T)

    def __repr__(self) -> str:
        return f"RotatedHamiltonianSystem(dim={self.dim})"


def _frame_states(sys: RotatedHamiltonianSystem, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotating-frame and Schroedinger states at the given times, one per row."""
    mu, W = sys.effective.eig
    a, V = sys.A.eig
    u0 = sys.initial.amplitudes
    times = np.asarray(times, dtype=float)

    c0 = W.conj().T @ u0
    phi = (np.exp(-1j * np.outer(times, mu)) * c0) @ W.T
    d = phi @ V.conj()
    psi = (np.exp(-1j * np.outer(times, a)) * d) @ V.T
    return phi, psi


def propagate_exact(sys: RotatedHamiltonianSystem, t: float) -> PureState:
    """State at time t via the factored propagator exp(-iAt) exp(-i(H-A)t)."""
    _, psi = _frame_states(sys, np.array([float(t)]))
    return PureState.normalized(psi[0])


def fidelity_function(sys: RotatedHamiltonianSystem):
    """Fast scalar map t -> fidelity between the evolved and initial states."""
    mu, W = sys.effective.eig
    a, V = sys.A.eig
    u0 = sys.initial.amplitudes
    c0 = W.conj().T @ u0

    def fid(t: float) -> float:
        phi = W @ (np.exp(-1j * mu * t) * c0)
        psi = V @ (np.exp(-1j * a * t) * (V.conj().T @ phi))
        overlap = np.vdot(u0, psi)
        return overlap.real**2 + overlap.imag**2

    return fid


def rotating_frame(sys: RotatedHamiltonianSystem, t: float, state_at_t: PureState) -> PureState:
    """Apply exp(+iAt); the result evolves under the time-independent H - A."""
    if state_at_t.dim != sys.dim:
        raise DimensionMismatch(f"state dim {state_at_t.dim} != system dim {sys.dim}")
    a, V = sys.A.eig
    phases = np.exp(1j * a * float(t))
    return PureState.normalized(V @ (phases * (V.conj().T @ state_at_t.amplitudes)))


def propagate_numeric(sys: RotatedHamiltonianSystem, t: float, step: float) -> PureState:
    """Integrate the Schroedinger equation with the instantaneous H(t).

    Classical fixed-step 4th-order scheme with renormalization after every
    step. Raises StepTooLarge if the pre-renormalization norm drift of any
    step exceeds 1e-6, which signals an unreliable step size.
    """
    if step <= 0:
        raise DomainError("step must be positive")
    if t < 0:
        raise DomainError("t must be nonnegative")

    a, V = sys.A.eig
    h_tilde = V.conj().T @ sys.H.entries @ V
    freq = np.subtract.outer(a, a)  # freq[j,k] = a_j - a_k

    def h_at(time: float) -> np.ndarray:
        return V @ (h_tilde * np.exp(-1j * freq * time)) @ V.conj().T

    psi = sys.initial.amplitudes.copy()
    n_full = int(t // step)
    tail = t - n_full * step
    sizes = [step] * n_full + ([tail] if tail > 1e-15 else [])

    time = 0.0
    h_here = h_at(0.0)
    for h in sizes:
        h_mid = h_at(time + h / 2)
        h_next = h_at(time + h)
        k1 = -1j * (h_here @ psi)
        k2 = -1j * (h_mid @ (psi + (h / 2) * k1))
        k3 = -1j * (h_mid @ (psi + (h / 2) * k2))
        k4 = -1j * (h_next @ (psi + h * k3))
        psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > NORM_DRIFT_TOL:
            raise StepTooLarge(
                f"norm drift {abs(norm - 1.0):.3e} at t={time + h:.6g} "
                f"exceeds {NORM_DRIFT_TOL}; reduce the step"
            )
        psi = psi / norm
        time += h
        h_here = h_next
    return PureState(psi)


@dataclass
class Trajectory:
    """Uniformly sampled evolution record with per-sample observables.

    The energy observables refer to the instantaneous Hamiltonian H(t) and
    are identical in both pictures; `fidelity` and `bloch` describe the curve
    drawn by the states of the requested frame. `occupations[i, k]` is the
    weight on level `levels[k]` at `times[i]`.
    """

    times: np.ndarray
    states: np.ndarray
    fidelity: np.ndarray
    exp_energy: np.ndarray
    energy_uncertainty: np.ndarray
    eps_min: np.ndarray
    eps_max: np.ndarray
    norm_energy: np.ndarray
    dual_norm_energy: np.ndarray
    levels: np.ndarray
    occupations: np.ndarray
    bloch: np.ndarray | None
    frame: str = "schrodinger"

    @property
    def n_samples(self) -> int:
        return len(self.times)


def sample_trajectory(
    sys: RotatedHamiltonianSystem,
    t_max: float,
    n: int,
    *,
    occupation_tol: float = DEFAULT_OCCUPATION_TOL,
    frame: str = "schrodinger",
) -> Trajectory:
    """Evaluate the evolution at n+1 uniform times from 0 to t_max inclusive."""
    if t_max <= 0:
        raise DomainError("t_max must be positive")
    if n < 2:
        raise DomainError("need at least 2 sampling intervals")
    if frame not in ("schrodinger", "rotating"):
        raise DomainError(f"unknown frame {frame!r}")

    times = np.linspace(0.0, float(t_max), n + 1)
    phi, psi = _frame_states(sys, times)

    # Spectral observables of H(t) in psi_t equal those of H in the
    # rotating-frame state phi_t, since both pictures differ by exp(-iAt).
    lam, U = sys.H.eig
    weights = np.abs(phi @ U.conj()) ** 2
    exp_energy = weights @ lam
    # centered second moment: no cancellation noise for near-stationary states
    centered = lam[None, :] - exp_energy[:, None]
    energy_uncertainty = np.sqrt(np.maximum((weights * centered**2).sum(axis=1), 0.0))

    groups = _level_groups(lam)
    levels = np.array([lam[g].mean() for g in groups])
    occupations = np.column_stack([weights[:, g].sum(axis=1) for g in groups])

    occupied = occupations > occupation_tol
    eps_min = np.where(occupied, levels, np.inf).min(axis=1)
    eps_max = np.where(occupied, levels, -np.inf).max(axis=1)
    norm_energy = exp_energy - eps_min
    dual_norm_energy = eps_max - exp_energy

    frame_states = psi if frame == "schrodinger" else phi
    u0 = sys.initial.amplitudes
    overlaps = frame_states @ u0.conj()
    fid = overlaps.real**2 + overlaps.imag**2

    bloch = None
    if sys.dim == 2:
        cross = frame_states[:, 0].conj() * frame_states[:, 1]
        bloch = np.column_stack(
            [
                np.abs(frame_states[:, 0]) ** 2 - np.abs(frame_states[:, 1]) ** 2,
                -2.0 * cross.imag,
                2.0 * cross.real,
            ]
        )

    return Trajectory(
        times=times,
        states=frame_states,
        fidelity=fid,
        exp_energy=exp_energy,
        energy_uncertainty=energy_uncertainty,
        eps_min=eps_min,
        eps_max=eps_max,
        norm_energy=norm_energy,
        dual_norm_energy=dual_norm_energy,
        levels=levels,
        occupations=occupations,
        bloch=bloch,
        frame=frame,
    )
