"""Closed-system constructions that defeat two speed-limit hypotheses.

The first construction is a two-level family with a conserved normalized
expected energy E whose energy uncertainty E*cot(theta/2) can be made as
large as desired by shrinking the angle theta. The evolution is a constant
speed geodesic, so the orthogonalization-type time arccos(sqrt(delta))/
(E*cot(theta/2)) drops below any candidate bound of the form L/E.

The second construction couples a Hamiltonian with three or more occupied
levels to the geodesic-generating operator built by `build_coupling`. The
evolution then saturates the time-averaged Mandelstam-Tamm bound while the
Bhatia-Davies inequality stays strict at every instant, so the Bhatia-Davies
bound cannot be saturated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundReport, evaluate_bounds, first_passage, mt_closed
from .errors import DimensionMismatch, DomainError, InsufficientLevels
from .evolution import RotatedHamiltonianSystem, Trajectory, sample_trajectory
from .linalg import (
    DEFAULT_OCCUPATION_TOL,
    HermitianOperator,
    PureState,
    _ensure_operator,
    _ensure_state,
    expectation,
    occupied_extrema,
    variance,
)

VIOLATION_SLACK = 1e-9


def build_coupling(H, state) -> HermitianOperator:
    """Coupling operator A = (H - <H>)|u><u| + |u><u|(H - <H>).

    For any (H, u) the result satisfies A rho + rho A = A and [H - A, rho] = 0
    with rho = |u><u|, which makes the conjugated evolution a constant-speed
    geodesic through u while conserving all level occupations.
    """
    operator = _ensure_operator(H)
    u = _ensure_state(state)
    if operator.dim != u.dim:
        raise DimensionMismatch(f"operator dim {operator.dim} != state dim {u.dim}")
    vec = u.amplitudes
    mean = expectation(operator, u)
    shifted = operator.entries @ vec - mean * vec
    return HermitianOperator(np.outer(shifted, vec.conj()) + np.outer(vec, shifted.conj()))


def build_ml_family(E: float, theta: float) -> RotatedHamiltonianSystem:
    """Two-level rotating system with conserved normalized expected energy E.

    In the basis (u, v) = (e1, e2) the Hamiltonian is
    mu * (sin(theta) Z - cos(theta) X) with mu = E / (1 - cos(theta)),
    X = |u><u| - |v><v| and Z = |u><v| + |v><u|. Its spectrum is {-mu, +mu},
    the normalized expected energy in u is E for every theta, and the energy
    uncertainty is E * cot(theta/2). The coupling operator makes the initial
    state u evolve along the Bloch equator.
    """
    if not (0.0 < theta < math.pi):
        raise DomainError(f"theta must lie strictly inside (0, pi), got {theta!r}")
    if E <= 0.0:
        raise DomainError(f"E must be positive, got {E!r}")
    mu = E / (1.0 - math.cos(theta))
    x = np.array([[1.0, 0.0], [0.0, -1.0]])
    z = np.array([[0.0, 1.0], [1.0, 0.0]])
    hamiltonian = HermitianOperator(mu * (math.sin(theta) * z - math.cos(theta) * x))
    initial = PureState([1.0, 0.0])
    return RotatedHamiltonianSystem(hamiltonian, build_coupling(hamiltonian, initial), initial)


def choose_theta(delta: float, L: float, margin: float = 0.1) -> float:
    """Angle with cot(theta/2) strictly above arccos(sqrt(delta)) / L.

    Returns 2*arctan(1 / (c*(1+margin))) with c = arccos(sqrt(delta))/L, so
    the strict inequality holds by the factor (1+margin).
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta!r}")
    if L <= 0.0:
        raise DomainError(f"L must be positive, got {L!r}")
    if margin <= 0.0:
        raise DomainError(f"margin must be positive, got {margin!r}")
    c = math.acos(math.sqrt(delta)) / L
    return 2.0 * math.atan(1.0 / (c * (1.0 + margin)))


@dataclass
class RefutationSpec:
    """Parameters of one run against a hypothetical bound L/E."""

    delta: float
    L: float
    E: float
    theta: float
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise DomainError(f"delta must lie in [0, 1), got {self.delta!r}")
        if self.L <= 0.0 or self.E <= 0.0:
            raise DomainError("L and E must be positive")
        if not (0.0 < self.theta < math.pi):
            raise DomainError(f"theta must lie strictly inside (0, pi), got {self.theta!r}")
        if 1.0 / math.tan(self.theta / 2.0) <= math.acos(math.sqrt(self.delta)) / self.L:
            raise DomainError("cot(theta/2) must strictly exceed arccos(sqrt(delta))/L")
        if abs(self.mu * (1.0 - math.cos(self.theta)) - self.E) > 1e-12 * max(1.0, self.E):
            raise DomainError("mu * (1 - cos(theta)) must equal E")

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "L": self.L,
            "E": self.E,
            "theta": self.theta,
            "mu": self.mu,
        }


@dataclass
class RefutationReport:
    """Outcome of one run against a hypothetical bound L/E."""

    spec: RefutationSpec
    tau: float
    hypothetical_bound: float
    mt_closed: float
    violated: bool
    margins: dict[str, float]
    max_energy_drift: float
    trajectory: Trajectory | None = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "tau": self.tau,
            "hypothetical_bound": self.hypothetical_bound,
            "mt_closed": self.mt_closed,
            "violated": self.violated,
            "margins": self.margins,
            "max_energy_drift": self.max_energy_drift,
        }


def run_ml_refutation(
    delta: float,
    L: float,
    E: float,
    margin: float = 0.1,
    *,
    samples: int = 1000,
) -> RefutationReport:
    """Beat the hypothetical closed-system bound L/E at fidelity target delta.

    Builds the two-level family at the angle chosen by `choose_theta`,
    measures the first-passage time to delta, and verifies that the
    time-averaged Mandelstam-Tamm bound is saturated while the normalized
    expected energy stays at E.
    """
    theta = choose_theta(delta, L, margin)
    if E <= 0.0:
        raise DomainError(f"E must be positive, got {E!r}")
    sys = build_ml_family(E, theta)
    uncertainty = E / math.tan(theta / 2.0)
    tau = first_passage(sys, delta, math.pi / uncertainty)
    traj = sample_trajectory(sys, tau, samples)
    mt_bar = mt_closed(traj, delta)
    hypothetical = L / E
    spec = RefutationSpec(delta=delta, L=L, E=E, theta=theta, mu=E / (1.0 - math.cos(theta)))
    margins = {
        "violation": float(hypothetical - tau),
        "mt_saturation": float(abs(tau - mt_bar)),
        "angle_condition": 1.0 / math.tan(theta / 2.0) - math.acos(math.sqrt(delta)) / L,
    }
    return RefutationReport(
        spec=spec,
        tau=float(tau),
        hypothetical_bound=hypothetical,
        mt_closed=float(mt_bar),
        violated=bool(tau < hypothetical - VIOLATION_SLACK),
        margins=margins,
        max_energy_drift=float(np.abs(traj.norm_energy - E).max()),
        trajectory=traj,
    )


def bd_pointwise_margin(traj: Trajectory) -> float:
    """Smallest per-sample gap between the Bhatia-Davies product and the variance."""
    product = traj.dual_norm_energy * traj.norm_energy
    return float((product - traj.energy_uncertainty**2).min())


def run_bd_nonsaturation(
    H,
    state,
    delta: float,
    *,
    samples: int = 1000,
    occupation_tol: float = DEFAULT_OCCUPATION_TOL,
    t_max: float | None = None,
) -> BoundReport:
    """Saturate the time-averaged Mandelstam-Tamm bound but not Bhatia-Davies.

    Requires an initial state occupying at least three distinct levels of H;
    the coupling construction then drives a geodesic whose Bhatia-Davies
    inequality is strict at every sample.
    """
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta!r}")
    operator = _ensure_operator(H)
    u = _ensure_state(state)
    _, _, count = occupied_extrema(operator, u, occupation_tol)
    if count < 3:
        raise InsufficientLevels(
            f"initial state occupies {count} levels; need at least 3"
        )
    sys = RotatedHamiltonianSystem(operator, build_coupling(operator, u), u)
    uncertainty = math.sqrt(variance(operator, u))
    return evaluate_bounds(
        sys,
        delta,
        t_max=math.pi / uncertainty if t_max is None else t_max,
        samples=samples,
        occupation_tol=occupation_tol,
    )
