"""Seeded random system generation and the bound-validity sweep.

Random systems come in two kinds that both conserve level occupations:
"coupled" systems pair a random Hamiltonian with the geodesic-generating
coupling operator, "isolated" systems set A = 0. All randomness flows from a
single numpy Generator so sweeps reproduce bit for bit from a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import BoundReport, evaluate_bounds, first_passage
from .counterexamples import build_coupling
from .errors import NotReached
from .evolution import RotatedHamiltonianSystem
from .linalg import HermitianOperator, PureState, variance

DEFAULT_DELTAS = tuple(round(0.1 * k, 1) for k in range(10))


def random_hermitian(rng: np.random.Generator, dim: int, spectral_radius: float = 1.0) -> HermitianOperator:
    """Random dense Hermitian matrix rescaled to the given spectral radius."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    mat = (g + g.conj().T) / 2.0
    radius = float(np.abs(np.linalg.eigvalsh(mat)).max())
    return HermitianOperator(mat * (spectral_radius / radius))


def random_pure_state(rng: np.random.Generator, dim: int) -> PureState:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.normalized(vec)


def random_coupled_system(
    rng: np.random.Generator,
    dim: int,
    *,
    uncertainty_range: tuple[float, float] = (0.5, 2.5),
) -> RotatedHamiltonianSystem:
    """Random Hamiltonian and state with the geodesic coupling operator.

    The Hamiltonian is rescaled so the initial energy uncertainty hits a
    target drawn from uncertainty_range, which keeps first-passage times
    O(1) and tangential crossings well conditioned; draws are rejected if
    the rescaled spectral radius would exceed 5.
    """
    state = random_pure_state(rng, dim)
    target = rng.uniform(*uncertainty_range)
    while True:
        radius = rng.uniform(1.0, 5.0)
        hamiltonian = random_hermitian(rng, dim, spectral_radius=radius)
        spread = math.sqrt(variance(hamiltonian, state))
        if spread > 1e-3 and radius * target / spread <= 5.0:
            break
    hamiltonian = HermitianOperator(hamiltonian.entries * (target / spread))
    return RotatedHamiltonianSystem(hamiltonian, build_coupling(hamiltonian, state), state)


def random_isolated_system(
    rng: np.random.Generator,
    dim: int,
    *,
    spectral_radius_range: tuple[float, float] = (1.0, 5.0),
) -> RotatedHamiltonianSystem:
    hamiltonian = random_hermitian(rng, dim, spectral_radius=rng.uniform(*spectral_radius_range))
    state = random_pure_state(rng, dim)
    zero = HermitianOperator(np.zeros((dim, dim)))
    return RotatedHamiltonianSystem(hamiltonian, zero, state)


def random_saturating_two_level(rng: np.random.Generator) -> RotatedHamiltonianSystem:
    """Isolated two-level system whose evolution saturates both bounds.

    Saturation of the Mandelstam-Tamm bound for an isolated system requires
    an equal-weight superposition of two energy eigenstates, so the initial
    state is built that way with a random relative phase. The level gap is
    drawn from [1, 5] directly (random basis and offset) so the evolution
    speed never degenerates.
    """
    _, vectors = random_hermitian(rng, 2).eig
    gap = rng.uniform(1.0, 5.0)
    offset = rng.uniform(-2.0, 2.0)
    values = np.array([offset - gap / 2.0, offset + gap / 2.0])
    hamiltonian = HermitianOperator((vectors * values) @ vectors.conj().T)
    phase = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
    state = PureState.normalized(vectors[:, 0] + phase * vectors[:, 1])
    zero = HermitianOperator(np.zeros((2, 2)))
    return RotatedHamiltonianSystem(hamiltonian, zero, state)


@dataclass
class SweepRow:
    """One (system, delta) cell of a validity sweep."""

    system: int
    kind: str
    dim: int
    delta: float
    reached: bool
    report: BoundReport | None

    @property
    def worst_margin(self) -> float | None:
        """Largest (bound - tau) among finite bounds; negative means all valid."""
        if self.report is None:
            return None
        finite = [
            value - self.report.tau_actual
            for value in self.report.present_bounds().values()
            if math.isfinite(value)
        ]
        return max(finite) if finite else None


def validity_sweep(
    *,
    n_systems: int = 200,
    dim_range: tuple[int, int] = (2, 6),
    deltas: tuple[float, ...] = DEFAULT_DELTAS,
    seed: int = 0,
    isolated_fraction: float = 0.3,
    samples: int = 1000,
    slack: float = 1e-9,
) -> tuple[list[SweepRow], int]:
    """Check every bound against the measured time on seeded random systems.

    Returns the evaluated rows and the number of violations (cells where a
    finite bound exceeds the measured first-passage time by more than
    slack). Cells whose target fidelity is never reached are recorded with
    reached=False and do not count as violations.
    """
    rng = np.random.default_rng(seed)
    rows: list[SweepRow] = []
    violations = 0
    for index in range(n_systems):
        dim = int(rng.integers(dim_range[0], dim_range[1] + 1))
        isolated = rng.uniform() < isolated_fraction
        if isolated:
            sys = random_isolated_system(rng, dim)
            kind = "isolated"
        else:
            sys = random_coupled_system(rng, dim)
            kind = "coupled"
        spread = math.sqrt(variance(sys.H, sys.initial))
        t_max = (1.05 * math.pi if kind == "coupled" else 40.0) / max(spread, 1e-6)
        for delta in deltas:
            try:
                tau = first_passage(sys, delta, t_max)
            except NotReached:
                rows.append(SweepRow(index, kind, dim, delta, False, None))
                continue
            report = evaluate_bounds(sys, delta, samples=samples, tau=tau)
            rows.append(SweepRow(index, kind, dim, delta, True, report))
            if report.violations(slack):
                violations += 1
    return rows, violations
