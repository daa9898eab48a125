"""Dense complex linear algebra for small Hermitian systems.

Everything here works on explicit matrices (target dimensions <= 16) and is
deterministic: eigenvalues ascending, eigenvector phases fixed so the first
significant component of each column is real positive.
"""

from __future__ import annotations

from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, DomainError, NoOccupation, NonHermitian

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12
DEFAULT_OCCUPATION_TOL = 1e-12


def _as_complex_matrix(entries) -> np.ndarray:
    mat = np.array(entries, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {mat.shape}")
    return mat


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant component is real positive."""
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        mags = np.abs(col)
        idx = int(np.argmax(mags > 1e-9 * mags.max()))
        pivot = col[idx]
        out[:, k] = col * (pivot.conjugate() / abs(pivot))
    return out


class HermitianOperator:
    """A dense complex Hermitian matrix with a cached eigendecomposition."""

    def __init__(self, entries):
        mat = _as_complex_matrix(entries)
        if np.abs(mat - mat.conj().T).max() > HERMITICITY_TOL:
            raise NonHermitian(
                f"matrix deviates from its conjugate transpose by "
                f"{np.abs(mat - mat.conj().T).max():.3e} (> {HERMITICITY_TOL})"
            )
        # Exact symmetrization kills the sub-tolerance asymmetry.
        mat = (mat + mat.conj().T) / 2
        mat.flags.writeable = False
        self._entries = mat

    @classmethod
    def from_diagonal(cls, values) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and phase-fixed unitary of eigenvectors."""
        values, vectors = np.linalg.eigh(self._entries)
        return values, _fix_phases(vectors)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig[0]

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.eig[1]

    @property
    def spectral_width(self) -> float:
        values = self.eigenvalues
        return float(values[-1] - values[0])

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


class PureState:
    """A unit-norm complex vector, viewable as a rank-1 density operator."""

    def __init__(self, amplitudes):
        vec = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state norm {norm!r} is not 1 within {NORM_TOL}")
        vec /= norm
        vec.flags.writeable = False
        self._amplitudes = vec

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        """Build a state from an unnormalized vector."""
        vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return cls(vec / norm)

    @property
    def dim(self) -> int:
        return self._amplitudes.shape[0]

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def density(self) -> np.ndarray:
        return np.outer(self._amplitudes, self._amplitudes.conj())

    def __repr__(self) -> str:
        return f"PureState(dim={self.dim})"


def _ensure_operator(op) -> HermitianOperator:
    return op if isinstance(op, HermitianOperator) else HermitianOperator(op)


def _ensure_state(state) -> PureState:
    return state if isinstance(state, PureState) else PureState(state)


def _check_dims(op: HermitianOperator, state: PureState) -> None:
    if op.dim != state.dim:
        raise DimensionMismatch(f"operator dim {op.dim} != state dim {state.dim}")


def eigh(op) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic eigendecomposition; raises NonHermitian on asymmetric input."""
    return _ensure_operator(op).eig


def unitary_exp(op, t: float) -> np.ndarray:
    """exp(-i * op * t) via the eigendecomposition."""
    operator = _ensure_operator(op)
    values, vectors = operator.eig
    phases = np.exp(-1j * values * float(t))
    return (vectors * phases) @ vectors.conj().T


def expectation(op, state) -> float:
    operator, s = _ensure_operator(op), _ensure_state(state)
    _check_dims(operator, s)
    vec = s.amplitudes
    return float(np.real(np.vdot(vec, operator.entries @ vec)))


def variance(op, state) -> float:
    """Variance of op in state, computed as ||(op - <op>) psi||^2 (never negative)."""
    operator, s = _ensure_operator(op), _ensure_state(state)
    _check_dims(operator, s)
    vec = s.amplitudes
    mean = np.vdot(vec, operator.entries @ vec).real
    residual = operator.entries @ vec - mean * vec
    return float(np.real(np.vdot(residual, residual)))


def fidelity(state1, state2) -> float:
    """|<u1|u2>|^2 for pure states; 1 for equal states up to a global phase."""
    s1, s2 = _ensure_state(state1), _ensure_state(state2)
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"state dims differ: {s1.dim} != {s2.dim}")
    overlap = np.vdot(s1.amplitudes, s2.amplitudes)
    return float(overlap.real**2 + overlap.imag**2)


def trace_distance(state1, state2) -> float:
    """Pure-state trace distance sqrt(1 - fidelity), computed without cancellation.

    Uses the norm of the component of one state perpendicular to the other,
    which stays accurate for nearly identical states where 1 - fidelity
    underflows.
    """
    s1, s2 = _ensure_state(state1), _ensure_state(state2)
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"state dims differ: {s1.dim} != {s2.dim}")
    overlap = np.vdot(s1.amplitudes, s2.amplitudes)
    residual = s2.amplitudes - overlap * s1.amplitudes
    return float(np.linalg.norm(residual))


def _level_groups(eigenvalues: np.ndarray) -> list[np.ndarray]:
    """Partition ascending eigenvalues into near-degenerate groups."""
    gap_tol = 1e-9 * (float(eigenvalues[-1] - eigenvalues[0]) + 1.0)
    groups: list[np.ndarray] = []
    start = 0
    for i in range(1, len(eigenvalues) + 1):
        if i == len(eigenvalues) or eigenvalues[i] - eigenvalues[i - 1] > gap_tol:
            groups.append(np.arange(start, i))
            start = i
    return groups


def level_occupations(op, state) -> tuple[np.ndarray, np.ndarray]:
    """Distinct level values (degeneracy-grouped) and their occupation weights."""
    operator, s = _ensure_operator(op), _ensure_state(state)
    _check_dims(operator, s)
    values, vectors = operator.eig
    weights = np.abs(vectors.conj().T @ s.amplitudes) ** 2
    groups = _level_groups(values)
    levels = np.array([values[g].mean() for g in groups])
    occ = np.array([weights[g].sum() for g in groups])
    return levels, occ


class OccupiedExtrema(NamedTuple):
    eps_min: float
    eps_max: float
    occupied_count: int


def occupied_extrema(op, state, tol: float = DEFAULT_OCCUPATION_TOL) -> OccupiedExtrema:
    """Smallest and largest occupied energy, and the occupied level count.

    A level counts as occupied when its eigenspace-projected weight exceeds
    tol. Raises NoOccupation if every weight is at or below tol, which for a
    valid state can only mean the threshold was set too high.
    """
    if tol <= 0:
        raise DomainError("occupation threshold must be positive")
    levels, occ = level_occupations(op, state)
    mask = occ > tol
    if not mask.any():
        raise NoOccupation(f"all level weights <= {tol}; threshold too high")
    occupied = levels[mask]
    return OccupiedExtrema(float(occupied[0]), float(occupied[-1]), int(mask.sum()))


def _coerce_matrix(obj) -> np.ndarray:
    if isinstance(obj, HermitianOperator):
        return obj.entries
    if isinstance(obj, PureState):
        return obj.density
    return _as_complex_matrix(obj)


def commutator_norm(a, b) -> float:
    """Frobenius norm of the commutator ab - ba; zero iff the operands commute."""
    ma, mb = _coerce_matrix(a), _coerce_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"shapes differ: {ma.shape} != {mb.shape}")
    return float(np.linalg.norm(ma @ mb - mb @ ma))
