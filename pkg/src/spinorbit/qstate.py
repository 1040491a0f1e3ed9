"""State vectors and operators for a single photon's polarization and OAM.

A single photon carries two coupled degrees of freedom here: spin (circular
polarization, labels "L" and "R") and orbital angular momentum (an integer
topological charge m, truncated to |m| <= m_max).  States are dense complex
vectors over the ordered label set

    ("L", -M), ..., ("L", +M), ("R", -M), ..., ("R", +M)

and all operations are pure functions over immutable values, so everything
in this module is safe to share across threads.

The linear polarization basis is fixed as

    |H> = (|L> + |R>) / sqrt(2)
    |V> = (|L> - |R>) / (i sqrt(2))

and every element matrix elsewhere in the package is derived under this
convention.  Global phases are physical bookkeeping and never stripped;
use :func:`states_equal_up_to_phase` when a ray-level comparison is wanted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

import numpy as np

NORM_TOL = 1e-12

SPIN_LABELS = ("L", "R")

_SQRT_HALF = math.sqrt(0.5)

# Circular components (c_L, c_R) of the named polarization states.
SPIN_KETS: dict[str, np.ndarray] = {
    "L": np.array([1.0, 0.0], dtype=complex),
    "R": np.array([0.0, 1.0], dtype=complex),
    "H": np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    "V": np.array([-1j * _SQRT_HALF, 1j * _SQRT_HALF], dtype=complex),
}
for _v in SPIN_KETS.values():
    _v.setflags(write=False)

# Rows give (c_H, c_V) from (c_L, c_R).
_CIRC_TO_LIN = np.array(
    [[_SQRT_HALF, _SQRT_HALF], [1j * _SQRT_HALF, -1j * _SQRT_HALF]], dtype=complex
)
_CIRC_TO_LIN.setflags(write=False)


class BasisMismatchError(ValueError):
    """Raised when an operator and a state disagree about their basis."""


class TruncationError(ValueError):
    """Raised when an operation would push amplitude beyond the OAM cutoff."""


def oam_dim(m_max: int) -> int:
    return 2 * m_max + 1


def state_dim(m_max: int) -> int:
    return 2 * oam_dim(m_max)


def basis_index(spin: str, m: int, m_max: int) -> int:
    """Flat index of the (spin, m) basis label."""
    if spin not in SPIN_LABELS:
        raise ValueError(f"spin must be 'L' or 'R', got {spin!r}")
    if abs(m) > m_max:
        raise TruncationError(f"|m|={abs(m)} exceeds truncation m_max={m_max}")
    return SPIN_LABELS.index(spin) * oam_dim(m_max) + (m + m_max)


def basis_labels(m_max: int) -> tuple[tuple[str, int], ...]:
    return tuple((s, m) for s in SPIN_LABELS for m in range(-m_max, m_max + 1))


def spin_ket(state: Union[str, np.ndarray]) -> np.ndarray:
    """Coerce a polarization name or length-2 array into circular components."""
    if isinstance(state, str):
        try:
            return SPIN_KETS[state]
        except KeyError:
            raise ValueError(f"unknown polarization label {state!r}") from None
    vec = np.asarray(state, dtype=complex).reshape(-1)
    if vec.shape != (2,):
        raise ValueError("spin state must have exactly two components")
    return vec


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PhotonState:
    """Single-photon amplitude vector over the (spin, m) basis."""

    m_max: int
    vector: np.ndarray

    def __post_init__(self):
        vec = _frozen(self.vector)
        if vec.shape != (state_dim(self.m_max),):
            raise ValueError(
                f"vector length {vec.shape} does not match m_max={self.m_max}"
            )
        object.__setattr__(self, "vector", vec)

    @classmethod
    def zero(cls, m_max: int) -> "PhotonState":
        return cls(m_max, np.zeros(state_dim(m_max), dtype=complex))

    @classmethod
    def basis_state(cls, spin: str, m: int, m_max: int) -> "PhotonState":
        vec = np.zeros(state_dim(m_max), dtype=complex)
        vec[basis_index(spin, m, m_max)] = 1.0
        return cls(m_max, vec)

    @classmethod
    def from_amplitudes(
        cls, m_max: int, amps: Mapping[tuple[str, int], complex]
    ) -> "PhotonState":
        vec = np.zeros(state_dim(m_max), dtype=complex)
        for (spin, m), a in amps.items():
            vec[basis_index(spin, m, m_max)] = a
        return cls(m_max, vec)

    def amplitude(self, spin: str, m: int) -> complex:
        return complex(self.vector[basis_index(spin, m, self.m_max)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    @property
    def is_zero(self) -> bool:
        return self.norm() < NORM_TOL

    def normalize(self) -> "PhotonState":
        n = self.norm()
        if n < NORM_TOL:
            raise ValueError("cannot normalize a zero state")
        return PhotonState(self.m_max, self.vector / n)

    def items(self, tol: float = 0.0) -> Iterator[tuple[tuple[str, int], complex]]:
        """Yield (label, amplitude) pairs with |amplitude| > tol."""
        for label, a in zip(basis_labels(self.m_max), self.vector):
            if abs(a) > tol:
                yield label, complex(a)

    def oam_support(self, tol: float = NORM_TOL) -> set[int]:
        """OAM charges carrying more than tol amplitude."""
        grid = self.vector.reshape(2, oam_dim(self.m_max))
        weights = np.abs(grid).max(axis=0)
        return {int(m) - self.m_max for m in np.nonzero(weights > tol)[0]}

    def as_grid(self) -> np.ndarray:
        """View as a (2, 2*m_max+1) array indexed by (spin, m + m_max)."""
        return self.vector.reshape(2, oam_dim(self.m_max))


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Two-photon amplitudes: Alice spin only, Bob spin and OAM.

    Alice's photon is analyzed in polarization alone (her OAM is fixed at
    zero by the source and never stored).
    """

    m_max: int
    matrix: np.ndarray  # shape (2, state_dim): rows Alice L/R, cols Bob labels

    def __post_init__(self):
        mat = _frozen(self.matrix)
        if mat.shape != (2, state_dim(self.m_max)):
            raise ValueError("matrix shape does not match m_max")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_amplitudes(
        cls, m_max: int, amps: Mapping[tuple[str, str, int], complex]
    ) -> "BipartiteState":
        mat = np.zeros((2, state_dim(m_max)), dtype=complex)
        for (a_spin, b_spin, m), a in amps.items():
            mat[SPIN_LABELS.index(a_spin), basis_index(b_spin, m, m_max)] = a
        return cls(m_max, mat)

    @classmethod
    def from_spin_pair(
        cls, pair: np.ndarray, m: int, m_max: int
    ) -> "BipartiteState":
        """Attach a definite Bob OAM charge to a 2x2 two-spin amplitude table."""
        pair = np.asarray(pair, dtype=complex)
        if pair.shape != (2, 2):
            raise ValueError("spin pair must be a 2x2 amplitude table")
        mat = np.zeros((2, state_dim(m_max)), dtype=complex)
        col = m + m_max
        mat[:, col] = pair[:, 0]
        mat[:, oam_dim(m_max) + col] = pair[:, 1]
        return cls(m_max, mat)

    def amplitude(self, alice_spin: str, bob_spin: str, m: int) -> complex:
        return complex(
            self.matrix[
                SPIN_LABELS.index(alice_spin), basis_index(bob_spin, m, self.m_max)
            ]
        )

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def normalize(self) -> "BipartiteState":
        n = self.norm()
        if n < NORM_TOL:
            raise ValueError("cannot normalize a zero state")
        return BipartiteState(self.m_max, self.matrix / n)


@dataclass(frozen=True, eq=False)
class LinearOp:
    """Dense complex matrix over an explicit ordered basis.

    ``basis`` is either a pair of spin labels (a polarization-only operator,
    applied per OAM charge) or the full (spin, m) label tuple.  ``domain``,
    when given, lists the input labels the operator is defined on; applying
    it to a state with support outside the domain raises TruncationError.
    """

    basis: tuple
    matrix: np.ndarray
    name: str = ""
    domain: frozenset = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        mat = _frozen(self.matrix)
        n = len(self.basis)
        if mat.shape != (n, n):
            raise ValueError("matrix must be square over the declared basis")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "basis", tuple(self.basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def is_unitary(self, tol: float = NORM_TOL) -> bool:
        eye = self.matrix.conj().T @ self.matrix
        return bool(np.max(np.abs(eye - np.eye(self.dim))) <= tol)

    def dagger(self) -> "LinearOp":
        name = f"{self.name}^dag" if self.name else ""
        return LinearOp(self.basis, self.matrix.conj().T, name=name)

    def compose(self, other: "LinearOp") -> "LinearOp":
        """This operator applied after ``other``."""
        if self.basis != other.basis:
            raise BasisMismatchError("cannot compose operators on different bases")
        return LinearOp(self.basis, self.matrix @ other.matrix)


def spin_op(matrix: np.ndarray, name: str = "") -> LinearOp:
    """A 2x2 polarization operator over the circular basis (L, R)."""
    return LinearOp(SPIN_LABELS, np.asarray(matrix, dtype=complex), name=name)


def _spin_matrix_lr(op: LinearOp) -> np.ndarray:
    """Operator matrix reordered to (L, R) column convention."""
    if op.basis == ("L", "R"):
        return op.matrix
    if op.basis == ("R", "L"):
        swap = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        return swap @ op.matrix @ swap
    raise BasisMismatchError(f"not a spin operator basis: {op.basis}")


def tensor(a, b, m_max: int | None = None):
    """Tensor product of single-photon factors.

    Accepted forms:
      * two spin states -> 2x2 two-spin amplitude table (rows first factor)
      * spin state and an OAM ket (an integer charge, or a {m: amp} map)
        -> PhotonState

    Output amplitudes are products of the input amplitudes, so the norm of
    the result is the product of the factor norms.
    """
    a_vec = spin_ket(a) if isinstance(a, (str, np.ndarray, list, tuple)) else None
    if a_vec is None:
        raise TypeError("first tensor factor must be a spin state")
    if isinstance(b, (str,)) or (
        isinstance(b, (np.ndarray, list, tuple)) and np.asarray(b).size == 2
    ):
        b_vec = spin_ket(b)
        return np.outer(a_vec, b_vec)
    if isinstance(b, (int, np.integer)):
        oam: dict[int, complex] = {int(b): 1.0}
    elif isinstance(b, Mapping):
        oam = {int(m): complex(v) for m, v in b.items()}
    else:
        raise TypeError("second tensor factor must be a spin state or an OAM ket")
    if m_max is None:
        m_max = max(abs(m) for m in oam)
    if any(abs(m) > m_max for m in oam):
        raise TruncationError("OAM ket exceeds the requested truncation")
    amps = {
        (spin, m): a_vec[i] * v
        for i, spin in enumerate(SPIN_LABELS)
        for m, v in oam.items()
    }
    return PhotonState.from_amplitudes(m_max, amps)


def _check_domain(op: LinearOp, state: PhotonState) -> None:
    if op.domain is None:
        return
    for label, a in state.items(tol=NORM_TOL):
        if label not in op.domain:
            raise TruncationError(
                f"state has amplitude {a:.3g} on {label}, outside the domain of "
                f"{op.name or 'operator'}"
            )


def apply(op: LinearOp, state):
    """Apply a LinearOp to a state; preserves norm iff the op is unitary.

    Polarization-only operators are lifted per OAM charge; full-basis
    operators must share the state's truncation.
    """
    if isinstance(state, PhotonState):
        if op.dim == 2:
            grid = _spin_matrix_lr(op) @ state.as_grid()
            return PhotonState(state.m_max, grid.reshape(-1))
        if op.basis != basis_labels(state.m_max):
            raise BasisMismatchError("operator basis does not match state basis")
        _check_domain(op, state)
        return PhotonState(state.m_max, op.matrix @ state.vector)
    if isinstance(state, BipartiteState):
        raise TypeError("use apply_bob or apply_alice for bipartite states")
    vec = spin_ket(state)
    if op.dim != 2:
        raise BasisMismatchError("full-basis operator applied to a bare spin state")
    return _spin_matrix_lr(op) @ vec


def apply_bob(op: LinearOp, state: BipartiteState) -> BipartiteState:
    """Apply an operator to Bob's photon, leaving Alice untouched."""
    if op.dim == 2:
        m = _spin_matrix_lr(op)
        grids = state.matrix.reshape(2, 2, oam_dim(state.m_max))
        out = np.einsum("st,ato->aso", m, grids)
        return BipartiteState(state.m_max, out.reshape(2, -1))
    if op.basis != basis_labels(state.m_max):
        raise BasisMismatchError("operator basis does not match state basis")
    if op.domain is not None:
        for a_idx in range(2):
            bob = PhotonState(state.m_max, state.matrix[a_idx])
            _check_domain(op, bob)
    return BipartiteState(state.m_max, state.matrix @ op.matrix.T)


def apply_alice(op: LinearOp, state: BipartiteState) -> BipartiteState:
    """Apply a polarization operator to Alice's photon."""
    m = _spin_matrix_lr(op)
    return BipartiteState(state.m_max, m @ state.matrix)


def inner(a, b) -> complex:
    """Inner product <a|b>, conjugate-linear in the first argument."""
    if isinstance(a, PhotonState) and isinstance(b, PhotonState):
        if a.m_max != b.m_max:
            raise BasisMismatchError("states use different truncations")
        return complex(np.vdot(a.vector, b.vector))
    if isinstance(a, BipartiteState) and isinstance(b, BipartiteState):
        if a.m_max != b.m_max:
            raise BasisMismatchError("states use different truncations")
        return complex(np.vdot(a.matrix, b.matrix))
    return complex(np.vdot(spin_ket(a), spin_ket(b)))


def states_equal_up_to_phase(a, b, tol: float = NORM_TOL) -> bool:
    """Ray-level equality: both unit norm and |<a|b>| = 1 within tol."""
    ip = abs(inner(a, b))
    na = a.norm() if hasattr(a, "norm") else float(np.linalg.norm(spin_ket(a)))
    nb = b.norm() if hasattr(b, "norm") else float(np.linalg.norm(spin_ket(b)))
    if na < tol or nb < tol:
        return na < tol and nb < tol
    return abs(ip / (na * nb) - 1.0) <= tol


@dataclass(frozen=True)
class Projector:
    """Rank-one projector onto a unit vector of one subsystem.

    ``tag`` selects the subsystem: "spin" (coeffs keyed by "L"/"R"),
    "oam" (keyed by integer charge) or "joint" (keyed by (spin, m)).
    ``side`` matters only when projecting a bipartite state and must then
    be "alice".
    """

    tag: str
    coeffs: tuple  # ((key, amplitude), ...) pairs, normalized
    side: str = "bob"

    def __post_init__(self):
        if self.tag not in ("spin", "oam", "joint"):
            raise ValueError(f"unknown projector tag {self.tag!r}")
        pairs = tuple((k, complex(v)) for k, v in dict(self.coeffs).items())
        nrm = math.sqrt(sum(abs(v) ** 2 for _, v in pairs))
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError(f"projector target must have unit norm, got {nrm}")
        object.__setattr__(self, "coeffs", pairs)

    def target_vector(self, m_max: int) -> np.ndarray:
        """Dense target over the tagged subsystem's basis."""
        if self.tag == "spin":
            vec = np.zeros(2, dtype=complex)
            for k, v in self.coeffs:
                vec[SPIN_LABELS.index(k)] = v
            return vec
        if self.tag == "oam":
            vec = np.zeros(oam_dim(m_max), dtype=complex)
            for k, v in self.coeffs:
                if abs(int(k)) > m_max:
                    raise TruncationError("projector target outside truncation")
                vec[int(k) + m_max] = v
            return vec
        vec = np.zeros(state_dim(m_max), dtype=complex)
        for (spin, m), v in self.coeffs:
            vec[basis_index(spin, m, m_max)] = v
        return vec


def project(state, projector: Projector):
    """Measurement projection: (post-measurement state, probability).

    The returned state is renormalized; a zero-probability outcome comes
    back as a flagged zero state with probability 0.0.  Projecting a
    bipartite state on Alice's spin returns Bob's reduced state.
    """
    if isinstance(state, BipartiteState):
        if projector.tag != "spin" or projector.side != "alice":
            raise ValueError("bipartite projection must target Alice's spin")
        chi = projector.target_vector(state.m_max)
        bob_vec = chi.conj() @ state.matrix
        prob = float(np.vdot(bob_vec, bob_vec).real)
        if prob < NORM_TOL**2:
            return PhotonState.zero(state.m_max), 0.0
        return PhotonState(state.m_max, bob_vec / math.sqrt(prob)), prob

    if not isinstance(state, PhotonState):
        raise TypeError("project expects a PhotonState or BipartiteState")
    grid = state.as_grid()
    if projector.tag == "spin":
        chi = projector.target_vector(state.m_max)
        overlap = chi.conj() @ grid  # per-m amplitudes
        out = np.outer(chi, overlap)
    elif projector.tag == "oam":
        w = projector.target_vector(state.m_max)
        overlap = grid @ w.conj()  # per-spin amplitudes
        out = np.outer(overlap, w)
    else:
        v = projector.target_vector(state.m_max)
        amp = np.vdot(v, state.vector)
        out = (amp * v).reshape(2, -1)
    prob = float(np.vdot(out, out).real)
    if prob < NORM_TOL**2:
        return PhotonState.zero(state.m_max), 0.0
    return PhotonState(state.m_max, out.reshape(-1) / math.sqrt(prob)), prob


def basis_change_circular_linear(state, to: str = "linear") -> np.ndarray:
    """Rewrite a polarization state between the circular and linear bases.

    ``to="linear"`` maps circular components (c_L, c_R) to (c_H, c_V);
    ``to="circular"`` is the inverse.  Unitary, so norms are preserved.
    """
    vec = spin_ket(state)
    if to == "linear":
        return _CIRC_TO_LIN @ vec
    if to == "circular":
        return _CIRC_TO_LIN.conj().T @ vec
    raise ValueError("direction must be 'linear' or 'circular'")
