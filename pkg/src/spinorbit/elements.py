"""Optical elements compiled to linear operators.

Each constructor returns an immutable :class:`~spinorbit.qstate.LinearOp`
over either the circular polarization basis (L, R) or the full
(spin, m) basis of a truncated photon space.  Conventions fixed here:

* A q-plate with axis pattern alpha(r, phi) = q*phi + alpha0 flips the
  circular polarization and shifts m by +-2q, with transition phases
  exp(+-i*2*alpha0).
* The quarter-wave plate is the standard retarder R(theta) diag(1, i)
  R(-theta) in the linear basis; at theta = 45 deg it sends |L> to
  (1+i)/sqrt(2) |H> and |R> to (1-i)/sqrt(2) |V>, factors the downstream
  analyzers rely on.
* The half-wave element is parameterized by the circular phase it
  imprints: hwp(theta) maps |L> -> e^{-i theta}|R> and |R> -> e^{+i theta}|L>
  (a pi retarder with its fast axis at -theta/2).  A pair hwp(0), hwp(b)
  then leaves a net relative phase 2b between the |L> and |R> components,
  which is the analyzer phase convention used throughout.
* The Dove-prism pair acts as a pure OAM-dependent relative phase
  e^{i 2 m alpha} on the arm carrying |V>, with polarization untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO, Union

import numpy as np

from .qstate import (
    LinearOp,
    basis_index,
    basis_labels,
    oam_dim,
    spin_op,
    state_dim,
)

_HALF_TURN_TOL = 1e-9


@dataclass(frozen=True)
class QPlateSpec:
    """Geometry of a q-plate: axis pattern alpha(r, phi) = q*phi + alpha0."""

    q: float
    alpha0: float = 0.0

    def __post_init__(self):
        q = float(self.q)
        if not math.isfinite(q) or not math.isfinite(float(self.alpha0)):
            raise ValueError("q-plate parameters must be finite")
        if abs(2 * q - round(2 * q)) > _HALF_TURN_TOL:
            raise ValueError(f"2q must be an integer, got q={q}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha0", float(self.alpha0))

    @property
    def two_q(self) -> int:
        """Integer OAM shift 2q."""
        return round(2 * self.q)


def transmission_matrix(spec: QPlateSpec, phi: float) -> LinearOp:
    """Local 2x2 polarization action of the plate at azimuth phi.

    The matrix is expressed over the basis ordered (R, L), so that the
    antidiagonal entries are the transition phases: entry [0, 1] is the
    L -> R phase e^{i 2 alpha}, entry [1, 0] the R -> L phase e^{-i 2 alpha},
    with alpha = q*phi + alpha0.
    """
    alpha = spec.q * phi + spec.alpha0
    ph = np.exp(2j * alpha)
    mat = np.array([[0.0, ph], [np.conj(ph), 0.0]], dtype=complex)
    return LinearOp(("R", "L"), mat, name=f"qplate_t(q={spec.q}, phi={phi})")


def qplate_op(spec: QPlateSpec, m_max: int) -> LinearOp:
    """Full spin x OAM action: |L, m> -> e^{i 2 a0}|R, m+2q>, |R, m> -> e^{-i 2 a0}|L, m-2q>.

    Basis states whose shifted charge would leave the truncation are
    excluded from the operator's domain; applying the result to a state
    with support there raises TruncationError.
    """
    shift = spec.two_q
    if m_max < abs(shift):
        raise ValueError(f"m_max={m_max} cannot hold a +-{abs(shift)} OAM shift")
    dim = state_dim(m_max)
    mat = np.zeros((dim, dim), dtype=complex)
    phase = np.exp(2j * spec.alpha0)
    domain = set()
    for m in range(-m_max, m_max + 1):
        if abs(m + shift) <= m_max:
            mat[basis_index("R", m + shift, m_max), basis_index("L", m, m_max)] = phase
            domain.add(("L", m))
        if abs(m - shift) <= m_max:
            mat[
                basis_index("L", m - shift, m_max), basis_index("R", m, m_max)
            ] = np.conj(phase)
            domain.add(("R", m))
    return LinearOp(
        basis_labels(m_max),
        mat,
        name=f"qplate(q={spec.q}, alpha0={spec.alpha0})",
        domain=frozenset(domain),
    )


def _rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


# Circular <-> linear change of basis; rows give (c_H, c_V) from (c_L, c_R).
_C2L = np.array(
    [[math.sqrt(0.5), math.sqrt(0.5)], [1j * math.sqrt(0.5), -1j * math.sqrt(0.5)]],
    dtype=complex,
)


def waveplate_op(kind: str, theta: float) -> LinearOp:
    """Wave plate as a polarization operator over the circular basis.

    kind "qwp": quarter-wave retarder with fast axis at theta.
    kind "hwp": half-wave element imprinting circular phase theta (see the
    module docstring for the angle convention).
    """
    kind = kind.lower()
    if kind == "qwp":
        lin = _rotation(theta) @ np.diag([1.0, 1j]) @ _rotation(-theta)
        circ = _C2L.conj().T @ lin @ _C2L
        return spin_op(circ, name=f"qwp({theta})")
    if kind == "hwp":
        circ = np.array(
            [[0.0, np.exp(1j * theta)], [np.exp(-1j * theta), 0.0]], dtype=complex
        )
        return spin_op(circ, name=f"hwp({theta})")
    raise ValueError(f"unknown wave plate kind {kind!r}")


def dove_pair_op(alpha: float, m_max: int) -> LinearOp:
    """Two-arm Dove prism composite with relative rotation alpha.

    Per OAM charge m, the component carried on the |V> arm is advanced by
    e^{i 2 m alpha} while the |H> arm is untouched; for m = 0 the arms stay
    in phase regardless of alpha.  Polarization is unaffected.
    """
    h = np.array([math.sqrt(0.5), math.sqrt(0.5)], dtype=complex)
    v = np.array([-1j * math.sqrt(0.5), 1j * math.sqrt(0.5)], dtype=complex)
    p_h = np.outer(h, h.conj())
    p_v = np.outer(v, v.conj())
    dim = state_dim(m_max)
    mat = np.zeros((dim, dim), dtype=complex)
    n = oam_dim(m_max)
    for m in range(-m_max, m_max + 1):
        block = p_h + np.exp(2j * m * alpha) * p_v
        col = m + m_max
        for i in range(2):
            for j in range(2):
                mat[i * n + col, j * n + col] = block[i, j]
    return LinearOp(basis_labels(m_max), mat, name=f"dove_pair({alpha})")


def smf_filter_op(m_max: int) -> LinearOp:
    """Single-mode-fiber filter: keeps only the fundamental m = 0 mode.

    A projector, not a unitary; the squared norm after application is the
    transmitted weight.
    """
    diag = np.zeros(state_dim(m_max))
    for spin in ("L", "R"):
        diag[basis_index(spin, 0, m_max)] = 1.0
    return LinearOp(basis_labels(m_max), np.diag(diag), name="smf")


def mirror_op(m_max: int) -> LinearOp:
    """Steering mirror, modeled as the identity.

    Relative arm parity in the analyzer is owned by the interferometer
    model, not by individual mirrors.
    """
    return LinearOp(basis_labels(m_max), np.eye(state_dim(m_max)), name="mirror")


def pbs_split(state_grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a (2, n_oam) circular-basis grid into (transmitted H, reflected V).

    Both outputs keep the circular representation; together they carry the
    full input norm (lossless, no reflection phase).
    """
    h = np.array([math.sqrt(0.5), math.sqrt(0.5)], dtype=complex)
    v = np.array([-1j * math.sqrt(0.5), 1j * math.sqrt(0.5)], dtype=complex)
    t = np.outer(h, h.conj()) @ state_grid
    r = np.outer(v, v.conj()) @ state_grid
    return t, r


@dataclass(frozen=True)
class OrientationField:
    """Sampled optical-axis angles alpha(r, phi) of a plate, mod pi."""

    spec: QPlateSpec
    r: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray  # shape (n_r, n_phi), values in [0, pi)

    def to_csv(self, out: Union[str, TextIO]) -> None:
        """Write (r, phi, alpha) rows with 17-significant-digit floats."""
        close = False
        if isinstance(out, str):
            out = open(out, "w", newline="\n")
            close = True
        try:
            out.write("r,phi,alpha\n")
            for i, rv in enumerate(self.r):
                for j, pv in enumerate(self.phi):
                    out.write(f"{rv:.17g},{pv:.17g},{self.alpha[i, j]:.17g}\n")
        finally:
            if close:
                out.close()


def orientation_field(spec: QPlateSpec, n_r: int, n_phi: int) -> OrientationField:
    """Sample alpha(r, phi) = q*phi + alpha0 (mod pi) on a polar grid.

    The pattern is independent of r by construction; radii are still
    reported so the output plots directly as a disk.
    """
    if n_r < 1 or n_phi < 1:
        raise ValueError("grid must have at least one sample per axis")
    r = np.array([(i + 1) / n_r for i in range(n_r)])
    phi = np.array([2 * math.pi * j / n_phi for j in range(n_phi)])
    alpha = np.mod(spec.q * phi + spec.alpha0, math.pi)
    return OrientationField(spec, r, phi, np.tile(alpha, (n_r, 1)))


def symmetry_order(q: float) -> int | None:
    """Rotational symmetry order |2(q-1)| of the axis pattern.

    Returns None for q = 1, the rotationally invariant pattern.  The
    symmetry is that of the physical plate: rotating the sample by
    2*pi/|2(q-1)| co-rotates the axis directions, alpha'(phi) =
    alpha(phi - delta) + delta, and leaves the pattern unchanged mod pi.
    """
    spec = QPlateSpec(q)
    order = abs(round(2 * (spec.q - 1)))
    return None if order == 0 else order
