import math

import numpy as np
import pytest

from spinorbit.qstate import (
    BasisMismatchError,
    BipartiteState,
    LinearOp,
    PhotonState,
    Projector,
    TruncationError,
    apply,
    basis_change_circular_linear,
    basis_labels,
    inner,
    project,
    spin_ket,
    spin_op,
    states_equal_up_to_phase,
    tensor,
)

SQRT_HALF = math.sqrt(0.5)


def random_state(m_max, rng):
    vec = rng.normal(size=2 * (2 * m_max + 1)) + 1j * rng.normal(
        size=2 * (2 * m_max + 1)
    )
    vec /= np.linalg.norm(vec)
    return PhotonState(m_max, vec)


def random_unitary_op(m_max, rng):
    dim = 2 * (2 * m_max + 1)
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return LinearOp(basis_labels(m_max), q)


class TestTensor:
    def test_two_spin_product_state(self):
        pair = tensor("H", "H")
        # |H>|H> expands with amplitude 1/2 on every circular combination,
        # all signs positive, so each joint probability is 1/4.
        assert pair.shape == (2, 2)
        np.testing.assert_allclose(pair, 0.5 * np.ones((2, 2)), atol=1e-15)

    def test_spin_with_oam_charge(self):
        state = tensor("L", 0, m_max=2)
        assert state.amplitude("L", 0) == pytest.approx(1.0)
        assert state.norm() == pytest.approx(1.0)

    def test_linearity_in_spin_factor(self):
        plus = np.array([SQRT_HALF, SQRT_HALF])
        state = tensor(plus, 2, m_max=2)
        assert state.amplitude("L", 2) == pytest.approx(SQRT_HALF)
        assert state.amplitude("R", 2) == pytest.approx(SQRT_HALF)
        assert state.amplitude("L", -2) == 0

    def test_norm_multiplies(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        state = tensor(a, {1: 0.5, -1: 0.5}, m_max=1)
        assert state.norm() == pytest.approx(
            np.linalg.norm(a) * math.sqrt(0.5), abs=1e-12
        )

    def test_oam_beyond_truncation_rejected(self):
        with pytest.raises(TruncationError):
            tensor("L", {3: 1.0}, m_max=2)


class TestApply:
    def test_identity_leaves_state(self):
        rng = np.random.default_rng(3)
        s = random_state(2, rng)
        eye = LinearOp(basis_labels(2), np.eye(10))
        np.testing.assert_allclose(apply(eye, s).vector, s.vector, atol=1e-15)

    def test_spin_flip_on_basis_state(self):
        x = spin_op(np.array([[0, 1], [1, 0]]))
        out = apply(x, PhotonState.basis_state("L", 0, 2))
        assert out.amplitude("R", 0) == pytest.approx(1.0)
        assert out.norm() == pytest.approx(1.0)

    def test_basis_mismatch_rejected(self):
        op = LinearOp(basis_labels(1), np.eye(6))
        with pytest.raises(BasisMismatchError):
            apply(op, PhotonState.basis_state("L", 0, 2))

    def test_norm_preserved_by_random_unitaries(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            op = random_unitary_op(2, rng)
            assert op.is_unitary(1e-12)
            s = random_state(2, rng)
            assert apply(op, s).norm() == pytest.approx(1.0, abs=1e-12)

    def test_inner_adjoint_identity(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            op = random_unitary_op(1, rng)
            a, b = random_state(1, rng), random_state(1, rng)
            lhs = inner(a, apply(op, b))
            rhs = inner(apply(op.dagger(), a), b)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestInner:
    def test_self_overlap_is_one(self):
        s = PhotonState.basis_state("L", 0, 2)
        assert inner(s, s) == pytest.approx(1.0)

    def test_orthogonal_basis_states(self):
        a = PhotonState.basis_state("L", 0, 2)
        b = PhotonState.basis_state("R", 0, 2)
        assert inner(a, b) == 0

    def test_bell_state_component(self):
        bell = PhotonState.from_amplitudes(
            2, {("L", -2): SQRT_HALF, ("R", 2): SQRT_HALF}
        )
        assert inner(bell, PhotonState.basis_state("L", -2, 2)) == pytest.approx(
            SQRT_HALF
        )

    def test_conjugate_linear_in_first_argument(self):
        a = spin_ket("L") * 1j
        assert inner(a, spin_ket("L")) == pytest.approx(-1j)


class TestProject:
    def test_matching_spin_projection_is_certain(self):
        s = PhotonState.basis_state("L", 0, 2)
        out, prob = project(s, Projector("spin", {"L": 1.0}))
        assert prob == pytest.approx(1.0)
        assert states_equal_up_to_phase(out, s)

    def test_orthogonal_projection_flags_empty(self):
        s = PhotonState.basis_state("L", 0, 2)
        out, prob = project(s, Projector("spin", {"R": 1.0}))
        assert prob == 0.0
        assert out.is_zero

    def test_alice_projection_collapses_bob(self):
        # Hand expansion: rewriting Alice's circular components in the
        # H/V basis puts weight 1/2 on |H>_A, and conditioning on it
        # leaves Bob in (|L,-2> + |R,+2>)/sqrt(2).
        hybrid = BipartiteState.from_amplitudes(
            2, {("L", "L", -2): SQRT_HALF, ("R", "R", 2): SQRT_HALF}
        )
        proj = Projector("spin", {"L": SQRT_HALF, "R": SQRT_HALF}, side="alice")
        bob, prob = project(hybrid, proj)
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert bob.amplitude("L", -2) == pytest.approx(SQRT_HALF, abs=1e-12)
        assert bob.amplitude("R", 2) == pytest.approx(SQRT_HALF, abs=1e-12)

    def test_completeness_of_dichotomic_pair(self):
        rng = np.random.default_rng(5)
        plus = Projector("spin", {"L": SQRT_HALF, "R": SQRT_HALF * 1j})
        minus = Projector("spin", {"L": SQRT_HALF, "R": -SQRT_HALF * 1j})
        for _ in range(10):
            s = random_state(2, rng)
            _, p1 = project(s, plus)
            _, p2 = project(s, minus)
            assert p1 + p2 == pytest.approx(1.0, abs=1e-12)

    def test_projector_requires_unit_norm(self):
        with pytest.raises(ValueError):
            Projector("spin", {"L": 1.0, "R": 1.0})


class TestBasisChange:
    def test_h_expands_into_circular(self):
        # Linear components (c_H, c_V) = (1, 0) expand into circular ones.
        np.testing.assert_allclose(
            basis_change_circular_linear([1.0, 0.0], to="circular"),
            [SQRT_HALF, SQRT_HALF],
            atol=1e-15,
        )

    def test_left_circular_in_linear_basis(self):
        # Inverting the 2x2 basis matrix by hand gives |L> = (|H> + i|V>)/sqrt(2).
        np.testing.assert_allclose(
            basis_change_circular_linear("L", to="linear"),
            [SQRT_HALF, 1j * SQRT_HALF],
            atol=1e-15,
        )

    def test_round_trip_is_exact_identity(self):
        v = spin_ket("V")
        back = basis_change_circular_linear(
            basis_change_circular_linear(v, to="linear"), to="circular"
        )
        np.testing.assert_allclose(back, v, atol=1e-15)

    def test_bell_state_basis_identity(self):
        # (|H>|H> + |V>|V>)/sqrt(2) == (|L>|R> + |R>|L>)/sqrt(2), amplitude-wise.
        pair = (tensor("H", "H") + tensor("V", "V")) / math.sqrt(2)
        expected = np.array([[0, SQRT_HALF], [SQRT_HALF, 0]], dtype=complex)
        np.testing.assert_allclose(pair, expected, atol=1e-12)


class TestValueSemantics:
    def test_vectors_are_frozen(self):
        s = PhotonState.basis_state("L", 0, 1)
        with pytest.raises(ValueError):
            s.vector[0] = 0.0

    def test_global_phase_not_stripped(self):
        s = PhotonState.basis_state("L", 0, 1)
        t = PhotonState(1, s.vector * 1j)
        assert t.amplitude("L", 0) == pytest.approx(1j)
        assert states_equal_up_to_phase(s, t)

    def test_normalize_tolerance(self):
        vec = np.zeros(6, dtype=complex)
        vec[0] = 2.0
        s = PhotonState(1, vec).normalize()
        assert abs(s.norm() - 1.0) <= 1e-12

    def test_bipartite_norm_and_amplitude(self):
        state = BipartiteState.from_amplitudes(
            1, {("L", "R", 0): SQRT_HALF, ("R", "L", 0): SQRT_HALF}
        )
        assert state.norm() == pytest.approx(1.0)
        assert state.amplitude("L", "R", 0) == pytest.approx(SQRT_HALF)
