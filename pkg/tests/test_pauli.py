import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from stabscope.pauli import (
    CliffordTableau,
    DimensionError,
    PauliString,
    PhasedPauli,
    commutes,
    compose,
    conjugate,
    embed_tableau,
    enumerate_cliffords_1q,
    gate_tableau,
    identity_tableau,
    pauli_mul,
    random_clifford,
    tableau_key,
)

from conftest import CNOT_GATE, H_GATE, S_GATE, kron_letters


def phase_of(k):
    return 1j**k


def random_pauli(n, rng, signed=True):
    sign = int(1 - 2 * rng.integers(0, 2)) if signed else 1
    return PauliString.from_letters(rng.integers(0, 4, size=n), sign)


class TestMul:
    @pytest.mark.parametrize(
        "a,b,want,phase",
        [
            ("X", "Y", "Z", 1),
            ("Y", "X", "Z", 3),
            ("X", "X", "I", 0),
            ("Z", "X", "Y", 1),
            ("Y", "Z", "X", 1),
            ("-X", "Y", "Z", 3),
        ],
    )
    def test_single_qubit_table(self, a, b, want, phase):
        out = pauli_mul(PauliString.from_label(a), PauliString.from_label(b))
        assert out.string.letters() == PauliString.from_label(want).letters()
        assert out.phase == phase

    def test_two_site_example(self):
        # (X⊗Z)·(Z⊗X): per-site phases i·(-i) cancel
        out = pauli_mul(PauliString.from_label("XZ"), PauliString.from_label("ZX"))
        assert out.string.letters() == (2, 2)  # Y, Y
        assert out.phase == 0
        lhs = kron_letters([1, 3]) @ kron_letters([3, 1])
        np.testing.assert_allclose(lhs, kron_letters(out.string.letters()), atol=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(
        st.lists(st.integers(0, 3), min_size=1, max_size=3),
        st.lists(st.integers(0, 3), min_size=1, max_size=3),
        st.sampled_from([1, -1]),
        st.sampled_from([1, -1]),
    )
    def test_matches_matrix_oracle(self, la, lb, sa, sb):
        n = min(len(la), len(lb))
        a = PauliString.from_letters(la[:n], sa)
        b = PauliString.from_letters(lb[:n], sb)
        out = pauli_mul(a, b)
        lhs = kron_letters(a.letters(), a.sign) @ kron_letters(b.letters(), b.sign)
        rhs = phase_of(out.phase) * kron_letters(out.string.letters())
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_associative(self, rng):
        for n in (1, 2, 3):
            for _ in range(30):
                a, b, c = (random_pauli(n, rng) for _ in range(3))
                ab = pauli_mul(a, b)
                left = pauli_mul(ab.string, c)
                bc = pauli_mul(b, c)
                right = pauli_mul(a, bc.string)
                assert left.string == right.string
                assert (left.phase + ab.phase) % 4 == (right.phase + bc.phase) % 4

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            pauli_mul(PauliString.from_label("X"), PauliString.from_label("XX"))

    def test_phased_pauli_hermitian(self):
        out = pauli_mul(PauliString.from_label("X"), PauliString.from_label("X"))
        assert out.hermitian() == PauliString.identity(1)
        with pytest.raises(ValueError):
            pauli_mul(PauliString.from_label("X"), PauliString.from_label("Y")).hermitian()
        with pytest.raises(ValueError):
            PhasedPauli(PauliString.from_label("-X"), 0)


class TestCommutes:
    @pytest.mark.parametrize(
        "a,b,want",
        [("X", "X", True), ("X", "Z", False), ("XX", "ZZ", True), ("XI", "IZ", True)],
    )
    def test_examples(self, a, b, want):
        assert commutes(PauliString.from_label(a), PauliString.from_label(b)) is want

    def test_matrix_commutator_oracle(self, rng):
        for n in (1, 2, 3):
            for _ in range(40):
                a, b = random_pauli(n, rng), random_pauli(n, rng)
                ma = kron_letters(a.letters(), a.sign)
                mb = kron_letters(b.letters(), b.sign)
                comm_zero = np.allclose(ma @ mb - mb @ ma, 0, atol=1e-12)
                assert commutes(a, b) is comm_zero

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            commutes(PauliString.from_label("X"), PauliString.from_label("XX"))


class TestTableaus:
    def test_identity_tableau(self):
        t = identity_tableau(2)
        assert t.x_images[0] == PauliString.from_label("XI")
        assert t.z_images[1] == PauliString.from_label("IZ")
        assert t.is_symplectic()

    def test_compose_identity(self, rng):
        t = random_clifford(3, rng)
        assert tableau_key(compose(identity_tableau(3), t)) == tableau_key(t)
        assert tableau_key(compose(t, identity_tableau(3))) == tableau_key(t)

    @pytest.mark.parametrize(
        "gate,qubits,inp,want",
        [
            ("H", (0,), "X", "+Z"),
            ("H", (0,), "Z", "+X"),
            ("H", (0,), "Y", "-Y"),
            ("S", (0,), "X", "+Y"),
            ("S", (0,), "Z", "+Z"),
        ],
    )
    def test_1q_gate_rules(self, gate, qubits, inp, want):
        t = gate_tableau(gate, 1, *qubits)
        got = conjugate(t, PauliString.from_label(inp))
        assert str(got) == want

    def test_cnot_rules(self):
        t = gate_tableau("CNOT", 2, 0, 1)
        assert str(conjugate(t, PauliString.from_label("XI"))) == "+XX"
        assert str(conjugate(t, PauliString.from_label("IZ"))) == "+ZZ"
        assert str(conjugate(t, PauliString.from_label("IX"))) == "+IX"
        assert str(conjugate(t, PauliString.from_label("ZI"))) == "+ZI"

    def test_gate_conjugation_matches_matrix_oracle(self, rng):
        cases = [
            (gate_tableau("H", 1, 0), H_GATE),
            (gate_tableau("S", 1, 0), S_GATE),
            (gate_tableau("CNOT", 2, 0, 1), CNOT_GATE),
        ]
        for t, u in cases:
            for _ in range(20):
                p = random_pauli(t.n, rng)
                got = conjugate(t, p)
                lhs = u @ kron_letters(p.letters(), p.sign) @ u.conj().T
                rhs = kron_letters(got.letters(), got.sign)
                np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_s_squared_flips_x(self):
        ss = compose(gate_tableau("S", 1, 0), gate_tableau("S", 1, 0))
        assert str(conjugate(ss, PauliString.from_label("X"))) == "-X"
        hh = compose(gate_tableau("H", 1, 0), gate_tableau("H", 1, 0))
        assert tableau_key(hh) == tableau_key(identity_tableau(1))

    def test_compose_associative(self, rng):
        for _ in range(10):
            a, b, c = (random_clifford(3, rng) for _ in range(3))
            left = compose(compose(a, b), c)
            right = compose(a, compose(b, c))
            assert tableau_key(left) == tableau_key(right)

    def test_conjugate_preserves_commutation(self, rng):
        for n in (2, 3, 4):
            for _ in range(20):
                t = random_clifford(n, rng)
                p, q = random_pauli(n, rng), random_pauli(n, rng)
                assert commutes(p, q) == commutes(conjugate(t, p), conjugate(t, q))

    def test_conjugate_compose_homomorphism(self, rng):
        for _ in range(20):
            a, b = random_clifford(3, rng), random_clifford(3, rng)
            p = random_pauli(3, rng)
            assert conjugate(compose(a, b), p) == conjugate(a, conjugate(b, p))

    def test_conjugate_identity_stays_identity(self, rng):
        for n in (1, 3):
            for _ in range(50):
                t = random_clifford(n, rng)
                out = conjugate(t, PauliString.identity(n))
                assert out.is_identity and out.sign == 1

    def test_bad_gate_args(self):
        with pytest.raises(ValueError):
            gate_tableau("H", 1, 3)
        with pytest.raises(ValueError):
            gate_tableau("CNOT", 2, 1, 1)
        with pytest.raises(ValueError):
            gate_tableau("Q", 1, 0)

    def test_embed_tableau(self, rng):
        small = random_clifford(2, rng)
        full = embed_tableau(small, (1, 3), 4)
        assert full.is_symplectic()
        assert full.x_images[0] == PauliString.from_label("XIII")
        # local action carried over to the placed qubits
        lifted = full.x_images[1]
        assert lifted.letter(0) == 0 and lifted.letter(2) == 0

    def test_symplectic_invariant_detects_breakage(self):
        bad = CliffordTableau(
            1, (PauliString.from_label("X"),), (PauliString.from_label("X"),)
        )
        assert not bad.is_symplectic()


class TestRandomClifford:
    def test_always_symplectic(self, rng):
        for n in (1, 2, 3, 5, 8):
            for _ in range(10):
                assert random_clifford(n, rng).is_symplectic()

    def test_uniform_over_24_at_n1(self, rng):
        draws = 24000
        counts = {}
        for _ in range(draws):
            key = tableau_key(random_clifford(1, rng))
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == 24
        expected = draws / 24
        stat = sum((c - expected) ** 2 / expected for c in counts.values())
        assert stat < chi2.ppf(0.99, 23)

    def test_x0_image_uniform_at_n2(self, rng):
        # brute-force enumeration: every non-identity string with either sign
        # is a completable image of X_0 (30 of them)
        valid = set()
        for letters in np.ndindex(4, 4):
            if letters == (0, 0):
                continue
            for sign in (1, -1):
                valid.add((PauliString.from_letters(letters, sign).x_mask,
                           PauliString.from_letters(letters, sign).z_mask, sign))
        assert len(valid) == 30
        draws = 30000
        counts = dict.fromkeys(valid, 0)
        for _ in range(draws):
            t = random_clifford(2, rng)
            img = t.x_images[0]
            counts[(img.x_mask, img.z_mask, img.sign)] += 1
        expected = draws / 30
        stat = sum((c - expected) ** 2 / expected for c in counts.values())
        assert stat < chi2.ppf(0.99, 29)


class TestEnumerate1q:
    def test_count_and_distinct(self):
        tabs = enumerate_cliffords_1q()
        assert len(tabs) == 24
        assert len({tableau_key(t) for t in tabs}) == 24

    def test_contains_identity(self):
        keys = {tableau_key(t) for t in enumerate_cliffords_1q()}
        assert tableau_key(identity_tableau(1)) in keys

    def test_closed_under_compose(self):
        tabs = enumerate_cliffords_1q()
        keys = {tableau_key(t) for t in tabs}
        for a in tabs[:8]:
            for b in tabs:
                assert tableau_key(compose(a, b)) in keys

    def test_all_symplectic(self):
        assert all(t.is_symplectic() for t in enumerate_cliffords_1q())
