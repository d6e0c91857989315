import numpy as np
import pytest

from stabscope.magic import (
    ENUMERATION_QUBIT_CAP,
    PauliSnapshotBatch,
    ZSnapshotBatch,
    evolve_pauli_snapshots,
    expectations_in_set,
    m2_from_mlin,
    m2_product,
    m_lin,
    mlin_from_m2,
    pauli_expectations,
    pauli_probs_1q,
    pauli_probs_dense,
    sample_pauli_dense,
    sample_pauli_product,
    sre,
    string_index_to_letters,
)
from stabscope.pauli import PauliString, gate_tableau, identity_tableau, random_clifford
from stabscope.stategen import random_brickwork_circuit, random_haar_1q, random_stab_1q
from stabscope.statevector import (
    DenseState,
    H_MATRIX,
    ProductState,
    SingleQubitState,
    apply_1q,
    apply_circuit,
    apply_cnot,
    expand,
)

SQ2 = 2**-0.5
T_STATE = SingleQubitState(SQ2, np.exp(1j * np.pi / 4) * SQ2)
ZERO = SingleQubitState(1.0, 0.0)
PLUS = SingleQubitState(SQ2, SQ2)

LN43 = np.log(4.0 / 3.0)


def haar_product(n, rng):
    return ProductState(tuple(random_haar_1q(rng) for _ in range(n)))


class TestProbs1q:
    @pytest.mark.parametrize(
        "state,want",
        [
            (ZERO, (0.5, 0.0, 0.0, 0.5)),
            (T_STATE, (0.5, 0.25, 0.25, 0.0)),
            (PLUS, (0.5, 0.5, 0.0, 0.0)),
        ],
    )
    def test_examples(self, state, want):
        np.testing.assert_allclose(pauli_probs_1q(state).p, want, atol=1e-12)

    def test_normalized_for_haar(self, rng):
        for _ in range(50):
            assert abs(sum(pauli_probs_1q(random_haar_1q(rng)).p) - 1) < 1e-12


class TestEnumeration:
    def test_normalization_pure_states(self, rng):
        for n in (1, 2, 3, 6):
            s = expand(haar_product(n, rng))
            if n >= 2:
                s = apply_circuit(s, random_brickwork_circuit(n, 2, rng))
            assert abs(pauli_probs_dense(s).sum() - 1) < 1e-10

    def test_identity_component(self, rng):
        s = expand(haar_product(3, rng))
        assert abs(pauli_expectations(s)[0] - 1) < 1e-12

    def test_enumeration_order_is_lexicographic(self):
        # <sigma> of |0>: I -> 1, X -> 0, Y -> 0, Z -> 1
        vals = pauli_expectations(expand(ProductState((ZERO,))))
        np.testing.assert_allclose(vals, [1, 0, 0, 1], atol=1e-12)
        letters = string_index_to_letters(np.arange(16), 2)
        assert tuple(letters[0]) == (0, 0)
        assert tuple(letters[1]) == (0, 1)  # site 0 outermost
        assert tuple(letters[4]) == (1, 0)

    def test_cap(self):
        amps = np.zeros(1 << 9)
        amps[0] = 1.0
        with pytest.raises(ValueError):
            pauli_expectations(DenseState(9, amps))


class TestSre:
    def test_stabilizer_zero(self):
        s = expand(ProductState((ZERO, ZERO, ZERO)))
        assert abs(sre(s, 2.0)) < 1e-10

    def test_t_state(self):
        assert abs(sre(expand(ProductState((T_STATE,))), 2.0) - LN43) < 1e-12

    def test_additivity(self):
        s = expand(ProductState((T_STATE, T_STATE)))
        assert abs(sre(s, 2.0) - 2 * LN43) < 1e-10

    def test_alpha_one_rejected(self):
        with pytest.raises(ValueError):
            sre(expand(ProductState((ZERO,))), 1.0)

    def test_nonnegative_and_zero_iff_stabilizer(self, rng):
        for _ in range(10):
            stab = expand(ProductState(tuple(random_stab_1q(rng) for _ in range(3))))
            assert abs(sre(stab, 2.0)) < 1e-10
            magic = expand(haar_product(3, rng))
            val = sre(magic, 2.0)
            assert val > 1e-6

    def test_fractional_alpha(self, rng):
        s = expand(haar_product(2, rng))
        assert sre(s, 0.5) >= -1e-10


class TestMlin:
    def test_stabilizer_zero(self):
        assert abs(m_lin(expand(ProductState((ZERO, ZERO))))) < 1e-12

    def test_t_state_quarter(self):
        assert abs(m_lin(expand(ProductState((T_STATE,)))) - 0.25) < 1e-12

    def test_consistent_with_sre(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 7))
            s = expand(haar_product(n, rng))
            assert abs(m2_from_mlin(m_lin(s)) - sre(s, 2.0)) < 1e-10

    def test_mlin_m2_roundtrip(self):
        for m2 in (0.0, 0.3, 1.7):
            assert abs(m2_from_mlin(mlin_from_m2(m2)) - m2) < 1e-12

    def test_m2_from_mlin_domain(self):
        with pytest.raises(ValueError):
            m2_from_mlin(1.0)


class TestM2Product:
    def test_all_stabilizer(self, rng):
        p = ProductState(tuple(random_stab_1q(rng) for _ in range(5)))
        assert abs(m2_product(p)) < 1e-12

    def test_three_t_states(self):
        p = ProductState((T_STATE,) * 3)
        assert abs(m2_product(p) - 3 * LN43) < 1e-10
        assert abs(sre(expand(p), 2.0) - 3 * LN43) < 1e-10

    def test_matches_dense(self, rng):
        for _ in range(10):
            n = int(rng.integers(1, 7))
            p = haar_product(n, rng)
            assert abs(m2_product(p) - sre(expand(p), 2.0)) < 1e-10


class TestSamplers:
    def test_zero_state_letters(self, rng):
        rows = sample_pauli_product(ProductState((ZERO,)), 10_000, rng)
        counts = np.bincount(rows[:, 0], minlength=4) / 10_000
        assert counts[1] == 0 and counts[2] == 0
        assert abs(counts[0] - 0.5) < 5 * 0.5 / np.sqrt(10_000)

    def test_t_state_frequencies(self, rng):
        rows = sample_pauli_product(ProductState((T_STATE,)), 100_000, rng)
        counts = np.bincount(rows[:, 0], minlength=4) / 100_000
        for got, want in zip(counts, (0.5, 0.25, 0.25, 0.0)):
            se = max(np.sqrt(want * (1 - want) / 100_000), 1e-12)
            assert abs(got - want) <= 5 * se + 1e-9

    def test_site_independence_mutual_information(self, rng):
        p = haar_product(2, rng)
        rows = sample_pauli_product(p, 100_000, rng)
        joint = np.zeros((4, 4))
        for a, b in rows:
            joint[a, b] += 1
        joint /= joint.sum()
        pa, pb = joint.sum(1), joint.sum(0)
        mask = joint > 0
        mi = np.sum(joint[mask] * np.log2(joint[mask] / np.outer(pa, pb)[mask]))
        assert mi < 0.01

    def test_dense_matches_product_tv(self, rng):
        p = haar_product(2, rng)
        n_shots = 100_000
        rows_p = sample_pauli_product(p, n_shots, rng)
        rows_d = sample_pauli_dense(expand(p), n_shots, rng)
        base = 4 ** np.arange(1, -1, -1)
        emp_p = np.bincount(rows_p @ base, minlength=16) / n_shots
        emp_d = np.bincount(rows_d @ base, minlength=16) / n_shots
        tv = 0.5 * np.abs(emp_p - emp_d).sum()
        assert tv < 0.02

    def test_ghz_support(self, rng):
        s = apply_cnot(apply_1q(expand(ProductState((ZERO, ZERO))), 0, H_MATRIX), 0, 1)
        rows = sample_pauli_dense(s, 5000, rng)
        support = set(expectations_in_set(s, 1e-10).tolist())
        base = 4 ** np.arange(1, -1, -1)
        assert set((rows @ base).tolist()) <= support

    def test_dense_distribution_sums_to_one(self, rng):
        s = expand(haar_product(3, rng))
        assert abs(pauli_probs_dense(s).sum() - 1) < 1e-10


class TestEvolveSnapshots:
    def test_identity_noop(self, rng):
        rows = rng.integers(0, 4, size=(100, 3)).astype(np.uint8)
        out = evolve_pauli_snapshots(rows, identity_tableau(3))
        np.testing.assert_array_equal(rows, out)

    def test_hadamard_swaps_letters(self, rng):
        rows = sample_pauli_product(ProductState((ZERO,)), 20_000, rng)
        out = evolve_pauli_snapshots(rows, gate_tableau("H", 1, 0))
        # Z letters become X letters: matches the distribution of |+>
        counts = np.bincount(out[:, 0], minlength=4) / len(out)
        assert counts[3] == 0 and counts[2] == 0
        assert abs(counts[1] - 0.5) < 5 * 0.5 / np.sqrt(20_000)

    def test_mismatched_width_rejected(self, rng):
        with pytest.raises(Exception):
            evolve_pauli_snapshots(np.zeros((5, 2), dtype=np.uint8), identity_tableau(3))

    def test_sample_then_evolve_matches_dense_oracle(self, rng):
        n, shots = 3, 100_000
        p = haar_product(n, rng)
        circ = random_brickwork_circuit(n, 2, rng)
        from stabscope.stategen import circuit_tableau

        t = circuit_tableau(circ)
        rows = evolve_pauli_snapshots(sample_pauli_product(p, shots, rng), t)
        evolved = apply_circuit(expand(p), circ)
        oracle_rows = sample_pauli_dense(evolved, shots, rng)
        base = 4 ** np.arange(n - 1, -1, -1)
        emp = np.bincount(rows @ base, minlength=4**n) / shots
        oracle = np.bincount(oracle_rows @ base, minlength=4**n) / shots
        tv = 0.5 * np.abs(emp - oracle).sum()
        assert tv < 0.03
        # and against the exact distribution of the evolved state
        exact = pauli_probs_dense(evolved)
        assert 0.5 * np.abs(emp - exact).sum() < 0.03


class TestBatchTypes:
    def test_z_batch_validation(self):
        with pytest.raises(ValueError):
            ZSnapshotBatch(np.array([[0, 2]], dtype=np.uint8))
        b = ZSnapshotBatch(np.zeros((10, 4), dtype=np.uint8), label=0)
        assert b.n_samples == 10 and b.n == 4

    def test_pauli_batch_validation(self):
        with pytest.raises(ValueError):
            PauliSnapshotBatch(np.full((2, 2, 2), 9, dtype=np.uint8))
        b = PauliSnapshotBatch(np.zeros((5, 3, 4), dtype=np.uint8), label=1)
        assert (b.n_samples, b.n_layers, b.n) == (5, 3, 4)
