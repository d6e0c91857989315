"""Pauli-spectrum magic measures and Pauli-basis snapshot sampling.

The probability a pure state assigns to an unsigned Pauli string is
Tr[rho sigma]^2 / 2^N; its Renyi-alpha entropy minus log(d) is the order-
alpha stabilizer entropy, which vanishes exactly on stabilizer states.
All logarithms are natural (see LOG_BASE_E below).

Enumeration over unsigned strings is in lexicographic order with letter
codes I=0 < X=1 < Y=2 < Z=3 and site 0 outermost; the categorical sampler
and every oracle comparison share that order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import CliffordTableau, DimensionError, PauliString
from .statevector import DenseState, PAULI_MATRICES, ProductState, SingleQubitState

# One switch for the logarithm convention used by every magic measure.
LOG_BASE_E = np.e

# Enumeration is capped: 4^n strings get large quickly.
ENUMERATION_QUBIT_CAP = 8


def _log(x: float) -> float:
    return float(np.log(x) / np.log(LOG_BASE_E))


@dataclass(frozen=True)
class PauliProbs1q:
    """Single-qubit Pauli distribution (p_I, p_X, p_Y, p_Z); p_I = 1/2."""

    p: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.p) != 4 or any(v < -1e-12 for v in self.p):
            raise ValueError("need four nonnegative probabilities")


@dataclass(frozen=True)
class ZSnapshotBatch:
    """Computational-basis snapshots of one state: (n_samples, n) bits."""

    entries: np.ndarray
    label: int | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.uint8)
        if e.ndim != 2:
            raise ValueError("entries must be (n_samples, n)")
        if e.max(initial=0) > 1:
            raise ValueError("z-basis entries must be bits")
        object.__setattr__(self, "entries", e)

    @property
    def n_samples(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class PauliSnapshotBatch:
    """Pauli-basis snapshots of one state: (n_samples, n_layers, n) letters."""

    entries: np.ndarray
    label: int | None = None

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.uint8)
        if e.ndim != 3:
            raise ValueError("entries must be (n_samples, n_layers, n)")
        if e.max(initial=0) > 3:
            raise ValueError("letter codes must be < 4")
        object.__setattr__(self, "entries", e)

    @property
    def n_samples(self) -> int:
        return self.entries.shape[0]

    @property
    def n_layers(self) -> int:
        return self.entries.shape[1]

    @property
    def n(self) -> int:
        return self.entries.shape[2]


def pauli_probs_1q(q: SingleQubitState) -> PauliProbs1q:
    bx, by, bz = q.bloch()
    return PauliProbs1q((0.5, bx * bx / 2.0, by * by / 2.0, bz * bz / 2.0))


# Tr[rho sigma] for all strings at once: rho viewed as an n-fold tensor of
# 2x2 site blocks, each block contracted against the four Pauli matrices.
_SITE_TRANSFORM = np.stack(
    [m.T.reshape(4) for m in PAULI_MATRICES]
)  # (letter, 2*row+col) with sigma[col,row] layout for the trace


def pauli_expectations(state: DenseState) -> np.ndarray:
    """<sigma> for every unsigned string, shape (4^n,) in enumeration order."""
    n = state.n
    if n > ENUMERATION_QUBIT_CAP:
        raise ValueError(f"enumeration over 4^{n} strings exceeds cap")
    psi = state.amplitudes
    rho = np.outer(psi, psi.conj())
    # axes (r_0..r_{n-1}, c_0..c_{n-1}) -> (r_0, c_0, r_1, c_1, ...)
    t = rho.reshape((2,) * (2 * n))
    order = [axis for j in range(n) for axis in (j, n + j)]
    t = t.transpose(order).reshape((4,) * n)
    for j in range(n):
        t = np.tensordot(_SITE_TRANSFORM, t, axes=([1], [j]))
        t = np.moveaxis(t, 0, j)
    flat = t.reshape(-1)
    if np.max(np.abs(flat.imag)) > 1e-10:
        raise AssertionError("Pauli expectations acquired imaginary parts")
    return flat.real


def pauli_probs_dense(state: DenseState) -> np.ndarray:
    """The full distribution over unsigned strings, shape (4^n,)."""
    e = pauli_expectations(state)
    return e * e / (1 << state.n)


def string_index_to_letters(indices: np.ndarray, n: int) -> np.ndarray:
    """Decode enumeration-order string indices to (…, n) letter arrays."""
    indices = np.asarray(indices, dtype=np.int64)
    shifts = np.array([2 * (n - 1 - j) for j in range(n)], dtype=np.int64)
    return ((indices[..., None] >> shifts) & 3).astype(np.uint8)


def sre(state: DenseState, alpha: float) -> float:
    """Order-alpha stabilizer entropy of the Pauli distribution.

    Equals (1/(1-alpha)) log( sum_sigma <sigma>^{2 alpha} / d ); zero exactly
    on stabilizer states.
    """
    if alpha == 1:
        raise ValueError("alpha = 1 is not supported")
    e2 = pauli_expectations(state) ** 2
    total = float(np.sum(e2**alpha)) / (1 << state.n)
    return _log(total) / (1.0 - alpha)


def m_lin(state: DenseState) -> float:
    """Stabilizer linear entropy 1 - d * ||Pi||^2."""
    e2 = pauli_expectations(state) ** 2
    return 1.0 - float(np.sum(e2 * e2)) / (1 << state.n)


def m2_from_mlin(m: float) -> float:
    if m >= 1.0:
        raise ValueError("linear entropy must be < 1 for a pure state")
    return -_log(1.0 - m)


def mlin_from_m2(m2: float) -> float:
    return 1.0 - float(np.exp(-m2 * np.log(LOG_BASE_E)))


def _m2_1q(q: SingleQubitState) -> float:
    bx, by, bz = q.bloch()
    return -_log((1.0 + bx**4 + by**4 + bz**4) / 2.0)


def m2_product(p: ProductState) -> float:
    """Order-2 stabilizer entropy of a product state, O(N) by additivity."""
    return float(sum(_m2_1q(q) for q in p.qubits))


def _categorical(cdf: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.searchsorted(cdf, rng.random(count), side="right")


def sample_pauli_product(
    p: ProductState, count: int, rng: np.random.Generator
) -> np.ndarray:
    """(count, N) letter matrix sampled from the factorized Pauli distribution.

    Sites are independent for product states, so each qubit is drawn from its
    own four-letter distribution.
    """
    out = np.empty((count, p.n), dtype=np.uint8)
    for j, q in enumerate(p.qubits):
        probs = np.asarray(pauli_probs_1q(q).p)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        out[:, j] = _categorical(cdf, count, rng)
    return out


def sample_pauli_dense(
    state: DenseState, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Exact categorical sampling from the enumerated Pauli distribution."""
    probs = pauli_probs_dense(state)
    cdf = np.cumsum(probs)
    if abs(cdf[-1] - 1.0) > 1e-8:
        raise AssertionError("Pauli distribution does not sum to 1 (state not pure?)")
    cdf[-1] = 1.0
    idx = _categorical(cdf, count, rng)
    return string_index_to_letters(idx, state.n)


def _letters_to_bits(rows: np.ndarray) -> np.ndarray:
    """(count, n) letters -> (count, 2n) interleaved (x, z) bits."""
    count, n = rows.shape
    bits = np.empty((count, 2 * n), dtype=np.uint8)
    bits[:, 0::2] = (rows == 1) | (rows == 2)  # X or Y
    bits[:, 1::2] = (rows == 3) | (rows == 2)  # Z or Y
    return bits


def _bits_to_letters(bits: np.ndarray) -> np.ndarray:
    x = bits[:, 0::2].astype(np.int16)
    z = bits[:, 1::2].astype(np.int16)
    # (x,z): (0,0)->I, (1,0)->X, (1,1)->Y, (0,1)->Z
    return (x + z * (3 - 2 * x)).astype(np.uint8)


def tableau_bit_matrix(t: CliffordTableau) -> np.ndarray:
    """(2n, 2n) GF(2) matrix of the conjugation action on unsigned strings."""
    n = t.n
    m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    for j in range(n):
        for row, img in ((2 * j, t.x_images[j]), (2 * j + 1, t.z_images[j])):
            for q in range(n):
                m[row, 2 * q] = (img.x_mask >> q) & 1
                m[row, 2 * q + 1] = (img.z_mask >> q) & 1
    return m


def evolve_pauli_snapshots(rows: np.ndarray, t: CliffordTableau) -> np.ndarray:
    """Replace each sampled string by the letters of its image under the tableau.

    Signs are discarded: the Pauli distribution depends only on <sigma>^2 and
    snapshot images encode letters only.  With signs dropped the action is
    linear over GF(2), so the whole batch is one bit-matrix product.
    """
    rows = np.asarray(rows, dtype=np.uint8)
    if rows.ndim != 2 or rows.shape[1] != t.n:
        raise DimensionError("rows must be (count, n) letters matching the tableau")
    bits = _letters_to_bits(rows)
    out = (bits.astype(np.int32) @ tableau_bit_matrix(t).astype(np.int32)) % 2
    return _bits_to_letters(out.astype(np.uint8))


def conjugate_letters(t: CliffordTableau, letters) -> np.ndarray:
    """Single-row convenience wrapper around evolve_pauli_snapshots."""
    row = np.asarray(letters, dtype=np.uint8)[None, :]
    return evolve_pauli_snapshots(row, t)[0]


def expectations_in_set(state: DenseState, threshold: float = 1e-12) -> np.ndarray:
    """Indices of strings with |<sigma>| above threshold (support of Pi)."""
    return np.nonzero(np.abs(pauli_expectations(state)) > threshold)[0]
