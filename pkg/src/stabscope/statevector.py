"""Dense pure-state simulation.

Product states are kept as per-qubit amplitude pairs; dense states as a full
complex amplitude vector.  The basis index convention is big-endian: qubit 0
is the most significant bit, so |s_0 s_1 ... s_{N-1}> sits at index
sum_j s_j 2^{N-1-j}.  Every file format and sampler in the package uses this
convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pauli import CliffordTableau, DimensionError, PauliString

# Dense vectors above this qubit count are refused unless the caller passes
# an explicit cap; 2^16 amplitudes keep desk-scale runs comfortable.
DENSE_QUBIT_CAP = 16

_SQ2 = 1.0 / np.sqrt(2.0)

PAULI_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2
S_MATRIX = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True)
class SingleQubitState:
    """Normalized qubit a|0> + b|1>."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"qubit state not normalized: |a|^2+|b|^2 = {norm}")

    def bloch(self) -> tuple[float, float, float]:
        """(<X>, <Y>, <Z>)."""
        c = np.conj(self.a) * self.b
        return (
            2.0 * float(c.real),
            2.0 * float(c.imag),
            float(abs(self.a) ** 2 - abs(self.b) ** 2),
        )


@dataclass(frozen=True)
class ProductState:
    qubits: tuple[SingleQubitState, ...]

    def __post_init__(self):
        if not self.qubits:
            raise ValueError("empty product state")
        object.__setattr__(self, "qubits", tuple(self.qubits))

    @property
    def n(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class DenseState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n,):
            raise ValueError("amplitude vector must have length 2^n")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: {norm}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class CircuitBlock:
    """A Clifford block placed on specific qubits (one or two of them)."""

    qubits: tuple[int, ...]
    tableau: CliffordTableau

    def __post_init__(self):
        if len(self.qubits) != self.tableau.n:
            raise DimensionError("block tableau size must match its qubit tuple")


@dataclass(frozen=True)
class Circuit:
    """Layers of Clifford blocks; within a layer the qubit sets are disjoint."""

    n: int
    layers: tuple[tuple[CircuitBlock, ...], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(l) for l in self.layers))
        for layer in self.layers:
            seen = set()
            for block in layer:
                for q in block.qubits:
                    if not 0 <= q < self.n:
                        raise ValueError("block qubit out of range")
                    if q in seen:
                        raise ValueError("overlapping blocks within a layer")
                    seen.add(q)

    @property
    def depth(self) -> int:
        return len(self.layers)


def expand(p: ProductState, cap: int | None = None) -> DenseState:
    """Kronecker-expand a product state into a dense vector."""
    cap = DENSE_QUBIT_CAP if cap is None else cap
    if p.n > cap:
        raise ValueError(f"dense expansion of {p.n} qubits exceeds cap {cap}")
    amps = np.array([1.0 + 0j])
    for q in p.qubits:
        amps = np.kron(amps, np.array([q.a, q.b], dtype=complex))
    return DenseState(p.n, amps)


def _check_unitary(u: np.ndarray, dim: int):
    u = np.asarray(u, dtype=complex)
    if u.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(dim))) > 1e-10:
        raise ValueError("matrix is not unitary")
    return u


def apply_1q(s: DenseState, j: int, u: np.ndarray) -> DenseState:
    if not 0 <= j < s.n:
        raise ValueError("qubit index out of range")
    u = _check_unitary(u, 2)
    psi = s.amplitudes.reshape((2,) * s.n)
    psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [j])), 0, j)
    return DenseState(s.n, psi.reshape(-1))


def apply_2q(s: DenseState, q0: int, q1: int, u: np.ndarray) -> DenseState:
    if q0 == q1 or not (0 <= q0 < s.n and 0 <= q1 < s.n):
        raise ValueError("need two distinct in-range qubits")
    u = _check_unitary(u, 4).reshape(2, 2, 2, 2)
    psi = s.amplitudes.reshape((2,) * s.n)
    psi = np.tensordot(u, psi, axes=([2, 3], [q0, q1]))
    psi = np.moveaxis(psi, [0, 1], [q0, q1])
    return DenseState(s.n, psi.reshape(-1))


def apply_cnot(s: DenseState, control: int, target: int) -> DenseState:
    return apply_2q(s, control, target, CNOT_MATRIX)


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli string (test/oracle scale only)."""
    m = np.array([[p.sign]], dtype=complex)
    for let in p.letters():
        m = np.kron(m, PAULI_MATRICES[let])
    return m


def clifford_unitary(t: CliffordTableau) -> np.ndarray:
    """A unitary (fixed up to global phase) whose conjugation action is the tableau.

    Column s is built as X̃^s |phi_0> where |phi_0> is the joint +1 eigenstate
    of the Z̃_j images; this reproduces the tableau exactly, signs included.
    """
    d = 1 << t.n
    proj = np.eye(d, dtype=complex)
    for zimg in t.z_images:
        proj = proj @ (np.eye(d) + pauli_matrix(zimg)) / 2.0
    col = None
    for i in range(d):
        v = proj[:, i]
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            col = v / nrm
            break
    if col is None:
        raise AssertionError("tableau Z-images admit no joint +1 eigenstate")
    x_mats = [pauli_matrix(x) for x in t.x_images]
    u = np.empty((d, d), dtype=complex)
    for s in range(d):
        vec = col
        for j in range(t.n):
            if (s >> (t.n - 1 - j)) & 1:
                vec = x_mats[j] @ vec
        u[:, s] = vec
    return u


def apply_circuit(s: DenseState, circuit: Circuit) -> DenseState:
    if circuit.n != s.n:
        raise DimensionError("circuit and state qubit counts differ")
    for layer in circuit.layers:
        for block in layer:
            u = clifford_unitary(block.tableau)
            if len(block.qubits) == 1:
                s = apply_1q(s, block.qubits[0], u)
            else:
                s = apply_2q(s, block.qubits[0], block.qubits[1], u)
    return s


def _index_mask(mask: int, n: int) -> int:
    """Map a qubit-indexed bit mask to basis-index bits (qubit 0 = MSB)."""
    out = 0
    for j in range(n):
        if (mask >> j) & 1:
            out |= 1 << (n - 1 - j)
    return out


def expectation(s: DenseState, p: PauliString) -> float:
    """<psi| p |psi>, asserted real to 1e-10."""
    if p.n != s.n:
        raise DimensionError(f"qubit counts differ: {p.n} != {s.n}")
    n = s.n
    xm = _index_mask(p.x_mask, n)
    zm = _index_mask(p.z_mask, n)
    n_y = (p.x_mask & p.z_mask).bit_count()
    idx = np.arange(1 << n, dtype=np.uint64)
    par = np.bitwise_count(idx & np.uint64(zm)) & np.uint64(1)
    coef = p.sign * (1j**n_y) * (1.0 - 2.0 * par.astype(np.float64))
    amps = s.amplitudes
    val = np.sum(np.conj(amps[(idx ^ np.uint64(xm)).astype(np.int64)]) * coef * amps)
    if abs(val.imag) > 1e-10:
        raise AssertionError(f"expectation has imaginary residue {val.imag}")
    return float(val.real)


def expectation_product(p: ProductState, sigma: PauliString) -> float:
    """Factorized O(N) Pauli expectation on a product state."""
    if sigma.n != p.n:
        raise DimensionError(f"qubit counts differ: {sigma.n} != {p.n}")
    out = float(sigma.sign)
    for j, q in enumerate(p.qubits):
        let = sigma.letter(j)
        if let == 0:
            continue
        bx, by, bz = q.bloch()
        out *= (bx, by, bz)[let - 1]
        if out == 0.0:
            return 0.0
    return out


def sample_z(s: DenseState, count: int, rng: np.random.Generator) -> np.ndarray:
    """Born-rule sampling in the computational basis: (count, n) bit matrix."""
    if count < 1:
        raise ValueError("need at least one sample")
    probs = np.abs(s.amplitudes) ** 2
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(count), side="right").astype(np.int64)
    shifts = np.arange(s.n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
