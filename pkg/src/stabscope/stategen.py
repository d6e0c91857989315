"""Random generation of labeled input states and random Clifford circuits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .magic import m2_product
from .pauli import CliffordTableau, compose, embed_tableau, identity_tableau, random_clifford
from .statevector import Circuit, CircuitBlock, ProductState, SingleQubitState

_SQ2 = 1.0 / np.sqrt(2.0)

# |0>, |1>, |+>, |->, |+i>, |-i>
STABILIZER_1Q = (
    SingleQubitState(1.0, 0.0),
    SingleQubitState(0.0, 1.0),
    SingleQubitState(_SQ2, _SQ2),
    SingleQubitState(_SQ2, -_SQ2),
    SingleQubitState(_SQ2, 1j * _SQ2),
    SingleQubitState(_SQ2, -1j * _SQ2),
)

LABEL_STABILIZER = 0
LABEL_MAGIC = 1


@dataclass(frozen=True)
class LabeledState:
    state: ProductState
    label: int  # 0 = stabilizer, 1 = magic
    m2_density: float  # M_2 / N, natural log


def random_haar_1q(rng: np.random.Generator) -> SingleQubitState:
    """Haar-random pure qubit: cos(theta) uniform on [-1,1], phase uniform."""
    c = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    a = np.sqrt((1.0 + c) / 2.0)
    b = np.exp(1j * phi) * np.sqrt((1.0 - c) / 2.0)
    return SingleQubitState(a, b)


def random_stab_1q(rng: np.random.Generator) -> SingleQubitState:
    """Uniform over the six single-qubit stabilizer states."""
    return STABILIZER_1Q[int(rng.integers(6))]


def random_product(n: int, label: int, rng: np.random.Generator) -> LabeledState:
    if n < 1:
        raise ValueError("need at least one qubit")
    if label not in (LABEL_STABILIZER, LABEL_MAGIC):
        raise ValueError("label must be 0 or 1")
    draw = random_stab_1q if label == LABEL_STABILIZER else random_haar_1q
    state = ProductState(tuple(draw(rng) for _ in range(n)))
    return LabeledState(state, label, m2_product(state) / n)


def brickwork_layer(n: int, offset: int, rng: np.random.Generator) -> tuple[CircuitBlock, ...]:
    """One layer of uniform Clifford blocks: pairs from the offset, singles at the edges."""
    blocks = []
    if n == 1:
        return (CircuitBlock((0,), random_clifford(1, rng)),)
    if offset == 1:
        blocks.append(CircuitBlock((0,), random_clifford(1, rng)))
    q = offset
    while q + 1 < n:
        blocks.append(CircuitBlock((q, q + 1), random_clifford(2, rng)))
        q += 2
    if q < n:
        blocks.append(CircuitBlock((q,), random_clifford(1, rng)))
    return tuple(blocks)


def random_brickwork_circuit(n: int, depth: int, rng: np.random.Generator) -> Circuit:
    """Brickwork of uniform two-qubit Cliffords, alternating pair offsets per layer.

    Odd-n boundaries (and the qubit 0 edge on odd layers) get uniform
    single-qubit Cliffords so no qubit idles.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if n < 2 and depth > 0:
        raise ValueError("brickwork layers need at least two qubits")
    layers = tuple(brickwork_layer(n, k % 2, rng) for k in range(depth))
    return Circuit(n, layers)


def circuit_tableau(c: Circuit) -> CliffordTableau:
    """Tableau of the whole circuit in application order."""
    t = identity_tableau(c.n)
    for layer in c.layers:
        for block in layer:
            t = compose(embed_tableau(block.tableau, block.qubits, c.n), t)
    return t
