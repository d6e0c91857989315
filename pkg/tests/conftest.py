"""Shared fixtures and independent matrix oracles.

The oracles here build dense operators from scratch (own Kronecker products,
own gate matrices) so that algebra tests never route through the library's
matrix helpers.
"""

import numpy as np
import pytest

SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOT_GATE = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def kron_letters(letters, sign=1):
    """Dense matrix of sign * (sigma_{l0} ⊗ sigma_{l1} ⊗ ...)."""
    m = np.array([[sign]], dtype=complex)
    for letter in letters:
        m = np.kron(m, SIGMA[int(letter)])
    return m


def kron_chain(*mats):
    m = np.array([[1.0 + 0j]])
    for mat in mats:
        m = np.kron(m, mat)
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
