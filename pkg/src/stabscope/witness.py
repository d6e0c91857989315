"""Pauli-average stabilizer witness and the Clifford fourth-moment check.

Stabilizer states have every Pauli expectation in {0, +1, -1}, so per-qubit
sample means of computational-basis snapshots either sit on that lattice
(within statistical error) or expose the state as magic.  The witness has a
known blind spot — equatorial phase states — which repeated classification
after fresh shallow Clifford layers removes.

The fourth moment of <psi| U† sigma U |psi> over the uniform Clifford group
is an affine function of the stabilizer linear entropy; this module estimates
the moment by Monte Carlo over random tableaus (never materializing U) and,
for one qubit, by exact enumeration of all 24 group elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .magic import ZSnapshotBatch, m2_product, mlin_from_m2
from .pauli import PauliString, conjugate, enumerate_cliffords_1q, random_clifford
from .statevector import (
    DenseState,
    PAULI_MATRICES,
    ProductState,
    SingleQubitState,
    apply_circuit,
    expand,
    expectation_product,
    sample_z,
)
from .stategen import random_brickwork_circuit

VERDICT_STABILIZER = "stabilizer"
VERDICT_MAGIC = "magic"

DEFAULT_K_SIGMA = 3.0
DEFAULT_SHALLOW_DEPTH = 2


@dataclass(frozen=True)
class WitnessReport:
    per_qubit_means: np.ndarray
    per_qubit_se: np.ndarray
    verdict: str
    k_sigma: float


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    std_error: float
    n_samples: int
    analytic_rhs: float


def naive_classify_z(batch: ZSnapshotBatch, k_sigma: float = DEFAULT_K_SIGMA) -> WitnessReport:
    """Stabilizer verdict iff every per-qubit mean of (1-2s) is within
    k_sigma standard errors of one of {0, +1, -1}."""
    m = batch.n_samples
    if m < 30:
        raise ValueError("need at least 30 snapshots for a meaningful verdict")
    vals = 1.0 - 2.0 * batch.entries.astype(np.float64)
    means = vals.mean(axis=0)
    stds = vals.std(axis=0, ddof=1)
    se = np.where(stds == 0.0, 1.0 / m, stds / np.sqrt(m))
    dist = np.minimum(np.abs(means), np.abs(np.abs(means) - 1.0))
    verdict = VERDICT_STABILIZER if bool(np.all(dist <= k_sigma * se)) else VERDICT_MAGIC
    return WitnessReport(means, se, verdict, k_sigma)


def naive_classify_rounds(
    state: ProductState,
    rounds: int,
    depth: int,
    n_samples: int,
    k_sigma: float,
    rng: np.random.Generator,
) -> str:
    """Repeat the z witness with fresh shallow Clifford evolutions.

    Round 0 classifies the bare state; each later round applies a fresh
    brickwork circuit of the given depth before resampling, which probes
    <psi| U† Z_j U |psi> for random shallow U.  Stabilizer verdict iff every
    round passes.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    dense = expand(state)
    for r in range(rounds):
        s = dense
        if r > 0:
            s = apply_circuit(dense, random_brickwork_circuit(state.n, depth, rng))
        batch = ZSnapshotBatch(sample_z(s, n_samples, rng))
        if naive_classify_z(batch, k_sigma).verdict == VERDICT_MAGIC:
            return VERDICT_MAGIC
    return VERDICT_STABILIZER


def fourth_moment_rhs(m_lin: float, d: int) -> float:
    """Analytic Clifford fourth moment: 1/(d+1) - d/(d^2-1) * M_lin."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return 1.0 / (d + 1) - d / (d**2 - 1.0) * m_lin


def clifford_fourth_moment_mc(
    p: ProductState,
    sigma: PauliString,
    n_cliffords: int,
    rng: np.random.Generator,
) -> MomentEstimate:
    """Monte-Carlo mean of <psi| U† sigma U |psi>^4 over uniform tableaus.

    Each draw conjugates sigma through a fresh random tableau and evaluates
    the expectation factor-by-factor on the product state; no unitary matrix
    is ever built.
    """
    if sigma.is_identity:
        raise ValueError("sigma must not be the identity string")
    if sigma.n != p.n:
        raise ValueError("sigma and state qubit counts differ")
    if n_cliffords < 2:
        raise ValueError("need at least two draws for a standard error")
    vals = np.empty(n_cliffords)
    for i in range(n_cliffords):
        t = random_clifford(p.n, rng)
        vals[i] = expectation_product(p, conjugate(t, sigma)) ** 4
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(n_cliffords))
    rhs = fourth_moment_rhs(mlin_from_m2(m2_product(p)), 1 << p.n)
    return MomentEstimate(mean, se, n_cliffords, rhs)


def clifford_fourth_moment_exact_1q(q: SingleQubitState, sigma: PauliString) -> float:
    """Exact single-qubit group average over all 24 tableaus."""
    if sigma.n != 1:
        raise ValueError("sigma must act on one qubit")
    if sigma.is_identity:
        raise ValueError("sigma must not be the identity")
    p = ProductState((q,))
    total = 0.0
    for t in enumerate_cliffords_1q():
        total += expectation_product(p, conjugate(t, sigma)) ** 4
    return total / 24.0


# ---------------------------------------------------------------------------
# Fourth-order symmetric-subspace traces at d = 2, by explicit construction.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectorReport:
    trace_p_symm: float
    trace_sigma_p: dict[str, float]
    trace_sigma_qp: dict[str, float]
    expected_trace_p: float
    expected_trace_sigma_p: float
    expected_trace_sigma_qp: float

    @property
    def max_abs_error(self) -> float:
        errs = [abs(self.trace_p_symm - self.expected_trace_p)]
        errs += [abs(v - self.expected_trace_sigma_p) for v in self.trace_sigma_p.values()]
        errs += [abs(v - self.expected_trace_sigma_qp) for v in self.trace_sigma_qp.values()]
        return max(errs)


def _permutation_operator(perm: tuple[int, ...], d: int = 2) -> np.ndarray:
    """Unitary permuting the four tensor factors: factor k moves to slot perm[k]."""
    dim = d**4
    op = np.zeros((dim, dim))
    for idx in range(dim):
        digits = [(idx // d ** (3 - k)) % d for k in range(4)]
        out_digits = [0] * 4
        for k in range(4):
            out_digits[perm[k]] = digits[k]
        out = sum(out_digits[k] * d ** (3 - k) for k in range(4))
        op[out, idx] = 1.0
    return op


def symmetric_projector_checks() -> ProjectorReport:
    """Verify the three trace identities behind the fourth-moment law at d=2.

    Constructs the 16x16 projector onto the S4-symmetric subspace as the
    average of the 24 factor permutations, and the Pauli average
    Q = (1/4) sum_sigma sigma^x4, then evaluates the traces numerically.
    """
    d = 2
    p_symm = np.zeros((16, 16))
    for perm in itertools.permutations(range(4)):
        p_symm += _permutation_operator(perm, d)
    p_symm /= 24.0

    q = np.zeros((16, 16), dtype=complex)
    for mat in PAULI_MATRICES:
        m4 = np.kron(np.kron(mat, mat), np.kron(mat, mat))
        q += m4
    q /= 4.0

    sigma_p = {}
    sigma_qp = {}
    for name, mat in zip("XYZ", PAULI_MATRICES[1:]):
        s4 = np.kron(np.kron(mat, mat), np.kron(mat, mat))
        sigma_p[name] = float(np.trace(s4 @ p_symm).real)
        sigma_qp[name] = float(np.trace(s4 @ q @ p_symm).real)

    return ProjectorReport(
        trace_p_symm=float(np.trace(p_symm).real),
        trace_sigma_p=sigma_p,
        trace_sigma_qp=sigma_qp,
        expected_trace_p=(d**4 + 6 * d**3 + 11 * d**2 + 6 * d) / 24.0,
        expected_trace_sigma_p=(d**2 + 2 * d) / 8.0,
        expected_trace_sigma_qp=(1 + d) * (2 + d) / 6.0,
    )
