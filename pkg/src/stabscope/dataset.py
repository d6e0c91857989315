"""Dataset pipelines, the snapshot container format, and deterministic seeding.

Container layout (bit-exact): a UTF-8 JSON manifest line, a newline, an
8-byte little-endian unsigned length, then the entry block as unsigned bytes
in row-major (state, sample, layer, qubit) order; the layer dimension is
absent for z-basis data.  Each state is generated from an independent
sub-seed mixed out of the master seed and the state index, so content never
depends on generation order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .magic import PauliSnapshotBatch, ZSnapshotBatch, evolve_pauli_snapshots, sample_pauli_product
from .stategen import (
    LabeledState,
    brickwork_layer,
    circuit_tableau,
    random_brickwork_circuit,
    random_product,
)
from .statevector import Circuit, apply_circuit, expand, sample_z

FORMAT_VERSION = 1

BASIS_Z = "z"
BASIS_PAULI = "pauli"

_MASK64 = (1 << 64) - 1


def mix_seed(master_seed: int, index: int) -> int:
    """64-bit splitmix finalizer over (master_seed, index); the sub-seed law."""
    z = (master_seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class DatasetConfig:
    n_qubits: int
    n_states: int
    n_snapshots: int
    basis: str = BASIS_Z
    depth: int = 0
    n_layers: int = 1
    master_seed: int = 0
    label_balance: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_states < 1 or self.n_snapshots < 1:
            raise ValueError("qubit, state and snapshot counts must be positive")
        if self.basis not in (BASIS_Z, BASIS_PAULI):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.basis == BASIS_PAULI and self.n_layers < 1:
            raise ValueError("pauli datasets need at least one layer slice")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if min(self.label_balance) < 1:
            raise ValueError("label balance parts must be positive")


@dataclass
class SnapshotContainer:
    manifest: dict
    entries: np.ndarray  # uint8; (states, samples, n) for z, (states, samples, layers, n) for pauli

    @property
    def basis(self) -> str:
        return self.manifest["basis"]

    @property
    def labels(self) -> np.ndarray:
        return np.asarray(self.manifest["labels"], dtype=np.int64)

    @property
    def m2_density(self) -> np.ndarray:
        return np.asarray(self.manifest["m2_density"], dtype=np.float64)

    @property
    def n_states(self) -> int:
        return int(self.manifest["n_states"])

    def state_batch(self, i: int):
        label = int(self.manifest["labels"][i])
        if self.basis == BASIS_Z:
            return ZSnapshotBatch(self.entries[i], label)
        return PauliSnapshotBatch(self.entries[i], label)


def _labels_for(cfg: DatasetConfig) -> np.ndarray:
    a, b = cfg.label_balance
    pattern = np.array([0] * a + [1] * b, dtype=np.int64)
    return np.tile(pattern, cfg.n_states // len(pattern) + 1)[: cfg.n_states]


def _manifest(cfg: DatasetConfig, labels, densities) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "basis": cfg.basis,
        "n_qubits": cfg.n_qubits,
        "n_states": cfg.n_states,
        "n_snapshots": cfg.n_snapshots,
        "n_layers": cfg.n_layers if cfg.basis == BASIS_PAULI else 1,
        "depth": cfg.depth,
        "master_seed": cfg.master_seed,
        "labels": [int(v) for v in labels],
        "m2_density": [float(v) for v in densities],
    }


def build_z_dataset(cfg: DatasetConfig, dense_cap: int | None = None) -> SnapshotContainer:
    """Computational-basis pipeline: product state -> brickwork evolution -> Born samples."""
    if cfg.basis != BASIS_Z:
        raise ValueError("config basis must be 'z'")
    labels = _labels_for(cfg)
    entries = np.empty((cfg.n_states, cfg.n_snapshots, cfg.n_qubits), dtype=np.uint8)
    densities = np.empty(cfg.n_states)
    for i in range(cfg.n_states):
        rng = np.random.default_rng(mix_seed(cfg.master_seed, i))
        labeled = random_product(cfg.n_qubits, int(labels[i]), rng)
        dense = expand(labeled.state, cap=dense_cap)
        if cfg.depth > 0:
            dense = apply_circuit(dense, random_brickwork_circuit(cfg.n_qubits, cfg.depth, rng))
        entries[i] = sample_z(dense, cfg.n_snapshots, rng)
        densities[i] = labeled.m2_density
    return SnapshotContainer(_manifest(cfg, labels, densities), entries)


def _pauli_rows_for_state(
    cfg: DatasetConfig, labeled: LabeledState, rng: np.random.Generator
) -> np.ndarray:
    """(samples, layers, qubits) letter volume for one state.

    Slice 0 holds the sampled strings conjugated through the depth-D test
    circuit; slice k applies k further random brickwork layers on top.  The
    magic content is untouched by every one of these Clifford maps.
    """
    rows = sample_pauli_product(labeled.state, cfg.n_snapshots, rng)
    n = cfg.n_qubits
    if cfg.depth > 0:
        base = circuit_tableau(random_brickwork_circuit(n, cfg.depth, rng))
        rows = evolve_pauli_snapshots(rows, base)
    out = np.empty((cfg.n_snapshots, cfg.n_layers, n), dtype=np.uint8)
    out[:, 0, :] = rows
    for k in range(1, cfg.n_layers):
        layer = Circuit(n, (brickwork_layer(n, (k - 1) % 2, rng),))
        rows = evolve_pauli_snapshots(rows, circuit_tableau(layer))
        out[:, k, :] = rows
    return out


def build_pauli_dataset(cfg: DatasetConfig) -> SnapshotContainer:
    """Pauli-basis pipeline: factorized sampling plus tableau evolution only.

    Works at any qubit count; no dense vector is ever built.
    """
    if cfg.basis != BASIS_PAULI:
        raise ValueError("config basis must be 'pauli'")
    labels = _labels_for(cfg)
    entries = np.empty(
        (cfg.n_states, cfg.n_snapshots, cfg.n_layers, cfg.n_qubits), dtype=np.uint8
    )
    densities = np.empty(cfg.n_states)
    for i in range(cfg.n_states):
        rng = np.random.default_rng(mix_seed(cfg.master_seed, i))
        labeled = random_product(cfg.n_qubits, int(labels[i]), rng)
        entries[i] = _pauli_rows_for_state(cfg, labeled, rng)
        densities[i] = labeled.m2_density
    return SnapshotContainer(_manifest(cfg, labels, densities), entries)


def build_dataset(cfg: DatasetConfig) -> SnapshotContainer:
    if cfg.basis == BASIS_Z:
        return build_z_dataset(cfg)
    return build_pauli_dataset(cfg)


def write_container(container: SnapshotContainer, path) -> None:
    blob = json.dumps(container.manifest, sort_keys=True, separators=(",", ":")).encode()
    entries = np.ascontiguousarray(container.entries, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(blob)
        fh.write(b"\n")
        fh.write(struct.pack("<Q", entries.nbytes))
        fh.write(entries.tobytes())


def read_container(path) -> SnapshotContainer:
    with open(path, "rb") as fh:
        manifest = json.loads(fh.readline().decode())
        if manifest["format_version"] != FORMAT_VERSION:
            raise ValueError("unsupported container format version")
        (length,) = struct.unpack("<Q", fh.read(8))
        raw = fh.read(length)
        if len(raw) != length:
            raise ValueError("container truncated")
    if manifest["basis"] == BASIS_Z:
        shape = (manifest["n_states"], manifest["n_snapshots"], manifest["n_qubits"])
    else:
        shape = (
            manifest["n_states"],
            manifest["n_snapshots"],
            manifest["n_layers"],
            manifest["n_qubits"],
        )
    entries = np.frombuffer(raw, dtype=np.uint8).reshape(shape)
    if entries.max(initial=0) > (1 if manifest["basis"] == BASIS_Z else 3):
        raise ValueError("entry block contains out-of-range values")
    return SnapshotContainer(manifest, entries.copy())


def split(
    container: SnapshotContainer, validation_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, label-stratified, deterministic (train, validation) index sets."""
    if not 0.0 < validation_fraction < 1.0:
        raise ValueError("validation fraction must be in (0, 1)")
    labels = container.labels
    rng = np.random.default_rng([seed, 0x59117])
    train_idx, val_idx = [], []
    for lab in np.unique(labels):
        idx = np.nonzero(labels == lab)[0]
        if len(idx) < 2:
            raise ValueError("need at least two states per label to split")
        idx = idx[rng.permutation(len(idx))]
        n_val = max(1, int(round(validation_fraction * len(idx))))
        if n_val >= len(idx):
            raise ValueError("validation fraction leaves no training data")
        val_idx.append(idx[:n_val])
        train_idx.append(idx[n_val:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))


def inset_bins(
    m2_density: np.ndarray, predictions: np.ndarray, n_bins: int = 10
) -> list[tuple[float, float, int]]:
    """(bin center, mean prediction, count) over uniform magic-density bins."""
    m2_density = np.asarray(m2_density, dtype=float)
    predictions = np.asarray(predictions, dtype=float)
    if m2_density.size == 0 or m2_density.shape != predictions.shape:
        raise ValueError("need aligned, nonempty densities and predictions")
    lo, hi = float(m2_density.min()), float(m2_density.max())
    if hi <= lo:
        return [(lo, float(predictions.mean()), int(predictions.size))] + [
            (lo, float("nan"), 0) for _ in range(n_bins - 1)
        ]
    edges = np.linspace(lo, hi, n_bins + 1)
    which = np.clip(np.digitize(m2_density, edges) - 1, 0, n_bins - 1)
    rows = []
    for b in range(n_bins):
        mask = which == b
        center = float((edges[b] + edges[b + 1]) / 2)
        if mask.any():
            rows.append((center, float(predictions[mask].mean()), int(mask.sum())))
        else:
            rows.append((center, float("nan"), 0))
    return rows


def encode_inputs(container: SnapshotContainer, indices) -> np.ndarray:
    """Model inputs for the given states: bits as one channel, letters one-hot."""
    indices = np.asarray(indices)
    raw = container.entries[indices]
    if container.basis == BASIS_Z:
        return raw[:, None, :, :].astype(np.float64)
    onehot = np.zeros((4,) + raw.shape)
    for letter in range(4):
        onehot[letter][raw == letter] = 1.0
    return np.moveaxis(onehot, 0, 1)


class DatasetView:
    """Adapter feeding a container (restricted to an index set) to the trainer."""

    def __init__(self, container: SnapshotContainer, indices=None):
        self.container = container
        self.indices = (
            np.arange(container.n_states) if indices is None else np.asarray(indices)
        )

    @property
    def labels(self) -> np.ndarray:
        return self.container.labels[self.indices]

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return self.container.entries.shape[1:]

    def __len__(self):
        return len(self.indices)

    def batch(self, idx) -> tuple[np.ndarray, np.ndarray]:
        sel = self.indices[np.asarray(idx)]
        return encode_inputs(self.container, sel), self.container.labels[sel].astype(np.float64)
