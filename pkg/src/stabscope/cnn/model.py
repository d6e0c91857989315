"""Model configurations, the two classifier architectures, and checkpoints.

Both variants share a three-stage convolution stack with 16/32/64 filters
and ReLU activations.  The bitmap variant (one input channel) max-pools by
two after every stage, flattens, and runs a 64-unit hidden dense layer with
dropout before the sigmoid output.  The letter-volume variant (four input
channels, one per Pauli letter) pools only along the snapshot axis and ends
in global average pooling straight into the output unit, which makes the
trained model independent of the number of evolution slices.

Checkpoint format: one UTF-8 JSON header line (config, parameter shapes in
order, training seed, format version), a newline, then the raw little-endian
float64 parameter data concatenated in the declared order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .layers import Conv, Dense, Dropout, Flatten, GlobalAvgPool, Layer, MaxPool, ReLU

CHECKPOINT_FORMAT_VERSION = 1

METHOD1 = "method1"
METHOD2 = "method2"


@dataclass(frozen=True)
class ModelConfig:
    variant: str
    conv_filters: tuple[int, int, int] = (16, 32, 64)
    kernels: tuple[tuple[int, ...], ...] = ()
    pools: tuple[tuple[int, ...], ...] = ()
    dense_hidden: int = 64
    dropout_rate: float = 0.2
    l2_coeff: float = 1e-4
    input_channels: int = 0

    def __post_init__(self):
        if self.variant not in (METHOD1, METHOD2):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        if self.l2_coeff < 0:
            raise ValueError("l2 coefficient must be >= 0")


def default_config(variant: str, **overrides) -> ModelConfig:
    """Per-variant defaults; keyword overrides win."""
    if variant == METHOD1:
        base = dict(
            kernels=((3, 3), (3, 3), (3, 3)),
            pools=((2, 2), (2, 2), (2, 2)),
            input_channels=1,
        )
    else:
        # kernel 2 along the snapshot axis gives the cheapest window that can
        # still see coincidences between rows; snapshots are exchangeable, so
        # wider mixing across them adds cost without signal.  Pooling acts on
        # the snapshot axis only, preserving slice-count independence.
        base = dict(
            kernels=((2, 1, 3), (1, 3, 3), (1, 3, 3)),
            pools=((4, 1, 1), (2, 1, 1), (2, 1, 1)),
            input_channels=4,
        )
    base.update(overrides)
    return ModelConfig(variant=variant, **base)


class Model:
    """A sequential stack built from a ModelConfig and an input spatial shape."""

    def __init__(self, config: ModelConfig, input_shape: tuple[int, ...], seed: int = 0):
        rank = 2 if config.variant == METHOD1 else 3
        if len(input_shape) != rank:
            raise ValueError(f"{config.variant} expects {rank} spatial axes")
        if len(config.kernels) != len(config.conv_filters) or len(config.pools) != len(
            config.conv_filters
        ):
            raise ValueError("need one kernel and one pool spec per conv stage")
        self.config = config
        self.input_shape = tuple(int(s) for s in input_shape)
        self.seed = seed
        rng = np.random.default_rng([seed, 0x6D0DE1])
        self.layers: list[Layer] = []
        self._names: list[str] = []

        def add(name, layer):
            self.layers.append(layer)
            self._names.append(name)

        channels = config.input_channels
        spatial = list(self.input_shape)
        for i, (filters, kernel, pool) in enumerate(
            zip(config.conv_filters, config.kernels, config.pools)
        ):
            add(f"conv{i}", Conv(channels, filters, kernel, rng))
            add(f"relu{i}", ReLU())
            if any(w > 1 for w in pool):
                add(f"pool{i}", MaxPool(pool))
                spatial = [max(1, s // min(w, s)) for s, w in zip(spatial, pool)]
            channels = filters
        if config.variant == METHOD1:
            add("flatten", Flatten())
            flat = channels * int(np.prod(spatial))
            add("hidden", Dense(flat, config.dense_hidden, rng))
            add("relu_hidden", ReLU())
            if config.dropout_rate > 0:
                add("dropout", Dropout(config.dropout_rate))
            add("out", Dense(config.dense_hidden, 1, rng, relu_gain=False))
        else:
            add("gap", GlobalAvgPool())
            add("out", Dense(channels, 1, rng, relu_gain=False))

    def forward(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        """Logits of shape (batch,)."""
        for layer in self.layers:
            x = layer.forward(x, train=train, rng=rng)
        return x[:, 0]

    def backward(self, dlogits: np.ndarray) -> None:
        dy = dlogits[:, None]
        for layer in reversed(self.layers):
            dy = layer.backward(dy)

    def named_params(self):
        """(qualified name, layer, key) triples in declared order."""
        out = []
        for name, layer in zip(self._names, self.layers):
            for key in sorted(layer.params):
                out.append((f"{name}/{key}", layer, key))
        return out

    def weight_params(self):
        """Arrays subject to the L2 penalty."""
        return [
            layer.params[key]
            for name, layer in zip(self._names, self.layers)
            for key in layer.weight_keys()
        ]

    def add_l2_grads(self, l2_coeff: float) -> None:
        if not l2_coeff:
            return
        for name, layer in zip(self._names, self.layers):
            for key in layer.weight_keys():
                layer.grads[key] = layer.grads[key] + 2.0 * l2_coeff * layer.params[key]


def save_checkpoint(path, model: Model, extra: dict | None = None) -> None:
    params = model.named_params()
    header = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": asdict(model.config),
        "input_shape": list(model.input_shape),
        "seed": model.seed,
        "pooling": "average",
        "params": [{"name": n, "shape": list(layer.params[k].shape)} for n, layer, k in params],
    }
    if extra:
        header["extra"] = extra
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode() + b"\n"
    with open(path, "wb") as fh:
        fh.write(blob)
        for _, layer, key in params:
            fh.write(np.ascontiguousarray(layer.params[key], dtype="<f8").tobytes())


def _config_from_dict(d: dict) -> ModelConfig:
    d = dict(d)
    d["conv_filters"] = tuple(d["conv_filters"])
    d["kernels"] = tuple(tuple(k) for k in d["kernels"])
    d["pools"] = tuple(tuple(p) for p in d["pools"])
    return ModelConfig(**d)


def load_checkpoint(path) -> tuple[Model, dict]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        header = json.loads(header_line.decode())
        if header["format_version"] != CHECKPOINT_FORMAT_VERSION:
            raise ValueError("unsupported checkpoint format version")
        model = Model(
            _config_from_dict(header["config"]),
            tuple(header["input_shape"]),
            seed=header["seed"],
        )
        for (name, layer, key), meta in zip(model.named_params(), header["params"]):
            if name != meta["name"]:
                raise ValueError("checkpoint parameter order mismatch")
            shape = tuple(meta["shape"])
            n_bytes = int(np.prod(shape)) * 8
            buf = fh.read(n_bytes)
            if len(buf) != n_bytes:
                raise ValueError("checkpoint truncated")
            layer.params[key] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return model, header
