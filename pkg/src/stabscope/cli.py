"""Command-line entry point wiring the pipelines into reproducible artifacts.

Every command writes a run manifest (JSON) before its outputs; re-running
with the same arguments and seed reproduces the output files byte for byte
(timestamps live only in the manifest).  CSV outputs carry headers, a fixed
column order, and locale-independent shortest round-trip float formatting.

Exit codes: 0 success, 2 invalid arguments, 3 runtime or data errors.
"""

from __future__ import annotations

import os
import sys


def _apply_thread_cap():
    """Honor --threads / STABSCOPE_THREADS before the BLAS runtime loads."""
    cap = None
    argv = sys.argv
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            cap = argv[i + 1]
        elif arg.startswith("--threads="):
            cap = arg.split("=", 1)[1]
    cap = cap or os.environ.get("STABSCOPE_THREADS")
    if cap and cap.isdigit():
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_apply_thread_cap()

import argparse
import csv
import json
import time

import numpy as np

from . import __version__
from .cnn import TrainConfig, default_config, load_checkpoint, predict, save_checkpoint, train
from .cnn.model import METHOD1, METHOD2
from .dataset import (
    BASIS_PAULI,
    BASIS_Z,
    DatasetConfig,
    DatasetView,
    build_dataset,
    encode_inputs,
    inset_bins,
    mix_seed,
    read_container,
    write_container,
)
from .magic import m2_product, mlin_from_m2
from .pauli import PauliString
from .stategen import random_haar_1q, random_product
from .statevector import ProductState, SingleQubitState
from .witness import (
    clifford_fourth_moment_exact_1q,
    clifford_fourth_moment_mc,
    fourth_moment_rhs,
    naive_classify_rounds,
    naive_classify_z,
    symmetric_projector_checks,
)

_SQ2 = 2**-0.5

_STATE_TOKENS = {
    "0": (1.0, 0.0),
    "1": (0.0, 1.0),
    "+": (_SQ2, _SQ2),
    "-": (_SQ2, -_SQ2),
    "+i": (_SQ2, 1j * _SQ2),
    "-i": (_SQ2, -1j * _SQ2),
    "T": (_SQ2, np.exp(1j * np.pi / 4) * _SQ2),
}

STATE_SPEC_HELP = (
    "comma-separated per-qubit tokens from {0,1,+,-,+i,-i,T,haar:<seed>}, "
    "e.g. 'T,0,+' or 'haar:7,haar:8'"
)


def parse_state_spec(spec: str) -> ProductState:
    qubits = []
    for token in spec.split(","):
        token = token.strip()
        if token in _STATE_TOKENS:
            a, b = _STATE_TOKENS[token]
            qubits.append(SingleQubitState(a, b))
        elif token.startswith("haar:"):
            qubits.append(random_haar_1q(np.random.default_rng(int(token[5:]))))
        else:
            raise ValueError(f"unknown state token {token!r}")
    if not qubits:
        raise ValueError("empty state spec")
    return ProductState(tuple(qubits))


def _write_manifest(path, command: str, config: dict, outputs: list[str]) -> None:
    config = {k: v for k, v in config.items() if k != "func"}
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": outputs,
        "version": __version__,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _parse_depths(text: str) -> list[int]:
    """Accept '0,1,2' and '0..4' (inclusive range)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _basis_for_variant(variant: str) -> str:
    return BASIS_Z if variant == METHOD1 else BASIS_PAULI


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen_data(args) -> int:
    cfg = DatasetConfig(
        n_qubits=args.n,
        n_states=args.states,
        n_snapshots=args.snapshots,
        basis=args.basis,
        depth=args.depth,
        n_layers=args.layers,
        master_seed=args.seed,
    )
    _write_manifest(args.out + ".run.json", "gen-data", vars(args) | {"seed": args.seed}, [args.out])
    container = build_dataset(cfg)
    write_container(container, args.out)
    print(f"wrote {args.out}: {cfg.n_states} states, basis={cfg.basis}, depth={cfg.depth}")
    return 0


def cmd_train(args) -> int:
    container = read_container(args.data)
    expected = _basis_for_variant(args.variant)
    if container.basis != expected:
        raise ValueError(
            f"{args.variant} needs {expected}-basis data, got {container.basis}"
        )
    model_cfg = default_config(args.variant, dropout_rate=args.dropout, l2_coeff=args.l2)
    train_cfg = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=args.seed,
        validation_fraction=args.val_fraction,
    )
    metrics_path = args.out_model + ".metrics.csv"
    _write_manifest(
        args.out_model + ".run.json",
        "train",
        vars(args) | {"seed": args.seed},
        [args.out_model, metrics_path],
    )
    model, history = train(model_cfg, train_cfg, DatasetView(container), verbose=args.verbose)
    save_checkpoint(args.out_model, model, extra={"data": os.path.basename(args.data)})
    _write_csv(
        metrics_path,
        ["epoch", "train_loss", "train_acc", "val_loss", "val_acc"],
        [(m.epoch, m.train_loss, m.train_acc, m.val_loss, m.val_acc) for m in history],
    )
    final = history[-1]
    print(
        f"wrote {args.out_model}; final val acc {final.val_acc:.3f}, "
        f"val loss {final.val_loss:.4f}"
    )
    return 0


def cmd_sweep_depth(args) -> int:
    model, header = load_checkpoint(args.model)
    variant = header["config"]["variant"]
    basis = _basis_for_variant(variant)
    depths = _parse_depths(args.depths)
    inset_path = args.out + ".inset.csv"
    _write_manifest(
        args.out + ".run.json",
        "sweep-depth",
        vars(args) | {"seed": args.seed},
        [args.out, inset_path],
    )
    rows, inset_rows = [], []
    for depth in depths:
        cfg = DatasetConfig(
            n_qubits=args.n,
            n_states=args.states,
            n_snapshots=args.snapshots,
            basis=basis,
            depth=depth,
            n_layers=args.layers if basis == BASIS_PAULI else 1,
            master_seed=mix_seed(args.seed, depth),
        )
        container = build_dataset(cfg)
        preds = predict(model, encode_inputs(container, np.arange(cfg.n_states)))
        labels = container.labels
        for lab in (0, 1):
            sel = preds[labels == lab]
            rows.append((depth, lab, float(sel.mean()), float(sel.std(ddof=1))))
        for center, mean_pred, count in inset_bins(container.m2_density, preds):
            inset_rows.append((depth, center, mean_pred, count))
    _write_csv(args.out, ["depth", "label", "mean_prediction", "std_prediction"], rows)
    _write_csv(inset_path, ["depth", "m2_density_bin", "mean_prediction", "count"], inset_rows)
    print(f"wrote {args.out} ({len(rows)} rows) and {inset_path}")
    return 0


def cmd_verify_eq2(args) -> int:
    sizes = [int(tok) for tok in args.n.split(",")]
    proj_path = args.out + ".projector.json"
    _write_manifest(
        args.out + ".run.json",
        "verify-eq2",
        vars(args) | {"seed": args.seed},
        [args.out, proj_path],
    )
    rows = []
    state_id = 0
    for n in sizes:
        for i in range(args.states):
            rng = np.random.default_rng(mix_seed(args.seed, state_id))
            labeled = random_product(n, 1, rng)
            m_lin = mlin_from_m2(m2_product(labeled.state))
            if n == 1:
                sigma = PauliString.single(1, 0, int(rng.integers(1, 4)))
                exact = clifford_fourth_moment_exact_1q(labeled.state.qubits[0], sigma)
                rhs = fourth_moment_rhs(m_lin, 2)
                rows.append((state_id, n, m_lin, exact, 0.0, rhs, 24))
            else:
                letters = rng.integers(0, 4, size=n)
                while not letters.any():
                    letters = rng.integers(0, 4, size=n)
                sigma = PauliString.from_letters(letters)
                est = clifford_fourth_moment_mc(labeled.state, sigma, args.cliffords, rng)
                rows.append(
                    (state_id, n, m_lin, est.mean, est.std_error, est.analytic_rhs, est.n_samples)
                )
            state_id += 1
    _write_csv(
        args.out,
        ["state_id", "n", "m_lin", "mc_mean", "mc_se", "analytic_rhs", "n_cliffords"],
        rows,
    )
    report = symmetric_projector_checks()
    with open(proj_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "trace_p_symm": report.trace_p_symm,
                "trace_sigma_p": report.trace_sigma_p,
                "trace_sigma_qp": report.trace_sigma_qp,
                "expected": [
                    report.expected_trace_p,
                    report.expected_trace_sigma_p,
                    report.expected_trace_sigma_qp,
                ],
                "max_abs_error": report.max_abs_error,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(f"wrote {args.out} ({len(rows)} rows); projector max error {report.max_abs_error:.2e}")
    return 0


def _states_from_args(args) -> list[ProductState]:
    if args.state:
        return [parse_state_spec(args.state)]
    if args.state_file:
        with open(args.state_file, encoding="utf-8") as fh:
            specs = [line.strip() for line in fh if line.strip()]
        return [parse_state_spec(s) for s in specs]
    rng = np.random.default_rng(args.seed)
    return [random_product(args.random_product, 1, rng).state]


def cmd_sre(args) -> int:
    reports = []
    for state in _states_from_args(args):
        m2 = m2_product(state)
        reports.append(
            {
                "n": state.n,
                "m2": m2,
                "m_lin": mlin_from_m2(m2),
                "m2_density": m2 / state.n,
            }
        )
    payload = reports[0] if len(reports) == 1 else reports
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_naive_classify(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.data:
        container = read_container(args.data)
        if container.basis != BASIS_Z:
            raise ValueError("the naive witness needs z-basis snapshots")
        results = []
        for i in range(container.n_states):
            report = naive_classify_z(container.state_batch(i), args.k_sigma)
            results.append(
                {"state": i, "label": int(container.labels[i]), "verdict": report.verdict}
            )
        payload = {"k_sigma": args.k_sigma, "verdicts": results}
    else:
        state = parse_state_spec(args.state)
        verdict = naive_classify_rounds(
            state, args.rounds, args.depth, args.snapshots, args.k_sigma, rng
        )
        payload = {
            "state": args.state,
            "rounds": args.rounds,
            "k_sigma": args.k_sigma,
            "verdict": verdict,
        }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabscope",
        description="Classify quantum states as stabilizer or magic from measurement snapshots.",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a labeled snapshot dataset")
    p.add_argument("--basis", choices=[BASIS_Z, BASIS_PAULI], default=BASIS_Z)
    p.add_argument("--n", type=int, default=8, help="qubit count")
    p.add_argument("--states", type=int, default=1000)
    p.add_argument("--snapshots", type=int, default=500)
    p.add_argument("--depth", type=int, default=0, help="brickwork evolution depth")
    p.add_argument("--layers", type=int, default=5, help="slices per instance (pauli basis)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a classifier on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--variant", choices=[METHOD1, METHOD2], required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--out-model", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep-depth", help="evaluate a model across evolution depths")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--states", type=int, default=200)
    p.add_argument("--snapshots", type=int, default=500)
    p.add_argument("--depths", default="0,1,2", help="'0,1,2' or '0..4'")
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep_depth)

    p = sub.add_parser("verify-eq2", help="check the Clifford fourth-moment identity")
    p.add_argument("--n", default="1,2,3", help="comma-separated qubit counts")
    p.add_argument("--states", type=int, default=10, help="random states per size")
    p.add_argument("--cliffords", type=int, default=5000, help="Monte-Carlo draws per state")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_verify_eq2)

    p = sub.add_parser("sre", help="stabilizer entropy of a product state")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--state", help=STATE_SPEC_HELP)
    g.add_argument("--state-file", help="file with one state spec per line")
    g.add_argument("--random-product", type=int, metavar="N", help="random magic product state")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sre)

    p = sub.add_parser("naive-classify", help="Pauli-average stabilizer witness")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--data", help="z-basis snapshot container")
    g.add_argument("--state", help=STATE_SPEC_HELP)
    p.add_argument("--rounds", type=int, default=1, help="1 = bare state only")
    p.add_argument("--depth", type=int, default=2, help="shallow circuit depth per round")
    p.add_argument("--snapshots", type=int, default=1000)
    p.add_argument("--k-sigma", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_naive_classify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
