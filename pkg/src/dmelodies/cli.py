"""Command-line interface: generate, index, verify, evaluate, bench and stats."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import MANIFEST_VERSION, dataset_io, metrics
from .factor_space import (
    FACTOR_NAMES,
    FACTOR_SIZES,
    FactorTuple,
    cardinality,
    factor_space,
    factors_to_index,
    index_to_codes,
    index_to_factors,
)
from .melody import token_vocabulary

log = logging.getLogger("dmelodies")


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def parse_range(text: str | None) -> tuple[int, int]:
    """``A..B`` means the half-open index range ``[A, B)``."""
    if text is None:
        return 0, cardinality()
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise CliError("bad_range", f"range must look like A..B, got {text!r}") from None
    if not 0 <= lo <= hi <= cardinality():
        raise CliError("bad_range", f"range {text} outside 0..{cardinality()}")
    return lo, hi


def write_codes_csv(codes: np.ndarray, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(f"z{j}" for j in range(codes.shape[1])) + "\n")
        for row in codes.tolist():
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_codes_csv(path) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline()
        try:
            [float(v) for v in first.split(",")]
            rows = [first]
        except ValueError:
            rows = []
        rows.extend(fh.readlines())
    data = np.loadtxt(rows, delimiter=",", dtype=np.float64, ndmin=2)
    return data


def cmd_generate(args) -> dict:
    lo, hi = parse_range(args.range)
    formats = [f.strip() for f in args.formats.split(",") if f.strip()]
    bad = sorted(set(formats) - set(dataset_io.FORMATS))
    if bad:
        raise CliError("bad_format", f"unknown formats {bad}; choose from {list(dataset_io.FORMATS)}")
    manifest = dataset_io.generate(args.out, lo, hi, formats, args.workers)
    return {"out": str(args.out), "range": [lo, hi], "files": manifest["files"]}


def cmd_index(args) -> dict:
    if args.to_factors is not None:
        try:
            t = index_to_factors(args.to_factors)
        except IndexError as exc:
            raise CliError("bad_index", str(exc)) from None
        return {"index": args.to_factors, "factors": dict(zip(FACTOR_NAMES, t.codes())),
                "names": {"scale": t.scale.name, "arps": [a.name for a in t.arps]}}
    try:
        codes = [int(c) for c in args.from_factors.split(",")]
        t = FactorTuple.from_codes(codes)
    except ValueError as exc:
        raise CliError("bad_factors", str(exc)) from None
    return {"index": factors_to_index(t), "factors": dict(zip(FACTOR_NAMES, t.codes()))}


def cmd_verify(args) -> dict:
    if not (Path(args.out) / dataset_io.MANIFEST_FILE).exists():
        raise CliError("missing_file", f"no {dataset_io.MANIFEST_FILE} in {args.out}")
    lo, hi = parse_range(args.range) if args.range else (None, None)
    try:
        report = dataset_io.verify_output(args.out, lo, hi)
    except ValueError as exc:
        raise CliError("bad_range", str(exc)) from None
    if not report.ok:
        _emit(report.as_dict())
        raise CliError("verification_failed", "generated data failed verification")
    return report.as_dict()


def _evaluate(codes, factors, bins, split, seed) -> dict:
    try:
        return metrics.evaluate(codes, factors, bins=bins, split=split, seed=seed).as_dict()
    except ValueError as exc:
        raise CliError("bad_input", str(exc)) from None


def cmd_evaluate(args) -> dict:
    for p in (args.codes, args.factors):
        if not Path(p).exists():
            raise CliError("missing_file", f"{p} does not exist")
    codes = read_codes_csv(args.codes)
    _, factors = dataset_io.read_factors_csv(args.factors)
    if len(codes) != len(factors):
        raise CliError("bad_input", f"{len(codes)} code rows but {len(factors)} factor rows")
    report = _evaluate(codes, factors, args.bins, args.split, args.seed)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def cmd_bench(args) -> dict:
    from . import kernels
    from .toy_vae import TrainConfig, TrainingDiverged, train
    from .toy_vae.training import sample_subset

    hp_field = {"beta": "beta", "annealed": "capacity", "factor": "gamma_tc"}[args.method]
    overrides = {hp_field: args.hp}
    for name in ("lr", "batch", "warmup_epochs", "anneal_iters", "latent_dim", "hidden", "tau", "capacity"):
        value = getattr(args, name)
        if value is not None and not (name == "capacity" and args.method == "annealed"):
            overrides[name] = value
    try:
        config = TrainConfig(method=args.method, seed=args.seed, subset_size=args.subset, epochs=args.epochs,
                             **overrides)
        indices = sample_subset(config.subset_size, config.seed, cardinality())
    except ValueError as exc:
        raise CliError("bad_config", str(exc)) from None
    parts = []
    # gather subset rows chunk by chunk to keep memory flat
    for a in range(0, cardinality(), 1 << 18):
        b = min(a + (1 << 18), cardinality())
        sel = indices[(indices >= a) & (indices < b)]
        if len(sel):
            parts.append(kernels.synth_token_ids(a, b)[sel - a])
    all_ids = np.concatenate(parts).astype(np.int64)
    try:
        result = train(config, all_ids, len(token_vocabulary()))
    except (TrainingDiverged, ValueError) as exc:
        raise CliError("training_failed", str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_codes_csv(result.codes, out / "codes.csv")
    with open(out / "factors.csv", "w", newline="\n") as fh:
        fh.write(dataset_io.CSV_HEADER + "\n")
        for idx, row in zip(indices.tolist(), index_to_codes(indices).tolist()):
            fh.write(",".join(map(str, [idx] + row)) + "\n")
    (out / "history.csv").write_text(result.history.to_csv())
    report = _evaluate(result.codes, index_to_codes(indices), args.bins, args.split, args.seed)
    summary = {
        "version": MANIFEST_VERSION,
        "config": config.as_dict(),
        "architecture": "stand-in MLP VAE (tanh, one hidden layer each side)",
        "discriminator": {"hidden": config.disc_hidden, "layers": config.disc_layers, "activation": "leaky_relu(0.2)"}
        if config.method == "factor" else None,
        "final": {k: getattr(result.history, k)[-1] if len(result.history) else None
                  for k in ("ce", "kl", "loss", "accuracy", "reg_weight")},
        "metrics": report,
    }
    (out / "report.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def cmd_stats(args) -> dict:
    from .rhythm import all_patterns

    vocab = token_vocabulary()
    return {
        "cardinality": cardinality(),
        "factors": dict(factor_space()),
        "rhythm_dictionary": {str(r): {"onsets": list(p.positions), "pattern": str(p)}
                              for r, p in enumerate(all_patterns())},
        "vocabulary": list(vocab),
        "vocabulary_size": len(vocab),
    }


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dmelodies", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write factor CSV, token text and/or MIDI files")
    g.add_argument("--out", required=True, type=Path)
    g.add_argument("--range")
    g.add_argument("--formats", default="csv,tokens")
    g.add_argument("--workers", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("index", help="convert between dataset index and factor codes")
    grp = i.add_mutually_exclusive_group(required=True)
    grp.add_argument("--to-factors", type=int)
    grp.add_argument("--from-factors")
    i.set_defaults(func=cmd_index)

    v = sub.add_parser("verify", help="check uniqueness, digests and round-trips of generated output")
    v.add_argument("--out", required=True, type=Path)
    v.add_argument("--range")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("evaluate", help="compute MIG, Modularity and SAP")
    e.add_argument("--codes", required=True, type=Path)
    e.add_argument("--factors", required=True, type=Path)
    e.add_argument("--bins", type=int, default=metrics.DEFAULT_BINS)
    e.add_argument("--split", type=float, default=metrics.DEFAULT_SPLIT)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--report", type=Path)
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", help="train a toy VAE, export codes and evaluate them")
    b.add_argument("--method", required=True, choices=("beta", "annealed", "factor"))
    b.add_argument("--hp", required=True, type=float, help="beta, capacity C, or TC weight depending on method")
    b.add_argument("--seed", required=True, type=int)
    b.add_argument("--subset", type=int, default=10_000)
    b.add_argument("--epochs", type=int, default=50)
    b.add_argument("--out", required=True, type=Path)
    b.add_argument("--lr", type=float)
    b.add_argument("--batch", type=int)
    b.add_argument("--warmup-epochs", dest="warmup_epochs", type=int)
    b.add_argument("--anneal-iters", dest="anneal_iters", type=int)
    b.add_argument("--latent-dim", dest="latent_dim", type=int)
    b.add_argument("--hidden", type=int)
    b.add_argument("--tau", type=float)
    b.add_argument("--capacity", type=float, help="FactorVAE capacity (default 50)")
    b.add_argument("--bins", type=int, default=metrics.DEFAULT_BINS)
    b.add_argument("--split", type=float, default=metrics.DEFAULT_SPLIT)
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("stats", help="print rhythm dictionary, vocabulary and cardinalities")
    s.set_defaults(func=cmd_stats)
    return p


def run(argv=None) -> int:
    print(MANIFEST_VERSION, flush=True)
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        _emit(args.func(args))
        return 0
    except CliError as exc:
        print(json.dumps({"error": exc.kind, "message": str(exc)}), file=sys.stderr)
        return 2 if exc.kind == "usage" else 1
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
