"""Command-line pipeline: chain -> gen-data -> train -> infer / eval / scaling.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 I/O or schema
failure.  Every artifact embeds the schema version, seed, resolved-config
hash, and chain fingerprint, so re-running a command with the same config
reproduces the same file (timing fields aside).
"""

import argparse
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .chain import ChainModel, TrapConfig, build_chain, tune_trap
from .errors import IonforgeError, NumericError, SchemaError
from .evaluate import evaluate_target, scaling_study, similarity
from .forward import InteractionGraph, build_setup, coupling_matrix, normalize
from .lattices import LatticeSpec, build_target, list_supported, parse_spec
from .network import INIT_DESCRIPTOR, TrainConfig, generate_dataset, infer, train
from .storage import (config_hash, load_checkpoint, load_dataset, read_json,
                      save_checkpoint, save_dataset, write_crosstalk_csv,
                      write_history_csv, write_json, write_scaling_csv)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


@dataclasses.dataclass
class RunConfig:
    """Resolved settings for one pipeline invocation."""

    n_ions: int = 10
    f_low: float = 1e6
    f_high: float = 5e6
    f_x_hz: float | None = None
    f_z_hz: float | None = None
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    targets: tuple = ("linear", "square", "triangular", "kagome", "cubic",
                      "two_chains")
    epsilons: tuple = (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)
    budget_hz: float = 1e6
    seed: int = 0

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["train"] = self.train.to_dict()
        return d

    def hash(self) -> str:
        return config_hash(self.to_dict())


def load_run_config(path, overrides) -> RunConfig:
    """Merge a JSON config file (optional) with command-line overrides."""
    raw = read_json(path) if path else {}
    chain = raw.get("chain", {})
    ev = raw.get("eval", {})
    train_d = dict(raw.get("train", {}))
    seed = raw.get("seed", 0)
    train_d.setdefault("seed", seed)
    cfg = RunConfig(
        n_ions=int(chain.get("n", 10)),
        f_low=chain.get("f_low_hz", 1e6),
        f_high=chain.get("f_high_hz", 5e6),
        f_x_hz=chain.get("f_x_hz"),
        f_z_hz=chain.get("f_z_hz"),
        train=TrainConfig(**train_d),
        targets=tuple(raw.get("targets", RunConfig.targets)),
        epsilons=tuple(ev.get("epsilons", RunConfig.epsilons)),
        budget_hz=ev.get("budget_hz", 1e6),
        seed=seed,
    )
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "seed":
            cfg.seed = value
            cfg.train = dataclasses.replace(cfg.train, seed=value)
        elif key in TrainConfig.__dataclass_fields__:
            cfg.train = dataclasses.replace(cfg.train, **{key: value})
        else:
            setattr(cfg, key, value)
    return cfg


def _resolve_trap(cfg) -> TrapConfig:
    if cfg.f_x_hz is not None and cfg.f_z_hz is not None:
        return TrapConfig(n_ions=cfg.n_ions, omega_x=2 * math.pi * cfg.f_x_hz,
                          omega_z=2 * math.pi * cfg.f_z_hz)
    return tune_trap(cfg.n_ions, f_low=cfg.f_low, f_high=cfg.f_high)


def _load_chain(path) -> ChainModel:
    return ChainModel.from_dict(read_json(path))


def _setup_for(chain_doc_path, checkpoint_fingerprint=None):
    chain = _load_chain(chain_doc_path)
    if (checkpoint_fingerprint is not None
            and checkpoint_fingerprint != chain.fingerprint()):
        raise SchemaError(
            f"checkpoint was trained on chain {checkpoint_fingerprint}, "
            f"but {chain_doc_path} has fingerprint {chain.fingerprint()}")
    return build_setup(chain)


def cmd_chain(args) -> int:
    cfg = load_run_config(args.config, {"n_ions": args.n, "f_low": args.f_low,
                                        "f_high": args.f_high, "seed": args.seed,
                                        "f_x_hz": args.f_x_hz, "f_z_hz": args.f_z_hz})
    chain = build_chain(_resolve_trap(cfg))
    # beat notes are undefined for a single mode; the chain itself still is
    beat_notes = (build_setup(chain).beat_notes if chain.n_ions > 1
                  else np.array([]))
    doc = chain.to_dict()
    doc["beat_notes_hz"] = (beat_notes / (2 * math.pi)).tolist()
    doc["seed"] = cfg.seed
    doc["config_hash"] = cfg.hash()
    doc["fingerprint"] = chain.fingerprint()
    write_json(args.out, doc)
    print(f"chain: N={chain.n_ions}  f_x={chain.trap.omega_x / 2e6 / math.pi:.4f} MHz"
          f"  f_z={chain.trap.omega_z / 2e6 / math.pi:.4f} MHz")
    print("mode   f_mode (MHz)   beat note (MHz)")
    for m, w in enumerate(chain.mode_freqs):
        note = (f"{beat_notes[m] / 2e6 / math.pi:15.6f}"
                if m < beat_notes.size else " " * 15)
        print(f"{m + 1:4d}   {w / 2e6 / math.pi:12.6f}   {note}")
    print(f"wrote {args.out}")
    return 0


def cmd_gen_data(args) -> int:
    cfg = load_run_config(args.config, {"seed": args.seed})
    setup = _setup_for(args.chain)
    count = args.count or cfg.train.train_size + cfg.train.val_size
    dataset = generate_dataset(setup, count, seed=cfg.seed)
    save_dataset(args.out, dataset)
    print(f"dataset: {count} samples for N={setup.n_ions} -> {args.out}")
    return 0


def cmd_train(args) -> int:
    overrides = {k: getattr(args, k) for k in
                 ("train_size", "val_size", "epochs", "batch_size", "hidden_dim",
                  "lr0", "dropout_rate", "seed")}
    cfg = load_run_config(args.config, overrides)
    setup = _setup_for(args.chain)
    dataset = load_dataset(args.data)
    if dataset.chain_fingerprint and dataset.chain_fingerprint != setup.chain.fingerprint():
        raise SchemaError(f"dataset {args.data} was generated for a different chain")
    result = train(setup, dataset, cfg.train)
    final = result.history[-1] if result.history else {}
    trailer = {
        "schema": "ionnet-trailer/1",
        "train_config": cfg.train.to_dict(),
        "init": INIT_DESCRIPTOR,
        "chain_fingerprint": setup.chain.fingerprint(),
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "best_epoch": result.best_epoch,
        "metrics": {
            "final_val_similarity": final.get("val_similarity"),
            "final_train_cost": final.get("train_cost"),
            "best_val_similarity": max((h["val_similarity"] for h in result.history),
                                       default=None),
        },
    }
    save_checkpoint(args.out, result.best_params, trailer)
    if args.history:
        write_history_csv(args.history, result.history)
    if result.history:
        print(f"trained {cfg.train.epochs} epochs: "
              f"best val F = {trailer['metrics']['best_val_similarity']:.6f} "
              f"(epoch {result.best_epoch}), "
              f"final val F = {final['val_similarity']:.6f}")
    print(f"wrote {args.out}")
    return 0


def _target_spec(text, n_ions) -> LatticeSpec:
    if text.endswith(".json"):
        return LatticeSpec.from_dict(read_json(text))
    return parse_spec(text, n_ions=n_ions)


def _resolve_target(text, n_ions):
    """Target from shorthand, a lattice-spec JSON, or a raw graph JSON."""
    if text.endswith(".json"):
        doc = read_json(text)
        if "couplings" in doc:
            graph = InteractionGraph.from_dict(doc)
            return f"file:{os.path.basename(text)}", graph
        spec = LatticeSpec.from_dict(doc)
    else:
        spec = parse_spec(text, n_ions=n_ions)
    return spec.label(), build_target(spec)


def cmd_infer(args) -> int:
    cfg = load_run_config(args.config, {"seed": args.seed})
    params, trailer = load_checkpoint(args.checkpoint)
    setup = _setup_for(args.chain, trailer.get("chain_fingerprint"))
    label, target = _resolve_target(args.target, params.n_ions)
    raw_norm = float(np.linalg.norm(target.couplings))
    if abs(raw_norm - 1.0) > 1e-9:
        print(f"warning: target not normalized (|J| = {raw_norm:.3e}); normalizing",
              file=sys.stderr)
        target, _ = normalize(target)
    control = infer(params, target)
    generated = normalize(coupling_matrix(control, setup))[0]
    fval = similarity(generated, target)
    doc = {
        "schema": "omega/1",
        "n": params.n_ions,
        "target": label,
        "omega": control.omega.tolist(),
        "scale_rad_s": control.scale,
        "similarity": fval,
        "seed": cfg.seed,
        "config_hash": cfg.hash(),
        "chain_fingerprint": setup.chain.fingerprint(),
    }
    write_json(args.out, doc)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("ion_i,beatnote_n,omega\n")
            for i in range(params.n_ions):
                for n in range(params.n_ions):
                    fh.write(f"{i},{n},{control.omega[i, n]!r}\n")
    print(f"target {label}: similarity F = {fval:.6f}")
    print(f"wrote {args.out}")
    return 0


def cmd_eval(args) -> int:
    cfg = load_run_config(args.config, {"seed": args.seed})
    if args.epsilons:
        cfg.epsilons = tuple(float(t) for t in args.epsilons.split(","))
    if args.budget_hz:
        cfg.budget_hz = args.budget_hz
    if args.targets:
        cfg.targets = tuple(args.targets.split(","))
    params, trailer = load_checkpoint(args.checkpoint)
    setup = _setup_for(args.chain, trailer.get("chain_fingerprint"))
    os.makedirs(args.out_dir, exist_ok=True)
    budget = 2 * math.pi * cfg.budget_hz
    reports = []
    for text in cfg.targets:
        spec = _target_spec(text, params.n_ions)
        report = evaluate_target(params, setup, spec, epsilons=cfg.epsilons,
                                 budget=budget)
        doc = report.to_dict()
        doc.update({"schema": "eval/1", "seed": cfg.seed, "config_hash": cfg.hash(),
                    "chain_fingerprint": setup.chain.fingerprint()})
        stem = spec.label().replace(":", "_")
        write_json(os.path.join(args.out_dir, f"eval_{stem}.json"), doc)
        write_crosstalk_csv(os.path.join(args.out_dir, f"crosstalk_{stem}.csv"),
                            report.crosstalk_curve)
        reports.append(report)
        print(f"{spec.label():20s} F={report.similarity:.6f} "
              f"|J|={report.physical_norm / (2 * math.pi):.3f} Hz "
              f"nbar={report.phonon_estimate:.2e}")
    with open(os.path.join(args.out_dir, "validity.csv"), "w") as fh:
        fh.write("target,similarity,j_norm_hz,max_adiabatic_ratio,phonon_estimate\n")
        for r in reports:
            fh.write(f"{r.target},{r.similarity!r},"
                     f"{r.physical_norm / (2 * math.pi)!r},"
                     f"{r.max_adiabatic_ratio!r},{r.phonon_estimate!r}\n")
    mean_f = float(np.mean([r.similarity for r in reports]))
    print(f"mean similarity over {len(reports)} targets: {mean_f:.6f}")
    return 0


def cmd_scaling(args) -> int:
    cfg = load_run_config(args.config, {
        "train_size": args.train_size, "val_size": args.val_size,
        "epochs": args.epochs, "hidden_dim": args.hidden_dim, "seed": args.seed})
    n_list = [int(t) for t in args.n_list.split(",")]
    kinds = args.kinds.split(",")
    records = scaling_study(n_list, kinds, cfg.train,
                            budget=2 * math.pi * cfg.budget_hz,
                            f_low=cfg.f_low, f_high=cfg.f_high,
                            data_seed=cfg.seed)
    write_scaling_csv(args.out, records, kinds)
    for rec in records:
        if "error" in rec:
            print(f"N={rec['n']}: FAILED ({rec['error']})")
        else:
            fs = " ".join(f"F_{k}={rec[f'F_{k}']:.4f}" for k in kinds)
            print(f"N={rec['n']}: {fs} epoch={rec['epoch_seconds']:.2f}s "
                  f"|J|={rec['j_norm_rad_s'] / (2 * math.pi):.3f} Hz")
    print(f"wrote {args.out}")
    return 0


def cmd_lattice(args) -> int:
    if args.list_n:
        for spec in list_supported(args.list_n):
            edges = len(build_target(spec).couplings.nonzero()[0])
            print(f"{spec.label():20s} sites={spec.n_ions:3d} edges={edges}")
        return 0
    spec = _target_spec(args.spec, args.n)
    graph = build_target(spec)
    doc = graph.to_dict()
    doc["target"] = spec.label()
    write_json(args.out, doc)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(graph.to_csv())
    print(f"wrote {args.out} ({spec.label()})")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ionforge",
                     description="Control-parameter synthesis for trapped-ion "
                                 "spin-interaction graphs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("chain", help="compute chain model and beat notes")
    common(p)
    p.add_argument("--n", type=int, default=None, help="ion count")
    p.add_argument("--f-low", type=float, default=None, dest="f_low")
    p.add_argument("--f-high", type=float, default=None, dest="f_high")
    p.add_argument("--f-x-hz", type=float, default=None, dest="f_x_hz")
    p.add_argument("--f-z-hz", type=float, default=None, dest="f_z_hz")
    p.add_argument("--out", default="chain.json")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("gen-data", help="generate a training dataset")
    common(p)
    p.add_argument("--chain", required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--out", default="dataset.iondat")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train the inverse network")
    common(p)
    p.add_argument("--chain", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default="model.ionnet")
    p.add_argument("--history", default=None, help="epoch log CSV")
    for name in ("train-size", "val-size", "epochs", "batch-size", "hidden-dim"):
        p.add_argument(f"--{name}", type=int, default=None,
                       dest=name.replace("-", "_"))
    p.add_argument("--lr0", type=float, default=None)
    p.add_argument("--dropout-rate", type=float, default=None, dest="dropout_rate")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="emit control parameters for a target")
    common(p)
    p.add_argument("--chain", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--target", required=True,
                   help="lattice shorthand (kagome, square:2x5) or JSON file")
    p.add_argument("--out", default="omega.json")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval", help="quality / robustness / validity report")
    common(p)
    p.add_argument("--chain", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--targets", default=None, help="comma-separated specs")
    p.add_argument("--epsilons", default=None, help="comma-separated crosstalk grid")
    p.add_argument("--budget-hz", type=float, default=None, dest="budget_hz")
    p.add_argument("--out-dir", default="reports", dest="out_dir")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scaling", help="similarity / timing / strength vs N")
    common(p)
    p.add_argument("--n-list", default="8,10,12,16,20,24", dest="n_list")
    p.add_argument("--kinds", default="linear")
    p.add_argument("--train-size", type=int, default=12000, dest="train_size")
    p.add_argument("--val-size", type=int, default=1200, dest="val_size")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--hidden-dim", type=int, default=2048, dest="hidden_dim")
    p.add_argument("--out", default="scaling.csv")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("lattice", help="build or list lattice targets")
    p.add_argument("--spec", default=None, help="e.g. square:2x5 or a JSON file")
    p.add_argument("--n", type=int, default=None, help="fill count for fragments")
    p.add_argument("--list", type=int, default=None, dest="list_n",
                   help="list kinds available at this N")
    p.add_argument("--out", default="target.json")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_lattice)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "lattice" and not (args.spec or args.list_n):
        print("ionforge lattice: error: need --spec or --list", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, NumericError) as exc:
        print(f"ionforge {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, SchemaError, json.JSONDecodeError, KeyError) as exc:
        print(f"ionforge {args.command}: I/O or schema failure: {exc}", file=sys.stderr)
        return 3
    except IonforgeError as exc:
        print(f"ionforge {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
