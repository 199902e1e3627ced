"""Command-line entry points: train, predict, plan, serve, explain, vocab."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .chem import parse_smiles
from .data import build_vocab, load_corpus
from .engine import BeamConfig, predict_single_step
from .errors import NoRouteFound, RetroEngineError
from .model import ModelConfig, load_model, make_sample, save_checkpoint
from .plan import BuildingBlockSet, PlanLimits, plan
from .train import TrainConfig, build_model, evaluate_topk, prepare_samples, train_model


def _env(name: str, default=None):
    return os.environ.get(f"RETROENGINE_{name}", default)


# -- subcommands ---------------------------------------------------------------


def cmd_train(args) -> int:
    records = load_corpus(args.corpus, split=args.split)
    if not records:
        print(f"no records in {args.corpus} (split={args.split})", file=sys.stderr)
        return 1
    vocab = build_vocab(records)
    model_config = ModelConfig(
        d=args.d,
        d_k=args.d // args.n_head,
        n_head=args.n_head,
        n_layers=args.n_layers,
        vocab_size=len(vocab),
        reaction_type_known=args.class_known,
        seed=args.seed,
    )
    samples = prepare_samples(records, vocab, model_config)
    train_config = TrainConfig(
        steps=args.steps,
        batch_size=args.batch_size,
        optimizer=args.optimizer,
        learning_rate=args.lr,
        tau_weights=args.tau_weights,
        no_CL=args.no_cl,
        no_SA=args.no_sa,
        no_JL=args.no_jl,
        seed=args.seed,
        log_path=args.log,
    )
    model = build_model(model_config, vocab, train_config)
    log = train_model(model, samples, train_config)
    final = log.records[-1]
    print(f"trained {args.steps} steps; final total loss {final.total:.6g}")
    metadata = {
        "corpus": str(args.corpus),
        "split": args.split,
        "steps": args.steps,
        "task_weights": final.weights,
    }
    if train_config.no_JL:
        print("no-JL ablation trains separate models; checkpoint not written")
    else:
        save_checkpoint(args.out, model, model_config, vocab, metadata)
        print(f"checkpoint written to {args.out}")
    if args.eval:
        table = evaluate_topk(model, samples)
        for task, accs in table.as_dict().items():
            cells = "\t".join(f"top-{k}={v:.3f}" for k, v in accs.items())
            print(f"{task}\t{cells}")
    return 0


def cmd_predict(args) -> int:
    model, _ = load_model(args.checkpoint)
    g = parse_smiles(args.smiles)
    beam = BeamConfig(
        n_lg=args.beam_lg, n_conn=args.beam_conn, n_bond=args.beam_bond, k_out=args.topk
    )
    candidates = predict_single_step(g, model, args.reaction_class, beam=beam)
    for cand in candidates[: args.topk]:
        d = cand.trace.deltas
        fields = [
            str(cand.rank),
            f"{cand.trace.total:.6g}",
            f"{d['dE1']:.6g}",
            f"{d['dE2']:.6g}",
            f"{d['dE3']:.6g}",
            f"{d['dE4']:.6g}",
            ".".join(cand.reactant_smiles),
        ]
        print("\t".join(fields))
    return 0


def cmd_plan(args) -> int:
    model, _ = load_model(args.checkpoint)
    blocks = BuildingBlockSet.load(args.blocks)
    limits = PlanLimits(
        max_expansions=args.max_expansions,
        max_depth=args.depth,
        topk_per_expand=args.topk,
    )
    try:
        route = plan(
            args.target, blocks, model=model, limits=limits,
            reaction_type=args.reaction_class,
        )
    except NoRouteFound as exc:
        print(f"no route: {exc} {exc.stats}", file=sys.stderr)
        return 2
    print(f"route with {len(route.steps)} steps, total energy {route.total_energy:.6g}")
    for i, step in enumerate(route.steps, 1):
        print(f"{i}\t{step.product}\t=>\t{'.'.join(step.reactants)}\t{step.trace.total:.6g}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app_from_files

    checkpoint = args.checkpoint or _env("CHECKPOINT")
    blocks = args.blocks or _env("BLOCKS")
    if not checkpoint or not blocks:
        print("serve requires --checkpoint and --blocks (or env equivalents)", file=sys.stderr)
        return 1
    static_dir = args.static_dir or _env("STATIC")
    app = create_app_from_files(
        checkpoint, blocks, session_ttl=args.session_ttl, static_dir=static_dir
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _explain_sample(model, args):
    from .data import extract_labels
    from .data.corpus import parse_reaction_row

    record = parse_reaction_row(
        "query", str(args.reaction_class or 0), f"{args.reactants}>>{args.smiles}"
    )
    labels = extract_labels(record)
    lg_id = model.vocab.lookup(labels.lg_canonical)
    if lg_id is None:
        raise RetroEngineError(f"leaving group {labels.lg_canonical!r} not in vocabulary")
    return make_sample(
        "query", record.product, labels, lg_id, model.config,
        reaction_type=args.reaction_class,
    )


def cmd_explain(args) -> int:
    from .explain import apex_contributions, attention_heatmaps, reaction_type_trace

    model, metadata = load_model(args.checkpoint)
    weights = metadata.get("task_weights") if isinstance(metadata, dict) else None
    if args.mode == "heads":
        report = attention_heatmaps(parse_smiles(args.smiles), model)
        for e in report.entries:
            print(f"head {e.head}\tRV={e.rv:.4f}\t{e.label}")
        return 0
    sample = _explain_sample(model, args)
    if args.mode == "apex":
        graph = apex_contributions(sample, model, args.task, weights=weights)
        print(f"task {graph.task}\tbaseline {graph.baseline_loss:.6g}")
        for i, score in enumerate(graph.scores):
            print(f"{i}\t{score:.6g}")
    else:  # trace
        result = reaction_type_trace(sample, model, args.task, weights=weights)
        print(json.dumps({
            "hard_labels": result.hard_labels,
            "soft_labels": result.soft_labels,
        }))
    return 0


def cmd_vocab(args) -> int:
    records = load_corpus(args.corpus, split=args.split)
    vocab = build_vocab(records)
    n = len(records)
    print(f"records={n} distinct_lgs={len(vocab)} ratio={len(vocab) / max(n, 1):.4f}")
    for i, entry in enumerate(vocab.entries):
        print(f"{i}\t{entry.frequency}\t{entry.canonical or '<empty>'}")
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="retroengine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a mapped-reaction corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default=None)
    p.add_argument("--out", default="model.ckpt")
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--tau-weights", type=float, default=1.0)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--n-head", type=int, default=4)
    p.add_argument("--n-layers", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-known", action="store_true")
    p.add_argument("--no-cl", action="store_true")
    p.add_argument("--no-sa", action="store_true")
    p.add_argument("--no-jl", action="store_true")
    p.add_argument("--log", default=None)
    p.add_argument("--eval", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="rank single-step disconnections")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--smiles", required=True)
    p.add_argument("--class", dest="reaction_class", type=int, default=None)
    p.add_argument("--topk", type=int, default=10)
    p.add_argument("--beam-lg", type=int, default=10)
    p.add_argument("--beam-conn", type=int, default=4)
    p.add_argument("--beam-bond", type=int, default=4)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("plan", help="search a multi-step route to building blocks")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--blocks", required=True)
    p.add_argument("--class", dest="reaction_class", type=int, default=None)
    p.add_argument("--max-expansions", type=int, default=100)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--topk", type=int, default=5)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--blocks", default=None)
    p.add_argument("--host", default=_env("HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(_env("PORT", "8321")))
    p.add_argument(
        "--session-ttl", type=float, default=float(_env("SESSION_TTL", "1800"))
    )
    p.add_argument("--static-dir", default=None, help="serve UI assets under /ui")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("explain", help="per-atom contributions and head analysis")
    p.add_argument("mode", choices=("apex", "trace", "heads"))
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--smiles", required=True)
    p.add_argument("--reactants", default=None)
    p.add_argument("--task", default="overall")
    p.add_argument("--class", dest="reaction_class", type=int, default=None)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("vocab", help="inspect the leaving-group vocabulary of a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default=None)
    p.set_defaults(func=cmd_vocab)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RetroEngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
