"""Command-line entry point: score, train, eval, and synth subcommands.

Every subcommand is deterministic given its flags, config file, and seed.
Exit codes: 0 success, 1 data error (malformed corpus, model mismatch,
missing embeddings), 2 usage error (bad flags or config). A config file
can be passed with --config or the GROOMRISK_CONFIG environment variable;
flags override file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import annotations, evaluation, regressor, synthgen
from .config import RunConfig, load_run_config
from .errors import (
    CorpusError,
    ModelFormatError,
    ParameterError,
    TrainingDivergedError,
)
from .features import (
    EmbeddingFeatureSpec,
    HashFeatureSpec,
    load_embeddings,
)
from .fuzzy import classify, membership_vector

POOLED = "pooled"


def _load_config(args, parser: argparse.ArgumentParser) -> RunConfig:
    try:
        return load_run_config(getattr(args, "config", None))
    except ParameterError as exc:
        parser.error(str(exc))


def _write_output(payload: bytes, path: str | None) -> None:
    if path is None:
        sys.stdout.write(payload.decode("utf-8"))
    else:
        Path(path).write_bytes(payload)


# ---------------------------------------------------------------- score


def _cmd_score(args, parser) -> int:
    run = _load_config(args, parser)
    fuzzy = run.fuzzy
    overrides = {}
    if args.membership_mode is not None:
        overrides["membership_mode"] = args.membership_mode
    if args.defuzz_mode is not None:
        overrides["defuzz_mode"] = args.defuzz_mode
    if args.alpha is not None:
        if not 0.0 < args.alpha <= 1.0:
            parser.error("alpha must be in (0,1]")
        overrides["alpha"] = args.alpha
    if overrides:
        fuzzy = dataclasses.replace(fuzzy, **overrides)

    contexts = annotations.parse_corpus(args.corpus)
    lines = ["context_id,r_groom,mu_moderate,mu_significant,mu_severe,category"]
    for ctx in contexts:
        score = ctx.risk_score
        mv = membership_vector(score, fuzzy)
        category = classify(score, fuzzy)
        lines.append("%s,%g,%.6f,%.6f,%.6f,%s" % (
            ctx.context_id, score, mv.mu_moderate, mv.mu_significant,
            mv.mu_severe, category.label))
    _write_output(("\n".join(lines) + "\n").encode("utf-8"), args.out)
    return 0


# ---------------------------------------------------------------- train


def _suffixed_path(out: str, tag: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}.{tag}{path.suffix or '.json'}")


def _resolve_train_setup(args, parser, run: RunConfig):
    cfg = run.train
    overrides = {}
    if args.lr is not None:
        if args.lr <= 0:
            parser.error("lr must be > 0")
        overrides["learning_rate"] = args.lr
    if args.epochs is not None:
        if args.epochs < 1:
            parser.error("epochs must be >= 1")
        overrides["epochs"] = args.epochs
    if args.batch is not None:
        if args.batch < 1:
            parser.error("batch must be >= 1")
        overrides["batch_size"] = args.batch
    if args.seed is not None:
        overrides["shuffle_seed"] = args.seed
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    kind = args.features or run.features.kind
    if kind == "embeddings" and args.embeddings is None:
        parser.error("--features embeddings requires --embeddings PATH")
    embeddings = None
    if kind == "embeddings":
        embeddings = load_embeddings(args.embeddings)
        if not embeddings:
            raise CorpusError(f"embeddings file {args.embeddings} is empty")
        dim = next(iter(embeddings.values())).dimension
        spec = EmbeddingFeatureSpec(dimension=dim)
    else:
        spec = run.features if isinstance(run.features, HashFeatureSpec) \
            else HashFeatureSpec()
        if args.dimension is not None:
            if args.dimension < 1:
                parser.error("dimension must be >= 1")
            spec = dataclasses.replace(spec, dimension=args.dimension)
    return cfg, spec, embeddings


def _cmd_train(args, parser) -> int:
    run = _load_config(args, parser)
    cfg, spec, embeddings = _resolve_train_setup(args, parser, run)
    contexts = annotations.parse_corpus(args.corpus)
    if not contexts:
        raise CorpusError(f"corpus {args.corpus} holds no contexts")

    jobs: list[tuple[str, list]] = []
    if args.pooled:
        jobs.append((POOLED, contexts))
    else:
        for group in annotations.GROUPS:
            subset = [c for c in contexts if c.group == group]
            if subset:
                jobs.append((group, subset))

    for tag, subset in jobs:
        dataset = [(ctx, ctx.risk_score) for ctx in subset]
        model = regressor.train(dataset, spec, cfg, embeddings=embeddings,
                                trained_on=tag)
        out = Path(args.out) if args.pooled else _suffixed_path(args.out, tag)
        regressor.save_model(model, out)
        losses = model.train_meta["epoch_losses"]
        for epoch, loss in enumerate(losses, start=1):
            print(f"{tag} epoch {epoch}/{len(losses)} loss {loss:.6g}")
        print(f"{tag}: wrote {out} ({len(subset)} contexts, "
              f"final loss {losses[-1]:.6g})")
    return 0


# ---------------------------------------------------------------- eval


def _route_models(models, groups_present, by_group: bool):
    """Map each group to its model: a group-tagged model first, then the
    pooled one unless --by-group forbids the fallback."""
    by_tag = {}
    for model in models:
        tag = model.train_meta.get("trained_on", POOLED)
        if tag in by_tag:
            raise ParameterError(f"two models are tagged {tag!r}")
        by_tag[tag] = model
    routing = {}
    for group in groups_present:
        model = by_tag.get(group)
        if model is None and not by_group:
            model = by_tag.get(POOLED)
        if model is None:
            raise ParameterError(
                f"no model covers group {group!r} "
                f"(models tagged: {sorted(by_tag)})")
        routing[group] = model
    return routing


def _cmd_eval(args, parser) -> int:
    run = _load_config(args, parser)
    contexts = annotations.parse_corpus(args.corpus)
    models = [regressor.load_model(path) for path in args.model]

    embeddings = None
    needs_embeddings = any(isinstance(m.feature_spec, EmbeddingFeatureSpec)
                           for m in models)
    if needs_embeddings and args.embeddings is None:
        parser.error("a model with embedding features requires --embeddings PATH")
    if args.embeddings is not None:
        embeddings = load_embeddings(args.embeddings)

    groups_present = [g for g in annotations.GROUPS
                      if any(c.group == g for c in contexts)]
    routing = _route_models(models, groups_present, args.by_group)

    records = []
    for group in groups_present:
        model = routing[group]
        subset = [c for c in contexts if c.group == group]
        vectors = regressor.featurize(subset, model.feature_spec,
                                      embeddings=embeddings)
        for ctx, fv in zip(subset, vectors):
            records.append(evaluation.EvalRecord(
                context_id=ctx.context_id, group=group,
                r_groom=ctx.risk_score,
                r_pred=regressor.predict(model, fv, clamp=args.clamp)))

    train_echo = {m.train_meta.get("trained_on", POOLED):
                  m.train_meta.get("config") for m in models}
    report = evaluation.build_report(records, run.fuzzy,
                                     train_config_dict=train_echo)
    payload = evaluation.emit_report(report, args.format)
    _write_output(payload, args.report)
    return 0


# ---------------------------------------------------------------- synth


def _cmd_synth(args, parser) -> int:
    run = _load_config(args, parser)
    cfg = run.synth
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.per_group is not None:
        if args.per_group < 0:
            parser.error("per-group must be >= 0")
        overrides["conversations_per_group"] = args.per_group
    if args.density is not None:
        if not 0.0 <= args.density <= 1.0:
            parser.error("density must be in [0, 1]")
        overrides["strategy_density"] = args.density
    if args.partial is not None:
        if not 0.0 <= args.partial <= 1.0:
            parser.error("partial must be in [0, 1]")
        overrides["partial_probability"] = args.partial
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    contexts = synthgen.generate(cfg)
    payload = annotations.serialize_corpus(contexts)
    Path(args.out).write_bytes(payload)
    meta_path = Path(str(args.out) + ".meta.json")
    meta_path.write_text(
        json.dumps({"synth": cfg.to_dict()}, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    print(f"wrote {args.out} ({len(contexts)} contexts) and {meta_path}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groomrisk",
        description="Fuzzy grooming-risk scoring, training, and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser(
        "score", help="score a corpus and print per-context memberships",
        description="Per-context risk scores, category memberships, and the "
                    "defuzzified category, as CSV.")
    score.add_argument("--corpus", required=True, help="context-level corpus path")
    score.add_argument("--config", help="run config file (JSON)")
    score.add_argument("--membership-mode",
                       choices=["literal-pdf", "normalized", "normalized-shoulder"],
                       help="membership mode (default: normalized-shoulder)")
    score.add_argument("--defuzz-mode", choices=["argmax", "alpha-highest"],
                       help="defuzzification rule (default: argmax)")
    score.add_argument("--alpha", type=float,
                       help="alpha cut in (0,1] for alpha-highest (default: 0.5)")
    score.add_argument("--out", help="output path (default: stdout)")
    score.set_defaults(func=_cmd_score)

    train = sub.add_parser(
        "train", help="fit a linear risk regressor",
        description="Adam-trained linear regression from context text (hashed "
                    "n-grams) or precomputed embeddings to risk scores. One "
                    "model per group by default; --pooled fits a single model.")
    train.add_argument("--corpus", required=True, help="context-level corpus path")
    train.add_argument("--config", help="run config file (JSON)")
    train.add_argument("--features", choices=["hash", "embeddings"],
                       help="feature source (default: hash)")
    train.add_argument("--embeddings", help="embedding file (JSONL), "
                                            "required with --features embeddings")
    train.add_argument("--out", required=True,
                       help="model output path; per-group runs insert the group "
                            "name before the suffix")
    train.add_argument("--lr", type=float, help="learning rate (default: 2e-05)")
    train.add_argument("--epochs", type=int, help="training epochs (default: 5)")
    train.add_argument("--batch", type=int, help="mini-batch size (default: 4)")
    train.add_argument("--seed", type=int, help="shuffle seed (default: 0)")
    train.add_argument("--dimension", type=int,
                       help="hashed feature dimension (default: 262144)")
    train.add_argument("--pooled", action="store_true",
                       help="train one model on all groups together")
    train.set_defaults(func=_cmd_train)

    ev = sub.add_parser(
        "eval", help="evaluate models and emit the MSE report",
        description="Per-group, per-category MSE report. Each group is served "
                    "by the model tagged with it, falling back to a pooled "
                    "model unless --by-group is given.")
    ev.add_argument("--corpus", required=True, help="context-level corpus path")
    ev.add_argument("--config", help="run config file (JSON)")
    ev.add_argument("--model", required=True, nargs="+",
                    help="model file(s); tags come from their training metadata")
    ev.add_argument("--embeddings", help="embedding file for embedding-feature models")
    ev.add_argument("--by-group", action="store_true",
                    help="require a dedicated model per group (no pooled fallback)")
    ev.add_argument("--report", help="report output path (default: stdout)")
    ev.add_argument("--format", choices=list(evaluation.REPORT_FORMATS),
                    default="table-text", help="report format (default: table-text)")
    ev.add_argument("--clamp", action="store_true",
                    help="clamp predictions into [0, 12] before scoring errors")
    ev.set_defaults(func=_cmd_eval)

    synth = sub.add_parser(
        "synth", help="generate a synthetic annotated corpus",
        description="Seeded synthetic corpus with planted strategy cues; "
                    "labels are exact by construction. Writes the corpus plus "
                    "a .meta.json config echo.")
    synth.add_argument("--out", required=True, help="corpus output path")
    synth.add_argument("--config", help="run config file (JSON)")
    synth.add_argument("--seed", type=int, help="generator seed (default: 0)")
    synth.add_argument("--per-group", type=int,
                       help="conversations per group (default: 50)")
    synth.add_argument("--density", type=float,
                       help="per-strategy planting probability (default: 0.25)")
    synth.add_argument("--partial", type=float,
                       help="probability a planted strategy is 0.5 (default: 0.3)")
    synth.set_defaults(func=_cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (CorpusError, ModelFormatError, TrainingDivergedError,
            ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
