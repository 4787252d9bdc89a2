"""Command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 empty or invalid data,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import metrics
from .detector import DetectorModel, evaluate_detector, featurize, runtime_filter, train_detector
from .errors import InsufficientDataError, SlothError, WeightFileError
from .model import ModelConfig, ModelWeights, Seq2Seq
from .serialize import load_model, save_weights
from .sloth import Kind, TestCase, generate_test, word_edit_distance
from .tokenizer import PosLexicon, Vocabulary, default_lexicon, default_vocabulary, tokenize
from .training import TrainConfig, encode_pairs, heldout_accuracy, train

log = logging.getLogger("slothbench")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

# fields that depend on wall-clock time; excluded from determinism checks
VOLATILE_FIELDS = ("seed_latency_ns", "adv_latency_ns", "i_latency", "generation_wall_ns")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class InvariantError(Exception):
    pass


@dataclass
class CampaignConfig:
    model: str = ""
    seeds: str = ""
    vocab: str | None = None
    epsilon: int = 1
    kind: str = "token"
    random_kind: str = "token"  # operator the random baseline draws from
    num_beams: int = 1
    max_length: int | None = None
    lambdas: list = field(default_factory=lambda: [0.0, 1.0, 3.0, 5.0])
    repeats: int = 3
    rng_seed: int = 0
    workers: int = 1
    out: str = "report.jsonl"
    workers_from_file = False  # class attribute, kept out of the printed config

    def validate(self) -> None:
        if not 1 <= self.epsilon <= 3:
            raise UsageError(f"epsilon must be in 1..3, got {self.epsilon}")
        if self.kind not in {k.value for k in Kind}:
            raise UsageError(f"kind must be one of char|token|struct|random, got {self.kind!r}")
        if self.random_kind not in ("char", "token", "struct"):
            raise UsageError(f"random_kind must be one of char|token|struct, got {self.random_kind!r}")
        if not 1 <= self.num_beams <= 5:
            raise UsageError(f"num_beams must be in 1..5, got {self.num_beams}")
        if self.max_length is not None and self.max_length < 1:
            raise UsageError("max_length must be >= 1")
        if self.repeats < 1:
            raise UsageError("repeats must be >= 1")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        if any(lam < 0 for lam in self.lambdas):
            raise UsageError("lambda values must be >= 0")
        for name in ("model", "seeds"):
            path = getattr(self, name)
            if not path or not Path(path).is_file():
                raise UsageError(f"{name} path {path!r} does not exist")
        if self.vocab and not Path(self.vocab).is_file():
            raise UsageError(f"vocab path {self.vocab!r} does not exist")

    @classmethod
    def from_file(cls, path) -> "CampaignConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError(f"config {path} must hold a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        cfg = cls(**data)
        cfg.workers_from_file = "workers" in data
        return cfg


def _print_config(name: str, cfg: dict) -> None:
    print(json.dumps({"command": name, "config": cfg}, sort_keys=True, default=str), flush=True)


def _default_workers() -> int:
    raw = os.environ.get("SLOTHBENCH_WORKERS")
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"SLOTHBENCH_WORKERS must be an integer, got {raw!r}") from None


def _load_vocab(path) -> Vocabulary:
    return Vocabulary.load(path) if path else default_vocabulary()


def _check_out(path: Path, force: bool) -> None:
    if path.exists() and not force:
        raise UsageError(f"{path} exists; pass --force to overwrite")


def read_seeds(path, vocab: Vocabulary) -> list:
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
    return [tokenize(ln, vocab) for ln in lines if ln]


# ---------------------------------------------------------------------------
# gen-corpus
# ---------------------------------------------------------------------------


def cmd_gen_corpus(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if args.heldout < 1:
        raise UsageError("--heldout must be >= 1")
    out = Path(args.out)
    files = {name: out / name for name in ("corpus.tsv", "heldout.tsv", "seeds.txt", "vocab.txt", "pos_lexicon.tsv")}
    _print_config("gen-corpus", {"seed": args.seed, "n": args.n, "heldout": args.heldout, "out": str(out)})
    for p in files.values():
        _check_out(p, args.force)
    out.mkdir(parents=True, exist_ok=True)
    pairs = corpus_mod.gen_synthetic_corpus(args.seed, args.n)
    held = corpus_mod.heldout_pairs(args.seed, args.heldout, [s for s, _ in pairs])
    corpus_mod.write_parallel(files["corpus.tsv"], pairs)
    corpus_mod.write_parallel(files["heldout.tsv"], held)
    files["seeds.txt"].write_text("".join(f"{s}\n" for s, _ in held), encoding="utf-8")
    default_vocabulary().save(files["vocab.txt"])
    default_lexicon().save(files["pos_lexicon.tsv"])
    print(json.dumps({"pairs": len(pairs), "heldout": len(held)}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------


def cmd_train(args) -> int:
    if not Path(args.corpus).is_file():
        raise UsageError(f"corpus path {args.corpus!r} does not exist")
    vocab = _load_vocab(args.vocab)
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    model_keys = {"embed_dim", "hidden_dim", "max_length", "num_beams", "rng_seed"}
    hyper_keys = {f.name for f in dataclasses.fields(TrainConfig)}
    unknown = set(file_cfg) - model_keys - hyper_keys
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    hyper_args = {k: v for k, v in file_cfg.items() if k in hyper_keys}
    for key in ("epochs", "learning_rate", "batch_size"):
        if getattr(args, key) is not None:
            hyper_args[key] = getattr(args, key)
    if args.seed is not None:
        hyper_args["rng_seed"] = args.seed
    hyper = TrainConfig(**hyper_args)
    model_args = {k: v for k, v in file_cfg.items() if k in model_keys}
    model_args.setdefault("rng_seed", hyper.rng_seed)
    if args.max_length is not None:
        model_args["max_length"] = args.max_length
    config = ModelConfig(vocab_size=len(vocab), eos_id=vocab.eos_id, sos_id=vocab.sos_id, **model_args)
    out = Path(args.out)
    _print_config("train", {"corpus": args.corpus, "model": config.to_dict(), "train": dataclasses.asdict(hyper), "out": str(out)})
    _check_out(out, args.force)
    try:
        pairs = corpus_mod.read_parallel(args.corpus)
    except ValueError as exc:
        raise DataError(f"malformed corpus: {exc}") from None
    if not pairs:
        raise DataError("corpus is empty")
    data = encode_pairs(pairs, vocab)
    weights, history = train(
        data, ModelWeights.init(config), config, hyper,
        progress=lambda e, l: print(json.dumps({"epoch": e, "loss": l}), flush=True),
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    save_weights(out, weights, config)
    loss_log = Path(args.loss_log) if args.loss_log else out.with_suffix(out.suffix + ".loss.jsonl")
    loss_log.write_text("".join(json.dumps({"epoch": i + 1, "loss": l}) + "\n" for i, l in enumerate(history)))
    summary = {"initial_loss": history[0], "final_loss": history[-1], "weights": str(out), "loss_log": str(loss_log)}
    if args.heldout:
        held = encode_pairs(corpus_mod.read_parallel(args.heldout), vocab)
        acc, exact = heldout_accuracy(Seq2Seq(weights, config), held)
        summary.update(heldout_next_token_accuracy=acc, heldout_exact_length_eos=exact)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# attack
# ---------------------------------------------------------------------------


def _resolve_campaign(args) -> CampaignConfig:
    cfg = CampaignConfig.from_file(args.config) if args.config else CampaignConfig()
    if not cfg.workers_from_file:
        cfg.workers = _default_workers()
    overrides = {
        "model": args.model, "seeds": args.seeds, "vocab": args.vocab, "epsilon": args.epsilon,
        "kind": args.kind, "random_kind": args.random_kind, "num_beams": args.num_beams, "max_length": args.max_length,
        "lambdas": args.lambdas, "repeats": args.repeats, "rng_seed": args.seed,
        "workers": args.workers, "out": args.out,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


def campaign_model(cfg: CampaignConfig) -> Seq2Seq:
    overrides = {"num_beams": cfg.num_beams}
    if cfg.max_length is not None:
        overrides["max_length"] = cfg.max_length
    try:
        return load_model(cfg.model, **overrides)
    except WeightFileError as exc:
        raise DataError(str(exc)) from None


def build_record(index: int, case: TestCase, model: Seq2Seq, repeats: int, wall_ns: int, meter=None) -> dict:
    meter = meter or metrics.StepCountMeter()
    seed_lat = metrics.measure_latency(model, case.seed.tokens, repeats)
    adv_lat = metrics.measure_latency(model, case.perturbed.tokens, repeats)
    _, seed_energy = meter.measure(model.translate, case.seed.tokens)
    _, adv_energy = meter.measure(model.translate, case.perturbed.tokens)
    rec = metrics.EfficiencyRecord(
        case.seed_trace.loops, case.adv_trace.loops, seed_lat, adv_lat, seed_energy, adv_energy, len(case.seed.tokens)
    )
    return {
        "seed_index": index,
        "seed": case.seed.surface,
        "perturbed": case.perturbed.surface,
        "kind": case.kind.value,
        "epsilon": case.epsilon,
        "epsilon_used": case.epsilon_used,
        "exhausted": case.exhausted,
        "input_length": rec.input_length,
        "seed_loops": rec.seed_loops,
        "adv_loops": rec.adv_loops,
        "seed_terminated_by": case.seed_trace.terminated_by,
        "adv_terminated_by": case.adv_trace.terminated_by,
        "per_iteration_best_loops": list(case.per_iteration_best_loops),
        "i_loops": metrics.i_loops(rec),
        "seed_latency_ns": rec.seed_latency_ns,
        "adv_latency_ns": rec.adv_latency_ns,
        "i_latency": metrics.i_latency(rec),
        "seed_energy": rec.seed_energy,
        "adv_energy": rec.adv_energy,
        "i_energy": metrics.i_energy(rec),
        "candidates_evaluated": case.candidates_evaluated,
        "generation_wall_ns": wall_ns,
    }


def check_record(rec: dict) -> None:
    for key, value in rec.items():
        if isinstance(value, float) and not np.isfinite(value):
            raise InvariantError(f"record {rec['seed_index']}: {key} is not finite")
    if len(rec["seed"].split()) != len(rec["perturbed"].split()):
        raise InvariantError(f"record {rec['seed_index']}: word count changed")
    changed = sum(a != b for a, b in zip(rec["seed"].split(), rec["perturbed"].split()))
    if changed > rec["epsilon"]:
        raise InvariantError(f"record {rec['seed_index']}: {changed} words changed, budget {rec['epsilon']}")


def run_campaign(cfg: CampaignConfig, out_path: Path) -> int:
    vocab = _load_vocab(cfg.vocab)
    seeds = read_seeds(cfg.seeds, vocab)
    if not seeds:
        raise DataError(f"no seeds in {cfg.seeds}")
    model = campaign_model(cfg)
    lexicon = default_lexicon()
    kind = Kind(cfg.kind)

    def work(item):
        i, seed = item
        t0 = time.perf_counter_ns()
        case = generate_test(
            seed, cfg.epsilon, kind, model, vocab, lexicon,
            rng_seed=[cfg.rng_seed, i], random_kind=Kind(cfg.random_kind),
        )
        return case, time.perf_counter_ns() - t0

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        cases = list(pool.map(work, enumerate(seeds)))
    # the pool is shut down here, so latency timing below has the CPU to itself
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for i, (case, wall) in enumerate(cases):
            rec = build_record(i, case, model, cfg.repeats, wall)
            check_record(rec)
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()
    return len(seeds)


def cmd_attack(args) -> int:
    cfg = _resolve_campaign(args)
    _print_config("attack", dataclasses.asdict(cfg))
    out = Path(cfg.out)
    _check_out(out, args.force)
    n = run_campaign(cfg, out)
    summary = summarize(read_report(out), cfg.lambdas)
    print(json.dumps({"records": n, "report": str(out), "i_loops": summary["i_loops"], "eta": summary["eta"]}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def read_report(path) -> list:
    """Parse a line-delimited JSON report, rejecting a truncated tail."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"report {path!r} does not exist")
    raw = p.read_text(encoding="utf-8")
    if not raw.strip():
        raise DataError(f"report {path} is empty")
    if not raw.endswith("\n"):
        raise DataError(f"report {path}: final line is truncated")
    records = []
    for n, ln in enumerate(raw.splitlines(), 1):
        if not ln.strip():
            continue
        try:
            records.append(json.loads(ln))
        except json.JSONDecodeError:
            raise DataError(f"report {path}: line {n} is not valid JSON") from None
    if not records:
        raise DataError(f"report {path} is empty")
    return records


def _to_efficiency(rec: dict) -> metrics.EfficiencyRecord:
    return metrics.EfficiencyRecord(
        rec["seed_loops"], rec["adv_loops"], rec["seed_latency_ns"], rec["adv_latency_ns"],
        rec["seed_energy"], rec["adv_energy"], rec["input_length"],
    )


def summarize(records, lambdas) -> dict:
    effs = [_to_efficiency(r) for r in records]
    stats = metrics.build_length_stats((e.input_length, e.seed_loops) for e in effs)
    summary = {"records": len(records), "kinds": sorted({r["kind"] for r in records})}
    for name in ("i_loops", "i_latency", "i_energy"):
        vals = [r[name] for r in records]
        summary[name] = {"mean": float(np.mean(vals)), "median": float(statistics.median(vals))}
    summary["eta"] = {str(float(lam)): metrics.success_ratio(effs, lam, stats) for lam in lambdas}
    summary["length_table"] = stats.table()
    summary["pooled"] = dataclasses.asdict(stats.pooled)
    return summary


def cmd_evaluate(args) -> int:
    lambdas = args.lambdas if args.lambdas is not None else [0.0, 1.0, 3.0, 5.0]
    _print_config("evaluate", {"report": args.report, "lambdas": lambdas, "beam_sweep": args.beam_sweep, "out": args.out})
    records = read_report(args.report)
    summary = summarize(records, lambdas)
    if args.beam_sweep:
        if not args.config:
            raise UsageError("--beam-sweep needs --config with model and seeds")
        cfg = CampaignConfig.from_file(args.config)
        cfg.validate()
        vocab = _load_vocab(cfg.vocab)
        seeds = read_seeds(cfg.seeds, vocab)
        rows = metrics.beam_sensitivity_sweep(
            seeds, campaign_model(cfg), vocab, epsilons=[cfg.epsilon], kinds=[cfg.kind],
            lexicon=default_lexicon(), rng_seed=cfg.rng_seed,
        )
        summary["beam_sweep"] = [
            {"num_beams": r.num_beams, **{f"eps{e}_{k}": v for (e, k), v in r.cells.items()}} for r in rows
        ]
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# detector lifecycle
# ---------------------------------------------------------------------------


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _abnormal_by_kind(reports, vocab) -> dict:
    """Degrading test inputs (adv_loops > seed_loops) grouped by kind."""
    grouped = {}
    for path in reports:
        for rec in read_report(path):
            if rec["adv_loops"] > rec["seed_loops"]:
                grouped.setdefault(rec["kind"], []).append(tokenize(rec["perturbed"], vocab))
    return grouped


def _features(model, seqs) -> list:
    return [featurize(model.encode(s.tokens)) for s in seqs]


def _overhead(model, detector, seqs, limit: int = 20) -> dict:
    seqs = seqs[:limit]
    overhead = [runtime_filter(s.tokens, model, detector).overhead_ns for s in seqs]
    latency = [metrics.measure_latency(model, s.tokens, 1) for s in seqs]
    return {
        "overhead_ns": float(np.mean(overhead)),
        "translation_ns": float(np.mean(latency)),
        "overhead_pct": float(np.mean(overhead) / np.mean(latency) * 100.0),
    }


def cmd_detect_train(args) -> int:
    _print_config("detect-train", {"seeds": args.seeds, "reports": args.report, "model": args.model, "split_seed": args.split_seed, "out": args.out})
    for p in [args.seeds, args.model, *args.report]:
        if not Path(p).is_file():
            raise UsageError(f"path {p!r} does not exist")
    out = Path(args.out)
    _check_out(out, args.force)
    vocab = _load_vocab(args.vocab)
    model = load_model(args.model)
    seeds = read_seeds(args.seeds, vocab)
    normal = _features(model, seeds)
    grouped = _abnormal_by_kind(args.report, vocab)
    columns = {}
    for kind in sorted(grouped):
        try:
            _, m = train_detector(normal, _features(model, grouped[kind]), args.split_seed)
            columns[kind] = m
        except InsufficientDataError as exc:
            columns[kind] = {"error": str(exc)}
    mixed = [s for kind in sorted(grouped) for s in grouped[kind]]
    try:
        det, m = train_detector(normal, _features(model, mixed), args.split_seed)
    except InsufficientDataError as exc:
        raise DataError(str(exc)) from None
    m.update(_overhead(model, det, seeds))
    columns["Mixed"] = m
    det.save(out, meta={"reports": [_file_digest(p) for p in args.report], "split_seed": args.split_seed})
    print(json.dumps({"detector": str(out), "columns": columns}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_detect_eval(args) -> int:
    _print_config("detect-eval", {"seeds": args.seeds, "reports": args.report, "model": args.model, "detector": args.detector})
    for p in [args.seeds, args.model, args.detector, *args.report]:
        if not Path(p).is_file():
            raise UsageError(f"path {p!r} does not exist")
    vocab = _load_vocab(args.vocab)
    model = load_model(args.model)
    try:
        det, meta = DetectorModel.load(args.detector)
    except WeightFileError as exc:
        raise DataError(str(exc)) from None
    leaked = [p for p in args.report if _file_digest(p) in set(meta.get("reports", []))]
    if leaked:
        print(f"warning: {', '.join(leaked)} was used to train this detector; metrics are optimistic", file=sys.stderr)
    seeds = read_seeds(args.seeds, vocab)
    normal = _features(model, seeds)
    grouped = _abnormal_by_kind(args.report, vocab)
    if not grouped:
        raise DataError("reports contain no degrading inputs")
    columns = {}
    for kind in sorted(grouped):
        columns[kind] = evaluate_detector(det, normal, _features(model, grouped[kind]))
    mixed = [s for kind in sorted(grouped) for s in grouped[kind]]
    columns["Mixed"] = evaluate_detector(det, normal, _features(model, mixed))
    columns["Mixed"].update(_overhead(model, det, seeds))
    print(json.dumps({"columns": columns, "leakage_warning": bool(leaked)}, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slothbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-corpus", help="write a synthetic parallel corpus and held-out seeds")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--heldout", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("train", help="train the toy translator")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config")
    p.add_argument("--vocab")
    p.add_argument("--heldout")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--max-length", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--loss-log")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("attack", help="generate efficiency-degrading test inputs")
    p.add_argument("--config")
    p.add_argument("--model")
    p.add_argument("--seeds")
    p.add_argument("--vocab")
    p.add_argument("--epsilon", type=int)
    p.add_argument("--kind", choices=[k.value for k in Kind])
    p.add_argument("--random-kind", choices=["char", "token", "struct"])
    p.add_argument("--num-beams", type=int)
    p.add_argument("--max-length", type=int)
    p.add_argument("--lambda", dest="lambdas", type=float, action="append")
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", help="summarise a report")
    p.add_argument("--report", required=True)
    p.add_argument("--lambda", dest="lambdas", type=float, action="append")
    p.add_argument("--beam-sweep", action="store_true")
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    for name, func in (("detect-train", cmd_detect_train), ("detect-eval", cmd_detect_eval)):
        p = sub.add_parser(name)
        p.add_argument("--seeds", required=True)
        p.add_argument("--report", action="append", required=True)
        p.add_argument("--model", required=True)
        p.add_argument("--vocab")
        p.set_defaults(func=func)
        if name == "detect-train":
            p.add_argument("--split-seed", type=int, default=0)
            p.add_argument("--out", required=True)
            p.add_argument("--force", action="store_true")
        else:
            p.add_argument("--detector", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help or an argparse usage error
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvariantError, SlothError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
