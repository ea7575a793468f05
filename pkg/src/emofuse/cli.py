"""Command-line interface.

Every command prints a JSON report on stdout that embeds its effective
configuration, with the source of each value (flag, config file or
default). Exit codes: 0 success, 2 argument error, 3 data error, 4 check
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .aggregation import KINDS, ClusterParams, aggregate
from .core import EMOTIONS, accuracy, align_bank, argmax_predict, confusion, format_confusion
from .errors import ArgumentError, DataError, EmptyInput, InvalidSpec, MissingSample
from .fusion import Subset, bs_fusion, exhaustive_oracle, majority_vote, mean_fuse, weighted_mean_fuse
from .gradcheck import format_table, run_gradcheck
from .reference import load_split_counts
from .sequence import pool, window_concat
from .synth import SequenceSpec, SynthSpec, gen_bank, gen_sequences
from .text import build_vocab, normalize_tokens, tfidf_matrix
from .training import train_toy

REPORT_FORMAT = "emofuse.report/1"
EXIT_OK, EXIT_ARGS, EXIT_DATA, EXIT_CHECK = 0, 2, 3, 4

# synth field name -> CLI flag, for error messages
_FIELD_FLAGS = {
    "n_models": "--models", "n_samples": "--samples", "accuracy": "--acc", "noise": "--noise",
    "sharpness": "--sharpness", "prior": "--prior", "seed": "--seed", "shared_noise": "--shared-noise",
    "n_per_class": "--per-class", "min_len": "--min-len", "dim": "--dim", "delta": "--delta",
}


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


class _Options:
    """Options of one subcommand; argparse defaults are ``None`` so flags are detectable."""

    def __init__(self, parser):
        self.parser = parser
        self.registry = {}

    def add(self, flag, type=str, default=None, help=None, **kw):
        dest = flag.lstrip("-").replace("-", "_").lower()
        if type is bool:
            self.parser.add_argument(flag, dest=dest, action="store_true", default=None, help=help)
        else:
            self.parser.add_argument(flag, dest=dest, type=type, default=None, help=help, **kw)
        self.registry[dest] = (type, default)


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    cfg = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArgumentError(f"cannot read config {path}: {exc.strerror}") from None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ArgumentError(f"{path}:{n}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        cfg[key.replace("-", "_")] = value
    return cfg


def resolve(args, registry) -> dict:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    unknown = sorted(set(cfg) - set(registry))
    if unknown:
        raise ArgumentError(f"unknown config key(s): {', '.join(unknown)}")
    effective = {}
    for dest, (conv, default) in registry.items():
        value = getattr(args, dest)
        if value is not None:
            effective[dest] = (value, "flag")
        elif dest in cfg:
            try:
                effective[dest] = ((_bool if conv is bool else conv)(cfg[dest]), "config")
            except ValueError as exc:
                raise ArgumentError(f"config key {dest}: {exc}") from None
        else:
            effective[dest] = (default, "default")
    return effective


def _report(command, effective, **body):
    return {
        "format_version": REPORT_FORMAT,
        "command": command,
        "config": {k: {"value": v, "source": s} for k, (v, s) in effective.items()},
        **body,
    }


def _emit(report):
    print(json.dumps(report, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o))


def _writable(path, force):
    path = Path(path)
    if path.exists() and not force:
        raise ArgumentError(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _floats(text, field):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidSpec(field, f"expected comma-separated numbers, got {text!r}") from None


# --- commands ------------------------------------------------------------------


def cmd_gen_bank(cfg):
    acc = _floats(cfg["acc"], "accuracy")
    prior = cfg["prior"]
    if prior in (None, "uniform"):
        prior_vec = None
    elif prior.startswith("afew-"):
        split = prior[5:]
        table = load_split_counts()
        if split not in table:
            raise InvalidSpec("prior", f"unknown split in {prior!r}")
        prior_vec = table[split].tolist()
    else:
        prior_vec = _floats(prior, "prior")
    spec = SynthSpec(
        n_models=cfg["models"],
        n_samples=cfg["samples"],
        accuracy=acc[0] if len(acc) == 1 else acc,
        noise=cfg["noise"],
        sharpness=cfg["sharpness"],
        prior=prior_vec,
        seed=cfg["seed"],
        shared_noise=cfg["shared_noise"],
    )
    bank, gold = gen_bank(spec)
    out = Path(cfg["out_dir"])
    targets = [(out / f"{m.model_id}.csv", m) for m in bank.models] + [(out / "gold.csv", gold)]
    for path, _ in targets:
        _writable(path, cfg["force"])
    for path, obj in targets:
        if obj is gold:
            io.write_gold(path, gold)
        else:
            io.write_scores(path, obj)
    return {"spec": spec.to_dict(), "files": [str(p) for p, _ in targets]}


def cmd_gen_seq(cfg):
    spec = SequenceSpec(
        n_per_class=cfg["per_class"], min_len=cfg["min_len"], max_len=cfg["max_len"],
        dim=cfg["dim"], delta=cfg["delta"], seed=cfg["seed"], noise=cfg["noise"],
    )
    data = gen_sequences(spec)
    out = Path(cfg["out_dir"])
    seq_path = _writable(out / "sequences.csv", cfg["force"])
    lab_path = _writable(out / "labels.csv", cfg["force"])
    io.write_sequences(seq_path, dict(zip(data.ids, data.sequences)))
    io.write_seq_labels(lab_path, data.ids, data.labels)
    return {"spec": vars(spec), "files": [str(seq_path), str(lab_path)]}


def _load_bank(paths, gold_path):
    if not paths:
        raise ArgumentError("no score files given")
    gold = io.read_gold(gold_path)
    if len(gold) == 0:
        raise EmptyInput(f"{gold_path}: no samples")
    models = [io.read_scores(p) for p in paths]
    return align_bank(models, gold), gold


def _parse_weights(text):
    weights = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ArgumentError(f"weights must look like id=value, got {item!r}")
        try:
            weights[key.strip()] = float(value)
        except ValueError:
            raise ArgumentError(f"bad weight {item!r}") from None
    return weights


def cmd_fuse(cfg):
    method = cfg["method"]
    bank, gold = _load_bank(cfg["scores"], cfg["gold"])
    if cfg["k"] < 1:
        raise ArgumentError("--K must be >= 1")
    if cfg["subset"]:
        subset = Subset(s.strip() for s in cfg["subset"].split(",") if s.strip())
    elif method == "weighted" and cfg["weights"]:
        subset = Subset(_parse_weights(cfg["weights"]))
    else:
        subset = Subset(bank.model_ids)
    body = {"method": method, "n_models": len(bank), "n_samples": len(gold)}
    fused, pred = None, None
    if method == "bs":
        res = bs_fusion(bank, gold, cfg["k"])
        fused = res.fused
        body.update(res.to_dict())
        body["score"] = res.val_score
    elif method == "oracle":
        sel, score = exhaustive_oracle(bank, gold, cfg["guard"])
        fused = mean_fuse(bank, sel)
        body.update(selected=list(sel.member_ids), score=score)
    elif method == "mean":
        fused = mean_fuse(bank, subset)
    elif method == "weighted":
        if not cfg["weights"]:
            raise ArgumentError("--weights is required for the weighted method")
        fused = weighted_mean_fuse(bank, subset, _parse_weights(cfg["weights"]))
    else:
        pred = majority_vote(bank, subset)
    if method in ("mean", "weighted", "vote"):
        pred = argmax_predict(fused) if pred is None else pred
        body.update(selected=list(subset.member_ids), score=accuracy(pred, gold.gold))
    if cfg["out"]:
        path = _writable(cfg["out"], cfg["force"])
        if fused is not None:
            io.write_scores(path, fused)
        else:
            path.write_text(io.format_labels(bank.sample_ids, pred), encoding="utf-8")
        body["output"] = str(path)
    return body


def cmd_eval(cfg):
    gold = io.read_gold(cfg["gold"], cfg["split"])
    if len(gold) == 0:
        raise EmptyInput(f"{cfg['gold']}: no samples")
    if bool(cfg["scores"]) == bool(cfg["pred"]):
        raise ArgumentError("give exactly one of --scores or --pred")
    if cfg["scores"]:
        sm = io.read_scores(cfg["scores"])
        pred = argmax_predict(sm.rows_for(gold.sample_ids))
    else:
        p = io.read_gold(cfg["pred"])
        index = dict(zip(p.sample_ids, p.gold))
        missing = [s for s in gold.sample_ids if s not in index]
        if missing:
            raise MissingSample(Path(cfg["pred"]).stem, missing[0])
        pred = np.array([index[s] for s in gold.sample_ids])
    cm = confusion(pred, gold.gold)
    return {
        "n_samples": len(gold),
        "accuracy": accuracy(pred, gold.gold),
        "classes": list(EMOTIONS),
        "counts": cm.counts,
        "row_normalized": cm.row_normalized,
        "table": format_confusion(cm),
    }


def cmd_gradcheck(cfg):
    kinds = KINDS if cfg["kind"] == "all" else (cfg["kind"],)
    results = run_gradcheck(kinds, cfg["seed"], cfg["instances"], cfg["normalize"], cfg["perturb"])
    body = {
        "passed": all(r.passed for r in results),
        "groups": [r.to_dict() for r in results],
        "table": format_table(results),
    }
    return body


def _read_seq_dataset(cfg):
    seqs = io.read_sequences(cfg["sequences"])
    if not seqs:
        raise EmptyInput(f"{cfg['sequences']}: no sequences")
    return seqs


def cmd_pool(cfg):
    seqs = _read_seq_dataset(cfg)
    kind = cfg["kind"]
    ids = list(seqs)
    if kind in ("mean", "max"):
        vecs = [pool(seqs[s], kind) for s in ids]
    else:
        dim = next(iter(seqs.values())).shape[1]
        if cfg["params"]:
            params, _ = io.read_params(cfg["params"])
        else:
            params = ClusterParams.zeros(cfg["clusters"], dim)
        vecs = [aggregate(kind, seqs[s], params, cfg["normalize"]) for s in ids]
    path = _writable(cfg["out"], cfg["force"])
    path.write_text(io.format_vectors(ids, np.stack(vecs), id_name="seq_id"), encoding="utf-8")
    return {"n_sequences": len(ids), "dim": len(vecs[0]), "output": str(path)}


def cmd_windows(cfg):
    seqs = _read_seq_dataset(cfg)
    out = {sid: window_concat(x, cfg["window"], cfg["overlap"]) for sid, x in seqs.items()}
    path = _writable(cfg["out"], cfg["force"])
    io.write_sequences(path, out)
    return {"n_sequences": len(out), "lengths": {s: len(x) for s, x in out.items()}, "output": str(path)}


def cmd_tfidf(cfg):
    lemma = io.read_lemma_map(cfg["lemma_map"]) if cfg["lemma_map"] else {}
    corpus = [normalize_tokens(line, lemma) for line in io.read_corpus(cfg["corpus"])]
    model = build_vocab(corpus, cfg["min_freq"])
    docs = corpus
    if cfg["docs"]:
        docs = [normalize_tokens(line, lemma) for line in io.read_corpus(cfg["docs"])]
    mat = tfidf_matrix(model, docs, cfg["l2"])
    body = {"n_docs": model.n_docs, "vocab": model.tokens, "df": model.df, "idf": model.idf_vector()}
    if cfg["out"]:
        path = _writable(cfg["out"], cfg["force"])
        lines = [",".join(["doc", *model.tokens])]
        lines += [",".join([str(i), *(repr(float(v)) for v in row)]) for i, row in enumerate(mat)]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        body["output"] = str(path)
    else:
        body["weights"] = mat
    return body


def cmd_train_toy(cfg):
    if cfg["sequences"]:
        seqs = _read_seq_dataset(cfg)
        if not cfg["labels"]:
            raise ArgumentError("--labels is required with --sequences")
        labels_by_id = io.read_seq_labels(cfg["labels"])
        missing = [s for s in seqs if s not in labels_by_id]
        if missing:
            raise MissingSample("labels", missing[0])
        sequences = list(seqs.values())
        labels = [labels_by_id[s] for s in seqs]
    else:
        data = gen_sequences(SequenceSpec(
            n_per_class=cfg["per_class"], min_len=cfg["min_len"], max_len=cfg["max_len"],
            dim=cfg["dim"], delta=cfg["delta"], seed=cfg["data_seed"],
        ))
        sequences, labels = data.sequences, data.labels
    if cfg["lr"] < 0:
        raise ArgumentError("--lr must be >= 0")
    res = train_toy(
        cfg["kind"], sequences, labels, epochs=cfg["epochs"], lr=cfg["lr"], seed=cfg["seed"],
        n_clusters=cfg["clusters"], batch_size=cfg["batch_size"] or None, normalize=cfg["normalize"],
    )
    body = res.to_dict()
    if cfg["params_out"]:
        path = _writable(cfg["params_out"], cfg["force"])
        path.write_text(io.params_to_json(res.params, cfg["kind"]), encoding="utf-8")
        body["params_output"] = str(path)
    return body


# --- parser --------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="emofuse", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {}

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="flat key = value file; flags override it")
        p.add_argument("--pretty", action="store_true", help="print a human-readable table instead of JSON")
        opts = _Options(p)
        opts.add("--force", bool, False, help="overwrite existing output files")
        commands[name] = (func, opts.registry)
        p.set_defaults(_command=name)
        return p, opts

    _, o = command("gen-bank", cmd_gen_bank, "write a seeded synthetic score bank and gold file")
    o.add("--models", int, 5)
    o.add("--samples", int, 200)
    o.add("--acc", str, "0.6", help="per-model target accuracy, one value or a comma list")
    o.add("--noise", float, 0.5)
    o.add("--sharpness", float, 4.0)
    o.add("--prior", str, "uniform", help="uniform, afew-{train,val,test}, or 7 comma weights")
    o.add("--shared-noise", float, 0.0)
    o.add("--seed", int, 0)
    o.add("--out-dir", str, "bank")

    _, o = command("gen-seq", cmd_gen_seq, "write a seeded two-class descriptor-sequence dataset")
    o.add("--per-class", int, 40)
    o.add("--min-len", int, 4)
    o.add("--max-len", int, 12)
    o.add("--dim", int, 8)
    o.add("--delta", float, 4.0)
    o.add("--noise", float, 1.0)
    o.add("--seed", int, 0)
    o.add("--out-dir", str, "sequences")

    p, o = command("fuse", cmd_fuse, "fuse score files (beam search, mean, weighted, vote, oracle)")
    p.add_argument("scores", nargs="+", help="score CSV files, one per model")
    o.registry["scores"] = (str, None)
    o.add("--gold", str, None, required=False)
    o.add("--method", str, "bs", choices=["bs", "mean", "weighted", "vote", "oracle"])
    o.add("--K", int, 4)
    o.add("--weights", str, None, help="id=value,... for the weighted method")
    o.add("--subset", str, None, help="comma-separated model ids (default: all)")
    o.add("--guard", int, 16)
    o.add("--out", str, None)

    _, o = command("eval", cmd_eval, "accuracy and confusion matrix against a gold file")
    o.add("--gold", str, None)
    o.add("--scores", str, None)
    o.add("--pred", str, None)
    o.add("--split", str, "test", choices=["train", "val", "test"])

    p, o = command("gradcheck", cmd_gradcheck, "finite-difference check of aggregation gradients")
    o.add("--kind", str, "all", choices=["all", *KINDS])
    o.add("--seed", int, 0)
    o.add("--instances", int, 20)
    o.add("--normalize", bool, False)
    p.add_argument("--perturb", dest="perturb", type=float, default=None, help=argparse.SUPPRESS)
    o.registry["perturb"] = (float, 0.0)

    _, o = command("pool", cmd_pool, "pool each sequence into one vector")
    o.add("--sequences", str, None)
    o.add("--kind", str, "mean", choices=["mean", "max", *KINDS])
    o.add("--params", str, None, help="parameter checkpoint JSON")
    o.add("--clusters", int, 1, help="cluster count when no checkpoint is given (zero init)")
    o.add("--normalize", bool, False)
    o.add("--out", str, None)

    _, o = command("windows", cmd_windows, "concatenate frames in sliding windows")
    o.add("--sequences", str, None)
    o.add("--window", int, 2)
    o.add("--overlap", int, 0)
    o.add("--out", str, None)

    _, o = command("tfidf", cmd_tfidf, "fit TF-IDF on a corpus and transform documents")
    o.add("--corpus", str, None)
    o.add("--docs", str, None, help="documents to transform (default: the corpus)")
    o.add("--min-freq", int, 3)
    o.add("--lemma-map", str, None)
    o.add("--l2", bool, False)
    o.add("--out", str, None)

    _, o = command("train-toy", cmd_train_toy, "train an aggregation layer and linear head on a toy task")
    o.add("--kind", str, "netvlad", choices=list(KINDS))
    o.add("--sequences", str, None)
    o.add("--labels", str, None)
    o.add("--per-class", int, 40)
    o.add("--min-len", int, 4)
    o.add("--max-len", int, 12)
    o.add("--dim", int, 8)
    o.add("--delta", float, 4.0)
    o.add("--data-seed", int, 2018)
    o.add("--seed", int, 0)
    o.add("--epochs", int, 10)
    o.add("--lr", float, 0.01)
    o.add("--clusters", int, 4)
    o.add("--batch-size", int, 0, help="0 means full batch")
    o.add("--normalize", bool, False)
    o.add("--params-out", str, None)

    return parser, commands


_REQUIRED = {
    "fuse": ("gold",),
    "eval": ("gold",),
    "pool": ("sequences", "out"),
    "windows": ("sequences", "out"),
    "tfidf": ("corpus",),
}


def _pretty(name, body):
    if name == "eval":
        return f"accuracy: {body['accuracy']:.4f} (n = {body['n_samples']})\n{body['table']}"
    if name == "gradcheck":
        return body["table"]
    if name in ("fuse",) and "selected" in body:
        return f"method: {body['method']}\nselected: {', '.join(body['selected'])}\nscore: {body['score']:.4f}"
    return None


def main(argv=None):
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    name = args._command
    func, registry = commands[name]
    try:
        cfg = resolve(args, registry)
        values = {k: v for k, (v, _) in cfg.items()}
        for key in _REQUIRED.get(name, ()):
            if not values.get(key):
                raise ArgumentError(f"--{key.replace('_', '-')} is required")
        body = func(values)
        report = _report(name, cfg, **body)
        text = _pretty(name, report) if args.pretty else None
        if text is None:
            _emit(report)
        else:
            print(text)
        if name == "gradcheck" and not body["passed"]:
            worst = max(
                (g for g in body["groups"] if not g["passed"]),
                key=lambda g: g["worst"]["rel_error"],
            )
            w = worst["worst"]
            print(
                f"gradcheck failed: {worst['kind']}/{worst['group']} instance {w['instance']} "
                f"index {w['index']}: analytic {w['analytic']:.10g} vs numeric {w['numeric']:.10g} "
                f"(rel error {w['rel_error']:.3e})",
                file=sys.stderr,
            )
            return EXIT_CHECK
        return EXIT_OK
    except InvalidSpec as exc:
        flag = _FIELD_FLAGS.get(exc.field, exc.field)
        print(f"emofuse {name}: error: {exc} ({flag})", file=sys.stderr)
        return EXIT_ARGS
    except ArgumentError as exc:
        print(f"emofuse {name}: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except DataError as exc:
        print(f"emofuse {name}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"emofuse {name}: error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
