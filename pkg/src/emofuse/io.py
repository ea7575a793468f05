"""Readers and writers for the on-disk formats.

Score file   ``sample_id,angry,disgust,fear,happy,neutral,sad,surprise``
Gold file    ``sample_id,label`` (label is the lowercase class name)
Sequences    ``seq_id,t,f0,...,f{D-1}``
Seq labels   ``seq_id,label`` (integer class)
Corpus       one document per line
Embeddings   ``token v1 v2 ... vD`` per line
Lemma map    ``surface,prototype``
Params       JSON with ``format_version`` and explicit array shapes

All text is UTF-8 with LF line endings; floats are written with ``repr`` so
they round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .aggregation import ClusterParams
from .core import EMOTIONS, LabeledSet, ScoreMatrix, label_index, label_name
from .errors import FormatError

SCORE_HEADER = ["sample_id", *EMOTIONS]
GOLD_HEADER = ["sample_id", "label"]
PARAMS_FORMAT = "emofuse.params/1"


def _fmt(x) -> str:
    return repr(float(x))


def _read_rows(path):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
    if not rows:
        raise FormatError(f"{path}: empty file")
    return rows[0], rows[1:]


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _float(value, where):
    try:
        return float(value)
    except ValueError:
        raise FormatError(f"{where}: not a number: {value!r}") from None


def read_scores(path, model_id: str | None = None) -> ScoreMatrix:
    """Load a score file; the model id defaults to the file stem."""
    path = Path(path)
    header, rows = _read_rows(path)
    if header != SCORE_HEADER:
        raise FormatError(f"{path}: header must be {','.join(SCORE_HEADER)}")
    ids, values = [], []
    for n, row in enumerate(rows, start=2):
        if len(row) != len(SCORE_HEADER):
            raise FormatError(f"{path}:{n}: expected {len(SCORE_HEADER)} fields")
        ids.append(row[0])
        values.append([_float(v, f"{path}:{n}") for v in row[1:]])
    scores = np.array(values, dtype=np.float64).reshape(len(ids), len(EMOTIONS))
    return ScoreMatrix(model_id or path.stem, ids, scores)


def format_scores(sm: ScoreMatrix) -> str:
    lines = [",".join(SCORE_HEADER)]
    for sid, row in zip(sm.sample_ids, sm.scores):
        lines.append(",".join([sid, *(_fmt(v) for v in row)]))
    return "\n".join(lines) + "\n"


def write_scores(path, sm: ScoreMatrix):
    _write(path, format_scores(sm))


def read_gold(path, split_tag: str = "val") -> LabeledSet:
    path = Path(path)
    header, rows = _read_rows(path)
    if header != GOLD_HEADER:
        raise FormatError(f"{path}: header must be {','.join(GOLD_HEADER)}")
    ids, labels = [], []
    for n, row in enumerate(rows, start=2):
        if len(row) != 2:
            raise FormatError(f"{path}:{n}: expected 2 fields")
        ids.append(row[0])
        labels.append(label_index(row[1]))
    return LabeledSet(ids, np.array(labels, dtype=np.int64), split_tag)


def format_labels(ids, labels) -> str:
    lines = [",".join(GOLD_HEADER)]
    lines += [f"{sid},{label_name(int(y))}" for sid, y in zip(ids, labels)]
    return "\n".join(lines) + "\n"


def write_gold(path, gold: LabeledSet):
    _write(path, format_labels(gold.sample_ids, gold.gold))


def read_sequences(path) -> dict:
    """``{seq_id: (L, D) array}`` in first-appearance order, frames sorted by ``t``."""
    path = Path(path)
    header, rows = _read_rows(path)
    dim = len(header) - 2
    if header[:2] != ["seq_id", "t"] or header[2:] != [f"f{j}" for j in range(dim)] or dim < 1:
        raise FormatError(f"{path}: header must be seq_id,t,f0..f{{D-1}}")
    frames: dict = {}
    for n, row in enumerate(rows, start=2):
        if len(row) != dim + 2:
            raise FormatError(f"{path}:{n}: expected {dim + 2} fields")
        try:
            t = int(row[1])
        except ValueError:
            raise FormatError(f"{path}:{n}: time index must be an integer") from None
        frames.setdefault(row[0], []).append((t, [_float(v, f"{path}:{n}") for v in row[2:]]))
    out = {}
    for sid, items in frames.items():
        items.sort(key=lambda p: p[0])
        ts = [t for t, _ in items]
        if len(set(ts)) != len(ts):
            raise FormatError(f"{path}: sequence {sid!r} repeats a time index")
        out[sid] = np.array([v for _, v in items], dtype=np.float64)
    return out


def format_sequences(seqs: dict) -> str:
    dims = {np.asarray(x).shape[1] for x in seqs.values()}
    if len(dims) != 1:
        raise FormatError("all sequences in one file must share a dimension")
    dim = dims.pop()
    lines = [",".join(["seq_id", "t", *(f"f{j}" for j in range(dim))])]
    for sid, x in seqs.items():
        for t, frame in enumerate(np.asarray(x)):
            lines.append(",".join([sid, str(t), *(_fmt(v) for v in frame)]))
    return "\n".join(lines) + "\n"


def write_sequences(path, seqs: dict):
    _write(path, format_sequences(seqs))


def read_seq_labels(path) -> dict:
    path = Path(path)
    header, rows = _read_rows(path)
    if header != ["seq_id", "label"]:
        raise FormatError(f"{path}: header must be seq_id,label")
    try:
        return {r[0]: int(r[1]) for r in rows}
    except (ValueError, IndexError):
        raise FormatError(f"{path}: labels must be integers") from None


def write_seq_labels(path, ids, labels):
    lines = ["seq_id,label", *(f"{sid},{int(y)}" for sid, y in zip(ids, labels))]
    _write(path, "\n".join(lines) + "\n")


def format_vectors(ids, vectors, id_name="id", prefix="v") -> str:
    vectors = np.asarray(vectors)
    lines = [",".join([id_name, *(f"{prefix}{j}" for j in range(vectors.shape[1]))])]
    for sid, v in zip(ids, vectors):
        lines.append(",".join([str(sid), *(_fmt(x) for x in v)]))
    return "\n".join(lines) + "\n"


def read_corpus(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return fh.read().splitlines()


def read_embeddings(path) -> dict:
    table, dim = {}, None
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            vec = np.array([_float(v, f"{path}:{n}") for v in parts[1:]])
            if dim is None:
                dim = vec.size
            if vec.size != dim or dim == 0:
                raise FormatError(f"{path}:{n}: expected {dim} values")
            if not np.all(np.isfinite(vec)):
                raise FormatError(f"{path}:{n}: non-finite value")
            table[parts[0]] = vec
    return table


def read_lemma_map(path) -> dict:
    header, rows = _read_rows(path)
    if header != ["surface", "prototype"]:
        raise FormatError(f"{path}: header must be surface,prototype")
    return {r[0].lower(): r[1].lower() for r in rows if len(r) == 2}


def params_to_json(params: ClusterParams, kind: str | None = None) -> str:
    doc = {"format_version": PARAMS_FORMAT, "kind": kind, **params.to_dict()}
    return json.dumps(doc, indent=2) + "\n"


def read_params(path) -> tuple[ClusterParams, str | None]:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    if doc.get("format_version") != PARAMS_FORMAT:
        raise FormatError(f"{path}: unsupported format_version {doc.get('format_version')!r}")
    try:
        return ClusterParams.from_dict(doc), doc.get("kind")
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad parameter block: {exc}") from None
