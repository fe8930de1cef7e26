"""File formats: token corpora, regression tables, and result documents.

Corpus files carry one token per line as ``doc_id<TAB>word_id``; vocabulary
and document counts are inferred.  Regression data are CSV with columns
``x_1..x_p, y``.  All emitted CSV is UTF-8 with LF line endings and a header
row, and JSON documents are written with sorted keys, so reruns are
byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .data import Dataset

__all__ = [
    "load_corpus_tsv",
    "save_corpus_tsv",
    "load_regression_csv",
    "save_regression_csv",
    "write_csv",
    "write_json",
]


def load_corpus_tsv(path) -> Dataset:
    path = Path(path)
    doc_ids, word_ids = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected doc_id<TAB>word_id")
            try:
                doc_ids.append(int(parts[0]))
                word_ids.append(int(parts[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer token record") from exc
    if not doc_ids:
        raise ValueError(f"{path}: empty corpus")
    return Dataset.from_tokens(np.array(doc_ids), np.array(word_ids))


def save_corpus_tsv(corpus: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for d, w in zip(corpus.doc_ids, corpus.word_ids):
            fh.write(f"{d}\t{w}\n")


def load_regression_csv(path) -> Dataset:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[-1] != "y" or not all(
            name == f"x_{i + 1}" for i, name in enumerate(header[:-1])
        ):
            raise ValueError(f"{path}: expected header x_1..x_p,y")
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    return Dataset.from_regression(arr[:, :-1], arr[:, -1])


def save_regression_csv(data: Dataset, path) -> None:
    p = data.X.shape[1]
    header = [f"x_{i + 1}" for i in range(p)] + ["y"]
    rows = [list(x) + [yv] for x, yv in zip(data.X, data.y)]
    write_csv(path, header, rows)


def write_csv(path, header: list[str], rows) -> None:
    """CSV with stable formatting: header row, LF endings, shortest-repr floats."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in writer_rows(rows):
            writer.writerow(row)


def writer_rows(rows):
    for row in rows:
        yield [_format(v) for v in row]


def _format(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def write_json(path, document: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")
