"""Text file formats: word maps, label maps (PGM), model snapshots, path and result CSVs.

Every writer takes ``comments``: lines written as ``# ...`` after the magic
line, used to embed the resolved run config. Readers keep the comments so
that load followed by save reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io as _io
import math

import numpy as np

from .evaluation import RESULT_COLUMNS, LabelMap
from .grid import GridWorld
from .topic_model import Hyperparams, ModelSnapshot

MODEL_MAGIC = "ROSTMODEL"
MODEL_VERSION = 1


class FormatError(ValueError):
    pass


def _comment_lines(comments) -> str:
    return "".join(f"# {c}\n" if c else "#\n" for c in (comments or []))


def _split(text: str):
    """Separate ``# `` comment lines from data lines (blank lines dropped)."""
    comments, data = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            comments.append(line[2:] if line.startswith("# ") else line[1:])
        elif line.strip():
            data.append(line)
    return comments, data


def format_config(cfg: dict) -> list:
    return [f"{k}={v}" for k, v in cfg.items()]


def parse_config(comments) -> dict:
    out = {}
    for c in comments:
        if "=" in c:
            k, v = c.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def _read(path) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


# -- word map -------------------------------------------------------------

def dumps_wordmap(world: GridWorld, comments=None) -> str:
    lines = [f"WORDMAP {world.width} {world.height} {world.vocab_size}\n", _comment_lines(comments)]
    for toks in world.cells:
        lines.append(" ".join([str(toks.size), *map(str, toks.tolist())]) + "\n")
    return "".join(lines)


def loads_wordmap(text: str):
    """Returns (GridWorld, comments)."""
    comments, data = _split(text)
    if not data:
        raise FormatError("empty word map")
    head = data[0].split()
    if len(head) != 4 or head[0] != "WORDMAP":
        raise FormatError(f"bad word map header: {data[0]!r}")
    W, H, V = map(int, head[1:])
    rows = data[1:]
    if len(rows) != W * H:
        raise FormatError(f"expected {W * H} cell lines, got {len(rows)}")
    cells = []
    for r, line in enumerate(rows):
        vals = [int(x) for x in line.split()]
        if not vals or vals[0] != len(vals) - 1:
            raise FormatError(f"cell line {r}: count does not match token list")
        cells.append(np.array(vals[1:], dtype=np.int32))
    return GridWorld(W, H, V, cells=cells), comments


def save_wordmap(path, world: GridWorld, comments=None) -> None:
    _write(path, dumps_wordmap(world, comments))


def load_wordmap(path):
    return loads_wordmap(_read(path))


# -- label map (plain PGM) ------------------------------------------------

def dumps_labelmap(labels: LabelMap, K: int | None = None, comments=None) -> str:
    """Plain P2 graymap, maxval K-1 (at least 1 as PGM requires), one row per line."""
    top = int(labels.labels.max()) if labels.labels.size else 0
    maxval = max((K - 1) if K is not None else top, top, 1)
    out = ["P2\n", _comment_lines(comments), f"{labels.width} {labels.height}\n", f"{maxval}\n"]
    grid = labels.labels.reshape(labels.height, labels.width)
    for row in grid:
        out.append(" ".join(map(str, row.tolist())) + "\n")
    return "".join(out)


def loads_labelmap(text: str):
    """Returns (LabelMap, maxval, comments)."""
    comments, data = _split(text)
    tokens = " ".join(data).split()
    if not tokens or tokens[0] != "P2":
        raise FormatError("not a plain PGM (P2) file")
    try:
        W, H, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
        vals = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed PGM: {exc}") from None
    if vals.size != W * H:
        raise FormatError(f"expected {W * H} labels, got {vals.size}")
    if vals.size and vals.max() > maxval:
        raise FormatError("label exceeds maxval")
    return LabelMap(W, H, vals), maxval, comments


def save_labelmap(path, labels: LabelMap, K: int | None = None, comments=None) -> None:
    _write(path, dumps_labelmap(labels, K, comments))


def load_labelmap(path):
    return loads_labelmap(_read(path))


# -- model snapshot -------------------------------------------------------

def dumps_model(model, comments=None) -> str:
    h = model.hyper
    out = [f"{MODEL_MAGIC} {MODEL_VERSION}\n", _comment_lines(comments),
           f"{h.K} {h.V} {h.alpha!r} {h.beta!r} {h.delta}\n"]
    for row in np.asarray(model.nwk, dtype=np.int64):
        out.append(" ".join(map(str, row.tolist())) + "\n")
    return "".join(out)


def loads_model(text: str, tau: float = 0.5):
    """Returns (ModelSnapshot, comments)."""
    comments, data = _split(text)
    if not data or data[0].split() != [MODEL_MAGIC, str(MODEL_VERSION)]:
        raise FormatError("not a version-1 model snapshot")
    try:
        k, v, a, b, d = data[1].split()
        hyper = Hyperparams(K=int(k), V=int(v), alpha=float(a), beta=float(b), delta=int(d), tau=tau)
    except (IndexError, ValueError) as exc:
        raise FormatError(f"bad model header: {exc}") from None
    rows = data[2:]
    if len(rows) != hyper.K:
        raise FormatError(f"expected {hyper.K} count rows, got {len(rows)}")
    nwk = np.array([[int(x) for x in r.split()] for r in rows], dtype=np.int64)
    if nwk.shape != (hyper.K, hyper.V) or (nwk < 0).any():
        raise FormatError("count matrix must be K x V non-negative integers")
    return ModelSnapshot(hyper, nwk), comments


def save_model(path, model, comments=None) -> None:
    _write(path, dumps_model(model, comments))


def load_model(path, tau: float = 0.5):
    return loads_model(_read(path), tau)


# -- CSVs -----------------------------------------------------------------

def dumps_path(path, comments=None) -> str:
    buf = _io.StringIO()
    buf.write(_comment_lines(comments))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y"])
    for t, c in path.steps:
        w.writerow([t, c[0], c[1]])
    return buf.getvalue()


def loads_path(text: str):
    """Returns (list of (t, x, y), comments)."""
    comments, data = _split(text)
    rows = list(csv.reader(data))
    if not rows or rows[0] != ["t", "x", "y"]:
        raise FormatError("path CSV must start with header t,x,y")
    return [tuple(int(v) for v in r) for r in rows[1:]], comments


def save_path(path_file, path, comments=None) -> None:
    _write(path_file, dumps_path(path, comments))


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def dumps_results(rows, comments=None, wall_clock: bool = True) -> str:
    buf = _io.StringIO()
    buf.write(_comment_lines(comments))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) if (c != "wall_ms" or wall_clock) else "0"
                    for c in RESULT_COLUMNS])
    return buf.getvalue()


def loads_results(text: str) -> list:
    _, data = _split(text)
    reader = csv.DictReader(data)
    if reader.fieldnames != RESULT_COLUMNS:
        raise FormatError(f"results header must be {RESULT_COLUMNS}")
    out = []
    for r in reader:
        out.append({
            "world_id": r["world_id"], "policy": r["policy"], "length": int(r["length"]),
            "restart_seed": int(r["restart_seed"]),
            "mi_vs_truth_bits": float(r["mi_vs_truth_bits"]),
            "mi_vs_batch_bits": float(r["mi_vs_batch_bits"]),
            "h_truth_bits": float(r["h_truth_bits"]), "wall_ms": float(r["wall_ms"]),
        })
    return out
