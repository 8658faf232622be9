"""Microcensus CSV, chain CSV and run-manifest files."""
from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from .._fmt import fmt_num
from ..errors import IoFailure, SchemaError
from .fit import Chain
from .model import Microcensus

BASE_COLUMNS = ["loc_id", "t", "r", "s", "l", "A", "N"]
_NAME_RE = re.compile(r"^(alpha0|alpha_[trsl]\[\d+\]|beta\[\d+\]|sigma\[\d+\])$")


def dataset_csv(data: Microcensus) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BASE_COLUMNS + [f"x{k + 1}" for k in range(data.K)])
    for i in range(len(data)):
        n = int(data.N[i])
        w.writerow(
            [data.loc_ids[i], *map(int, data.keys[i]), fmt_num(data.A[i]), "" if n < 0 else n]
            + [fmt_num(v) for v in data.X[i]]
        )
    return buf.getvalue()


def read_dataset_csv(source, levels=None) -> Microcensus:
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty microcensus file") from None
    if header[:7] != BASE_COLUMNS:
        raise SchemaError(f"microcensus header must start with {','.join(BASE_COLUMNS)}")
    xcols = header[7:]
    if xcols != [f"x{k + 1}" for k in range(len(xcols))]:
        raise SchemaError("covariate columns must be x1..xK in order")
    ids, keys, A, N, X = [], [], [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} fields, found {len(row)}")
        try:
            ids.append(row[0])
            keys.append([int(v) for v in row[1:5]])
            A.append(float(row[5]))
            N.append(-1 if row[6] == "" else int(row[6]))
            X.append([float(v) for v in row[7:]])
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    K = len(xcols)
    return Microcensus(
        np.asarray(keys, dtype=np.int64).reshape(-1, 4),
        np.asarray(X, dtype=np.float64).reshape(-1, K),
        A,
        N,
        levels=levels,
        loc_ids=ids,
    )


def chain_csv(chain: Chain) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(chain.names + ["log_joint"])
    for row, lj in zip(chain.samples, chain.log_joint):
        w.writerow([fmt_num(v) for v in row] + [fmt_num(lj)])
    return buf.getvalue()


def chain_manifest(chain: Chain, extra=None) -> dict:
    doc = {
        "seed": chain.seed,
        "draws": chain.draws,
        "burn_in": chain.burn_in,
        "acceptance_rate": chain.acceptance_rate,
        "latent_acceptance_rate": chain.latent_acceptance_rate,
        "levels": list(chain.levels),
        "K": chain.K,
        "n_sigma": chain.n_sigma,
        "hyper_sds": [float(v) for v in chain.hyper_sds],
        "step_scale": chain.step_scale,
    }
    if extra:
        doc.update(extra)
    return doc


def _count_prefix(names, prefix):
    return sum(1 for n in names if n.startswith(prefix))


def read_chain_csv(source, manifest=None) -> Chain:
    """Rebuild a Chain; structure comes from the column names."""
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty chain file") from None
    if not header or header[-1] != "log_joint":
        raise SchemaError("chain CSV must end with a log_joint column")
    names = header[:-1]
    if not names or names[0] != "alpha0" or not all(_NAME_RE.match(n) for n in names):
        raise SchemaError("unrecognised chain columns")
    rows = [r for r in reader if r]
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=np.float64).reshape(-1, len(header))
    except ValueError as exc:
        raise SchemaError(f"non-numeric chain value: {exc}") from None
    levels = tuple(_count_prefix(names, f"alpha_{f}[") for f in "trsl")
    K = _count_prefix(names, "beta[")
    n_sigma = _count_prefix(names, "sigma[")
    m = manifest or {}
    return Chain(
        samples=data[:, :-1],
        names=names,
        log_joint=data[:, -1],
        seed=int(m.get("seed", 0)),
        acceptance_rate=float(m.get("acceptance_rate", float("nan"))),
        latent_acceptance_rate=float(m.get("latent_acceptance_rate", float("nan"))),
        draws=data.shape[0],
        burn_in=int(m.get("burn_in", 0)),
        levels=levels,
        K=K,
        n_sigma=n_sigma,
        hyper_sds=np.asarray(m.get("hyper_sds", [1.0] * 4), dtype=np.float64),
    )


def write_text(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc.strerror or exc}") from None


def read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}") from None


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
