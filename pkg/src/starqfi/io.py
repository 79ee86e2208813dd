"""JSON/CSV serialization and the tomography-unitary cache."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .tomography import OptimizerConfig, TomographyUnitary, optimize_ut

__all__ = [
    "SCHEMA_VERSION",
    "PACKAGED_CACHE",
    "to_plain",
    "dumps_json",
    "dumps_csv",
    "write_atomic",
    "ut_cache_key",
    "load_cached_ut",
    "save_ut",
    "get_or_optimize_ut",
]

SCHEMA_VERSION = "1"
PACKAGED_CACHE = Path(__file__).parent / "data"


def to_plain(obj):
    """Recursively convert numpy scalars/arrays and dataclass-likes to JSON types; non-finite floats become None."""
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_json(meta, data):
    # float repr is the shortest string that round-trips exactly
    return json.dumps({"meta": to_plain(meta), "data": to_plain(data)}, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _flatten(record, prefix=""):
    out = {}
    for k, v in record.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def dumps_csv(rows):
    """CSV with a header naming every column; nested values are flattened with dots."""
    rows = [_flatten(to_plain(r)) for r in rows]
    columns = []
    for r in rows:
        for k in r:
            if k not in columns:
                columns.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r.get(k) is None else repr(r[k]) if isinstance(r.get(k), float) else r[k]) for k in columns})
    return buf.getvalue()


def write_atomic(path, text):
    """Write via a temporary file and rename, so failures leave no partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def ut_cache_key(n_qubits, opt):
    return f"ut_n{n_qubits}_seed{opt.seed}_{opt.digest()}.json"


def load_cached_ut(config, opt, cache_dir=None):
    """Look in ``cache_dir`` first, then in the packaged cache."""
    key = ut_cache_key(config.n_qubits, opt)
    for directory in (cache_dir, PACKAGED_CACHE):
        if directory is None:
            continue
        path = Path(directory) / key
        if path.is_file():
            data = json.loads(path.read_text())
            return TomographyUnitary.from_dict(data["ut"], config)
    return None


def save_ut(ut, opt, cache_dir):
    key = ut_cache_key(ut.n_qubits, opt)
    payload = {"optimizer": {k: v for k, v in vars(opt).items() if k != "threads"}, "ut": ut.to_dict()}
    path = Path(cache_dir) / key
    write_atomic(path, json.dumps(to_plain(payload), indent=2, sort_keys=True) + "\n")
    return path


def get_or_optimize_ut(config, opt=None, cache_dir=None):
    """Replay a cached tomography unitary if available; otherwise optimize (and cache if ``cache_dir``)."""
    opt = opt or OptimizerConfig()
    ut = load_cached_ut(config, opt, cache_dir)
    if ut is not None:
        return ut
    ut = optimize_ut(config, opt)
    if cache_dir is not None:
        save_ut(ut, opt, cache_dir)
    return ut
