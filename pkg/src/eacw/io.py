"""JSON/CSV import and export with field-level diagnostics."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .channels import Channel, ChannelSet, choi
from .linalg import ValidationError

SIG = 12


def fmt(x: float) -> str:
    return f"{x:.{SIG}g}"


def round_floats(obj):
    """Round every float in a nested structure to 12 significant digits."""
    if isinstance(obj, (float, np.floating)):
        return float(fmt(float(obj)))
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist())
    if isinstance(obj, (np.integer, np.bool_)):
        return obj.item()
    return obj


def dumps(obj) -> str:
    return json.dumps(round_floats(obj), indent=2)


# --------------------------------------------------------------------------
# matrices

def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def vector_to_json(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def _matrix_from_json(obj, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != rows:
        raise ValidationError(f"{where}: expected {rows} rows, got {_describe(obj)}")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise ValidationError(f"{where}[{i}]: expected {cols} entries, got {_describe(row)}")
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in z)):
                raise ValidationError(f"{where}[{i}][{j}]: expected [re, im], got {z!r}")
            out[i, j] = complex(z[0], z[1])
    if not np.all(np.isfinite(out)):
        raise ValidationError(f"{where}: non-finite entries")
    return out


def _describe(obj) -> str:
    return f"list of length {len(obj)}" if isinstance(obj, list) else type(obj).__name__


def _dim(obj: dict, key: str, where: str) -> int:
    if key not in obj:
        raise ValidationError(f"{where}: missing field {key!r}")
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ValidationError(f"{where}.{key}: expected a positive integer, got {v!r}")
    return v


# --------------------------------------------------------------------------
# channels

def channel_to_json(ch: Channel) -> dict:
    return {"dim_in": ch.dim_in, "dim_out": ch.dim_out, "kraus": [matrix_to_json(k) for k in ch.kraus]}


def channel_from_json(obj, where: str = "channel", name: str = "") -> Channel:
    """Parse and validate a Channel; complete positivity is checked on the Choi matrix."""
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: expected an object, got {type(obj).__name__}")
    d_in, d_out = _dim(obj, "dim_in", where), _dim(obj, "dim_out", where)
    kraus = obj.get("kraus")
    if not isinstance(kraus, list) or not kraus:
        raise ValidationError(f"{where}.kraus: expected a nonempty list of matrices")
    ops = np.array([_matrix_from_json(k, d_out, d_in, f"{where}.kraus[{i}]") for i, k in enumerate(kraus)])
    try:
        ch = Channel(ops, name=name)
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None
    w = np.linalg.eigvalsh(choi(ch))
    if w[0] < -1e-9:
        raise ValidationError(f"{where}: Choi matrix not positive semidefinite (min eigenvalue {w[0]:.3g})")
    return ch


def channel_set_to_json(cs: ChannelSet) -> dict:
    return {"labels": list(cs.labels), "channels": [channel_to_json(c) for c in cs.channels]}


def channel_set_from_json(obj, where: str = "$") -> ChannelSet:
    """Accept a ChannelSet object, or a bare Channel object as a singleton set."""
    if isinstance(obj, dict) and "kraus" in obj:
        return ChannelSet((channel_from_json(obj, where, "0"),), ("0",))
    if not isinstance(obj, dict) or "channels" not in obj:
        raise ValidationError(f"{where}: expected a channel set with a 'channels' field")
    chans = obj["channels"]
    if not isinstance(chans, list) or not chans:
        raise ValidationError(f"{where}.channels: expected a nonempty list")
    labels = obj.get("labels", [str(i) for i in range(len(chans))])
    if not isinstance(labels, list) or len(labels) != len(chans) or not all(isinstance(x, str) for x in labels):
        raise ValidationError(f"{where}.labels: expected {len(chans)} strings")
    parsed = tuple(channel_from_json(c, f"{where}.channels[{i}]", labels[i]) for i, c in enumerate(chans))
    try:
        return ChannelSet(parsed, tuple(labels))
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None


def read_json(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load_channel_set(path) -> ChannelSet:
    try:
        return channel_set_from_json(read_json(path), where=str(path))
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None


def save_channel_set(cs: ChannelSet, path) -> None:
    Path(path).write_text(json.dumps(channel_set_to_json(cs)))


# --------------------------------------------------------------------------
# codes and reports

def code_to_json(code) -> dict:
    """Resource amplitudes, encoder Kraus lists and POVM matrices of an EACode."""
    return {
        "n": code.n, "M": code.M, "L": code.L,
        "dim_a": code.dim_a, "dim_b": code.dim_b,
        "resource": vector_to_json(code.resource),
        "encoders": [[matrix_to_json(k) for k in e.kraus] for e in code.encoders],
        "povm": [matrix_to_json(d) for d in code.povm],
    }


REPORT_FIELDS = ["n", "M", "L", "label", "average", "maximal"]


def csv_text(rows: list[dict], fields: list[str] | None = None) -> str:
    fields = fields or list(rows[0])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: fmt(v) if isinstance(v, (float, np.floating)) else v for k, v in r.items()})
    return buf.getvalue()


def report_rows(report, n: int, m: int, l: int, labels=None) -> list[dict]:
    rows = []
    for idx, (avg, mx) in report.by_index.items():
        if labels is not None and not isinstance(idx, tuple):
            label = labels[idx]
        elif isinstance(idx, tuple):
            label = "-".join(str(labels[i]) if labels else str(i) for i in idx)
        else:
            label = str(idx)
        rows.append({"n": n, "M": m, "L": l, "label": label, "average": avg, "maximal": mx})
    return rows
