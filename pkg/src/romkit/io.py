"""Binary and JSON state files, plus overlap dump records.

``.qdm``: b"QDM1", u32 n, 4^n (re, im) f64 pairs, row-major density matrix.
``.qpv``: b"QPV1", u32 n, 4^n f64 Pauli-vector entries.
JSON: ``{"n": n, "entries": [...]}`` where entries are numbers (Pauli vector)
or ``[re, im]`` pairs (density matrix, row-major); accepted for n <= 6.
All binary data is little-endian.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .pauli import MAX_DENSE_QUBITS, MAX_VECTOR_QUBITS, num_qubits

QDM_MAGIC = b"QDM1"
QPV_MAGIC = b"QPV1"
HEADER = struct.Struct("<4sI")
JSON_QUBITS = 6

OVERLAP_RECORD = np.dtype([("block", "<u8"), ("delta", "<u4"), ("overlap", "<f8")])


def _dense_qubits(rho: np.ndarray) -> int:
    d = rho.shape[0]
    if rho.ndim != 2 or rho.shape != (d, d) or d < 2 or d & (d - 1):
        raise FormatError("density matrix must be square with a power-of-two dimension")
    return d.bit_length() - 1


def encode_qpv(b) -> bytes:
    b = np.asarray(b, dtype="<f8")
    return HEADER.pack(QPV_MAGIC, num_qubits(b)) + b.tobytes()


def encode_qdm(rho) -> bytes:
    rho = np.asarray(rho, dtype=np.complex128)
    n = _dense_qubits(rho)
    pairs = np.empty((rho.size, 2), dtype="<f8")
    pairs[:, 0] = rho.real.reshape(-1)
    pairs[:, 1] = rho.imag.reshape(-1)
    return HEADER.pack(QDM_MAGIC, n) + pairs.tobytes()


def decode(data: bytes) -> tuple[str, np.ndarray]:
    """Parse a binary state; returns ``("qpv", b)`` or ``("qdm", rho)``."""
    if len(data) < HEADER.size:
        raise FormatError(f"truncated header at offset {len(data)} (need {HEADER.size} bytes)")
    magic, n = HEADER.unpack_from(data)
    if magic == QPV_MAGIC:
        kind, cap, width = "qpv", MAX_VECTOR_QUBITS, 8
    elif magic == QDM_MAGIC:
        kind, cap, width = "qdm", MAX_DENSE_QUBITS, 16
    else:
        raise FormatError(f"bad magic {magic!r} at offset 0")
    if not 1 <= n <= cap:
        raise FormatError(f"qubit count {n} out of range at offset 4")
    need = HEADER.size + width * 4**n
    if len(data) != need:
        what = "truncated payload" if len(data) < need else "trailing bytes"
        raise FormatError(f"{what} at offset {min(len(data), need)}: expected {need} bytes, got {len(data)}")
    payload = np.frombuffer(data, dtype="<f8", offset=HEADER.size).astype(float)
    if kind == "qpv":
        return kind, payload
    d = 1 << n
    return kind, (payload[0::2] + 1j * payload[1::2]).reshape(d, d)


def decode_json(text: str) -> tuple[str, np.ndarray]:
    try:
        obj = json.loads(text)
        n = int(obj["n"])
        entries = obj["entries"]
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"malformed JSON state: {exc}") from None
    if not 1 <= n <= JSON_QUBITS:
        raise FormatError(f"JSON states are accepted for 1 <= n <= {JSON_QUBITS}")
    arr = np.asarray(entries, dtype=float)
    if arr.shape == (4**n,):
        return "qpv", arr
    if arr.shape == (4**n, 2):
        d = 1 << n
        return "qdm", (arr[:, 0] + 1j * arr[:, 1]).reshape(d, d)
    raise FormatError(f"JSON entries have shape {arr.shape}, expected ({4**n},) or ({4**n}, 2)")


def encode_json(kind: str, arr) -> str:
    if kind == "qpv":
        b = np.asarray(arr, dtype=float)
        return json.dumps({"n": num_qubits(b), "entries": b.tolist()})
    rho = np.asarray(arr, dtype=np.complex128)
    pairs = np.stack([rho.real.reshape(-1), rho.imag.reshape(-1)], axis=1)
    return json.dumps({"n": _dense_qubits(rho), "entries": pairs.tolist()})


def read_state(path) -> tuple[str, np.ndarray]:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix == ".json" or data[:1] == b"{":
        return decode_json(data.decode())
    return decode(data)


def write_state(path, kind: str, arr) -> None:
    """Write ``arr`` in the format implied by the suffix (.qpv, .qdm or .json).

    ``kind`` says what ``arr`` holds; the caller converts beforehand when the
    suffix asks for the other representation.
    """
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(encode_json(kind, arr))
    elif kind == "qpv":
        path.write_bytes(encode_qpv(arr))
    else:
        path.write_bytes(encode_qdm(arr))


def overlap_records(lin_ids, values, n: int) -> np.ndarray:
    lin_ids = np.asarray(lin_ids, dtype=np.int64).reshape(-1)
    rec = np.empty(len(lin_ids), dtype=OVERLAP_RECORD)
    rec["block"] = lin_ids >> n
    rec["delta"] = lin_ids & ((1 << n) - 1)
    rec["overlap"] = np.asarray(values, dtype=float).reshape(-1)
    return rec


def read_overlap_records(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) % OVERLAP_RECORD.itemsize:
        raise FormatError(
            f"overlap dump has a partial record at offset {len(data) - len(data) % OVERLAP_RECORD.itemsize}"
        )
    return np.frombuffer(data, dtype=OVERLAP_RECORD)
