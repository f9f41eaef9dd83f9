"""Versioned checkpoint files.

Layout (all integers little-endian)::

    b"BIMCKPT\\0"  magic
    uint32         format version
    repeated sections:
        4-byte tag, uint64 payload length, payload
    b"END\\0" section with empty payload

Sections: ``HEAD`` (JSON scalars), ``CONF`` (the run config as flat YAML,
readable with any text viewer), ``TENS`` (numpy ``.npz`` archive, no
pickles), ``RNGS`` (JSON bit-generator state).
"""
from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError

MAGIC = b"BIMCKPT\0"
VERSION = 1
_SECTION = struct.Struct("<4sQ")
_REQUIRED = (b"HEAD", b"CONF", b"TENS", b"RNGS")


@dataclass
class Checkpoint:
    header: dict
    config_text: str
    tensors: dict[str, np.ndarray] = field(repr=False)
    rng_state: dict = field(repr=False)

    @property
    def step(self) -> int:
        return int(self.header["step"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.tolist(), "dtype": str(obj.dtype)}
    return obj


def _from_json(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(obj["__ndarray__"], dtype=obj["dtype"])
        return {k: _from_json(v) for k, v in obj.items()}
    return obj


def dumps_checkpoint(ckpt: Checkpoint) -> bytes:
    buf = io.BytesIO()
    np.savez(buf, **ckpt.tensors)
    sections = [
        (b"HEAD", json.dumps(ckpt.header, sort_keys=True).encode()),
        (b"CONF", ckpt.config_text.encode()),
        (b"TENS", buf.getvalue()),
        (b"RNGS", json.dumps(_jsonable(ckpt.rng_state), sort_keys=True).encode()),
        (b"END\0", b""),
    ]
    out = [MAGIC, struct.pack("<I", VERSION)]
    for tag, payload in sections:
        out.append(_SECTION.pack(tag, len(payload)))
        out.append(payload)
    return b"".join(out)


def loads_checkpoint(data: bytes) -> Checkpoint:
    if len(data) < len(MAGIC) + 4 or not data.startswith(MAGIC):
        raise FormatError("not a checkpoint file (bad magic)")
    (version,) = struct.unpack_from("<I", data, len(MAGIC))
    if version != VERSION:
        raise FormatError(f"checkpoint format version {version}, this build reads {VERSION}")
    pos = len(MAGIC) + 4
    sections = {}
    while True:
        if pos + _SECTION.size > len(data):
            raise FormatError(f"truncated checkpoint (version {version}): missing section header")
        tag, length = _SECTION.unpack_from(data, pos)
        pos += _SECTION.size
        if tag == b"END\0":
            break
        if pos + length > len(data):
            raise FormatError(
                f"truncated checkpoint (version {version}): section {tag!r} "
                f"needs {length} bytes, {len(data) - pos} left")
        sections[tag] = data[pos:pos + length]
        pos += length
    missing = [t.decode() for t in _REQUIRED if t not in sections]
    if missing:
        raise FormatError(f"checkpoint (version {version}) lacks sections {missing}")
    try:
        header = json.loads(sections[b"HEAD"])
        with np.load(io.BytesIO(sections[b"TENS"]), allow_pickle=False) as npz:
            tensors = {k: npz[k] for k in npz.files}
        rng_state = _from_json(json.loads(sections[b"RNGS"]))
        config_text = sections[b"CONF"].decode()
    except (ValueError, OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"corrupt checkpoint section (version {version}): {exc}") from exc
    return Checkpoint(header, config_text, tensors, rng_state)


def save_checkpoint(path, ckpt: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(dumps_checkpoint(ckpt))
    tmp.replace(path)
    return path


def load_checkpoint(path) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read checkpoint {path}: {exc}") from exc
    return loads_checkpoint(data)
