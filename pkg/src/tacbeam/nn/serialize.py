"""Self-describing binary container for named float64 tensors.

Layout (all integers little-endian)::

    magic        8 bytes  b"TACBEAM\\x00"
    version      u32      currently 1
    header_len   u32
    header       header_len bytes, UTF-8 JSON (sorted keys, no whitespace)
    n_tensors    u32
    n_tensors times:
        name_len u16, name (UTF-8)
        ndim     u8,  ndim x u64 dims
        data     prod(dims) x float64 little-endian, C order
    crc32        u32 of every preceding byte

Writing is deterministic, so save -> load -> save is byte-identical.
"""
import json
import struct
import zlib

import numpy as np

from tacbeam.errors import ValidationError

MAGIC = b"TACBEAM\x00"
VERSION = 1


def dumps(header, tensors):
    """Serialize ``header`` (JSON-able dict) and ``tensors`` (list of (name, array))."""
    hdr = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, struct.pack("<II", VERSION, len(hdr)), hdr, struct.pack("<I", len(tensors))]
    for name, arr in tensors:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        nb = name.encode()
        parts.append(struct.pack("<H", len(nb)) + nb + struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        parts.append(arr.tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def loads(blob):
    """Inverse of :func:`dumps`; returns ``(header, [(name, array), ...])``."""
    if len(blob) < len(MAGIC) + 12 or blob[: len(MAGIC)] != MAGIC:
        raise ValidationError("not a tacbeam container (bad magic)")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) != crc:
        raise ValidationError("container checksum mismatch (corrupt file)")
    pos = len(MAGIC)
    version, hlen = struct.unpack_from("<II", body, pos)
    if version != VERSION:
        raise ValidationError(f"unsupported container version {version}")
    pos += 8
    header = json.loads(body[pos : pos + hlen].decode())
    pos += hlen
    (n,) = struct.unpack_from("<I", body, pos)
    pos += 4
    tensors = []
    try:
        for _ in range(n):
            (nlen,) = struct.unpack_from("<H", body, pos)
            pos += 2
            name = body[pos : pos + nlen].decode()
            pos += nlen
            (ndim,) = struct.unpack_from("<B", body, pos)
            pos += 1
            shape = struct.unpack_from(f"<{ndim}Q", body, pos)
            pos += 8 * ndim
            count = int(np.prod(shape, dtype=np.int64))
            arr = np.frombuffer(body, dtype="<f8", count=count, offset=pos)
            pos += 8 * count
            tensors.append((name, arr.reshape(shape).astype(np.float64)))
    except (struct.error, ValueError) as exc:
        raise ValidationError(f"truncated container: {exc}") from exc
    if pos != len(body):
        raise ValidationError("trailing bytes in container")
    return header, tensors


def save(path, header, tensors):
    with open(path, "wb") as fh:
        fh.write(dumps(header, tensors))


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())
