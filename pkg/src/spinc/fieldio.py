"""Single-file field archives: magic, length-prefixed JSON header, raw payload.

Layout::

    b"SPCFIELD"                    8 bytes
    header length                  uint32, little-endian
    header                         UTF-8 JSON (keys sorted)
    payload                        little-endian complex128 or float64

Sites are ordered lexicographically with axis 3 fastest and the components
innermost, i.e. C order of an array shaped (N0, N1, N2, N3, components).
"""

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptHeader, LengthMismatch, UnsupportedVersion

MAGIC = b"SPCFIELD"
FORMAT_VERSION = 1

KINDS = {
    "spinor+": (2, "complex128"),
    "spinor-": (2, "complex128"),
    "1-form": (4, "float64"),
    "2-form": (6, "float64"),
    "sdform": (3, "float64"),
    "links": (4, "complex128"),
    "gauge": (1, "complex128"),
}
_DTYPES = {"complex128": np.dtype("<c16"), "float64": np.dtype("<f8")}


@dataclass
class FieldArchive:
    kind: str
    data: np.ndarray
    periods: tuple = (1.0, 1.0, 1.0, 1.0)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        ncomp, etype = KINDS[self.kind]
        data = np.asarray(self.data)
        if data.ndim == 4 and ncomp == 1:
            data = data[..., None]
        if data.ndim != 5 or data.shape[-1] != ncomp:
            raise ValueError(f"{self.kind} data must have shape (N0, N1, N2, N3, {ncomp})")
        self.data = np.ascontiguousarray(data, dtype=_DTYPES[etype])

    @property
    def dims(self):
        return tuple(int(n) for n in self.data.shape[:4])

    def header(self):
        ncomp, etype = KINDS[self.kind]
        return {
            "version": FORMAT_VERSION,
            "kind": self.kind,
            "dims": list(self.dims),
            "periods": [float(p) for p in self.periods],
            "components": ncomp,
            "element": etype,
            "byte_order": "little",
            "ordering": "lexicographic-axis3-fastest-components-innermost",
            "extra": self.extra,
        }

    def values(self):
        """Data with the trailing singleton axis dropped for scalar kinds."""
        return self.data[..., 0] if KINDS[self.kind][0] == 1 else self.data


def dumps(archive):
    head = json.dumps(archive.header(), sort_keys=True).encode("utf-8")
    return MAGIC + struct.pack("<I", len(head)) + head + archive.data.tobytes(order="C")


def loads(blob):
    if len(blob) < len(MAGIC) + 4 or blob[: len(MAGIC)] != MAGIC:
        raise CorruptHeader("missing archive magic")
    (hlen,) = struct.unpack("<I", blob[len(MAGIC) : len(MAGIC) + 4])
    start = len(MAGIC) + 4
    if start + hlen > len(blob):
        raise CorruptHeader("header length exceeds file size")
    try:
        head = json.loads(blob[start : start + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptHeader(f"unreadable header: {exc}") from exc
    if not isinstance(head, dict):
        raise CorruptHeader("header is not a mapping")
    version = head.get("version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"archive version {version!r} (supported: {FORMAT_VERSION})")
    try:
        kind = head["kind"]
        dims = tuple(int(n) for n in head["dims"])
        periods = tuple(float(p) for p in head["periods"])
        ncomp = int(head["components"])
        etype = head["element"]
        order = head["byte_order"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptHeader(f"incomplete header: {exc}") from exc
    if kind not in KINDS or KINDS[kind] != (ncomp, etype) or order != "little" or len(dims) != 4:
        raise CorruptHeader("header fields are inconsistent")
    dtype = _DTYPES[etype]
    payload = blob[start + hlen :]
    expected = int(np.prod(dims)) * ncomp * dtype.itemsize
    if len(payload) != expected:
        raise LengthMismatch(f"payload has {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype=dtype).reshape(dims + (ncomp,)).copy()
    return FieldArchive(kind, data, periods, head.get("extra") or {})


def save(path, archive):
    Path(path).write_bytes(dumps(archive))


def load(path):
    return loads(Path(path).read_bytes())
