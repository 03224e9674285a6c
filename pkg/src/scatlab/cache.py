"""Binary cache for assembled scattering matrices.

File layout: magic b"SMX1", little-endian uint32 header length, JSON
header (all parameters that keyed the digest, plus the tool version and
array metadata), then the raw complex128 entries in C order.  A cache
hit must replay bit-identically, which the loader checks by re-deriving
the digest from the header.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .quantum.smatrix import ScatteringMatrix
from .util import digest_of

_MAGIC = b"SMX1"


def smatrix_cache_key(potential_record: dict, h: float, m_cut: int, backend: str, params: dict) -> str:
    return digest_of(
        {
            "potential": potential_record,
            "h": h,
            "m_cut": m_cut,
            "backend": backend,
            "params": params,
        }
    )


def cache_path(cache_dir, key: str) -> Path:
    return Path(cache_dir) / "smatrix" / f"{key}.bin"


def save_smatrix(cache_dir, key: str, s: ScatteringMatrix, potential_record: dict, params: dict) -> Path:
    path = cache_path(cache_dir, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "schema": "scatlab.smatrix-cache/1",
        "tool_version": __version__,
        "key": key,
        "h": s.h,
        "m_cut": s.m_cut,
        "backend": s.backend,
        "potential": potential_record,
        "potential_hash": s.potential_hash,
        "params": params,
        "dtype": "complex128",
        "shape": [s.dim, s.dim],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = np.ascontiguousarray(s.entries, dtype=np.complex128).tobytes()
    tmp = path.with_suffix(".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(payload)
    tmp.replace(path)  # atomic publication
    return path


def load_smatrix(path) -> ScatteringMatrix:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ConfigError(f"{path} is not a scattering-matrix cache file")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        payload = fh.read()
    dim = header["shape"][0]
    entries = np.frombuffer(payload, dtype=np.complex128).reshape(dim, dim).copy()
    return ScatteringMatrix(
        h=float(header["h"]),
        m_cut=int(header["m_cut"]),
        entries=entries,
        backend=str(header["backend"]),
        potential_hash=str(header["potential_hash"]),
    )
