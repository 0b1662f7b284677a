"""
Free Gibbs Transport - Ensemble Store

HMT1 binary ensembles: magic ``HMT1``, little-endian u32 n, N, count,
then count·n·N·N complex128 values (row-major, interleaved re/im).
Metadata lives in a JSON sidecar ``<file>.json``.
"""

import json
import logging
import os
import struct
from pathlib import Path
from typing import Optional

import numpy as np

from core.errors import ArtifactError
from matrep import Ensemble

logger = logging.getLogger(__name__)

MAGIC = b"HMT1"
HEADER = struct.Struct("<4sIII")
DTYPE = np.dtype("<c16")


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _atomic_write(target: Path, payload: bytes) -> None:
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "wb") as f:
        f.write(payload)
    os.replace(tmp, target)


def save_ensemble(ens: Ensemble, path, meta: Optional[dict] = None) -> Path:
    """Write an ensemble and its sidecar.

    Args:
        ens: Samples to store
        path: Destination of the binary file
        meta: Extra metadata merged over ens.meta

    Returns:
        Path of the binary file
    """
    target = Path(path)
    header = HEADER.pack(MAGIC, ens.n, ens.N, ens.count)
    body = np.ascontiguousarray(ens.samples, dtype=DTYPE).tobytes()
    _atomic_write(target, header + body)
    sidecar = {**ens.meta, **(meta or {})}
    sidecar.update({"n": ens.n, "N": ens.N, "count": ens.count})
    _atomic_write(
        sidecar_path(target),
        json.dumps(sidecar, indent=2, sort_keys=True, default=str).encode(),
    )
    logger.debug(f"Saved {ens.count} samples (n={ens.n}, N={ens.N}) to {target}")
    return target


def load_ensemble(path) -> Ensemble:
    """Read an HMT1 file; the sidecar is optional.

    Raises:
        ArtifactError: Missing file, bad magic, or truncated data
    """
    source = Path(path)
    try:
        raw = source.read_bytes()
    except OSError as e:
        raise ArtifactError(f"cannot read ensemble {source}: {e}") from e
    if len(raw) < HEADER.size:
        raise ArtifactError(f"{source}: file shorter than the HMT1 header")
    magic, n, N, count = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ArtifactError(f"{source}: bad magic {magic!r}")
    expected = count * n * N * N * DTYPE.itemsize
    if len(raw) - HEADER.size != expected:
        raise ArtifactError(
            f"{source}: expected {expected} data bytes, found {len(raw) - HEADER.size}"
        )
    samples = np.frombuffer(raw, dtype=DTYPE, offset=HEADER.size).reshape(count, n, N, N)

    meta = {}
    side = sidecar_path(source)
    if side.exists():
        try:
            meta = json.loads(side.read_text())
        except json.JSONDecodeError as e:
            raise ArtifactError(f"{side}: invalid JSON at line {e.lineno}") from e
        for key, value in (("n", n), ("N", N), ("count", count)):
            if key in meta and meta[key] != value:
                raise ArtifactError(f"{side}: {key}={meta[key]} disagrees with header {value}")
    return Ensemble(samples.astype(np.complex128), meta)


__all__ = ["MAGIC", "load_ensemble", "save_ensemble", "sidecar_path"]
