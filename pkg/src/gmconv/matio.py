"""
Matrix files: CSV with full precision and the binary GMAT container.

GMAT layout: magic ``b"GMAT"``, little-endian u32 rows, u32 cols, then
rows*cols little-endian f64 values in row-major order.
"""

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from gmconv.exceptions import FormatError, ShapeError

MAGIC = b"GMAT"
_HEADER = struct.Struct("<4sII")
MANIFEST_NAME = "params.json"


def json_default(obj: Any) -> Any:
    """``json.dumps`` fallback for numpy scalars and arrays."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _as_matrix(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ShapeError(f"matrix files hold 2-d arrays, got {M.ndim}-d")
    return M


def write_gmat(path: str | Path, M: np.ndarray) -> Path:
    M = _as_matrix(M)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_HEADER.pack(MAGIC, *M.shape) + M.astype("<f8").tobytes(order="C"))
    return path


def read_gmat(path: str | Path) -> np.ndarray:
    """
    Raises:
        FormatError: On a bad magic, truncated header or payload size mismatch.
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: file too short for a GMAT header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    payload = data[_HEADER.size :]
    if len(payload) != rows * cols * 8:
        raise FormatError(f"{path}: expected {rows * cols * 8} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(float)


def write_csv(path: str | Path, M: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, _as_matrix(M), delimiter=",", fmt="%.17g")
    return path


def read_csv(path: str | Path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def read_matrix(path: str | Path) -> np.ndarray:
    """Read GMAT (detected by magic) or CSV."""
    with Path(path).open("rb") as f:
        head = f.read(len(MAGIC))
    return read_gmat(path) if head == MAGIC else read_csv(path)


def write_matrix(path: str | Path, M: np.ndarray) -> Path:
    """Write GMAT for a ``.gmat`` suffix, CSV otherwise."""
    if Path(path).suffix.lower() == ".gmat":
        return write_gmat(path, M)
    return write_csv(path, M)


def save_parameters(
    directory: str | Path,
    params: dict[str, np.ndarray],
    metadata: dict[str, Any] | None = None,
) -> Path:
    """
    Store each array as ``<name>.gmat`` plus a JSON manifest of original shapes.

    Returns:
        Path of the manifest.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries: dict[str, dict[str, Any]] = {}
    for name, array in params.items():
        array = np.asarray(array, dtype=float)
        file_name = f"{name}.gmat"
        rows = array.shape[0] if array.ndim else 1
        write_gmat(directory / file_name, array.reshape(rows, -1))
        entries[name] = {"file": file_name, "shape": list(array.shape)}
    manifest = directory / MANIFEST_NAME
    payload = {"format": "gmat-v1", **(metadata or {}), "parameters": entries}
    manifest.write_text(json.dumps(payload, indent=2, default=json_default), encoding="utf-8")
    return manifest


def load_parameters(directory: str | Path) -> dict[str, np.ndarray]:
    """
    Raises:
        FormatError: If the manifest is missing or inconsistent with the stored arrays.
    """
    directory = Path(directory)
    try:
        manifest = json.loads((directory / MANIFEST_NAME).read_text(encoding="utf-8"))
        entries = manifest["parameters"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise FormatError(f"{directory}: unreadable parameter manifest ({exc})") from exc
    params = {}
    for name, entry in entries.items():
        flat = read_gmat(directory / entry["file"])
        shape = tuple(entry["shape"])
        if flat.size != int(np.prod(shape)):
            raise FormatError(f"{name}: stored {flat.size} values for shape {shape}")
        params[name] = flat.reshape(shape)
    return params
