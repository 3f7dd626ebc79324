"""ATF1 arrays: b"ATF1", little-endian u32 rank, u32 dims, f64 interleaved (re, im) payload."""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ..utils.conversions import complex_to_interleaved, interleaved_to_complex

logger = logging.getLogger("att_tomo")

ATF_MAGIC = b"ATF1"
ATF_SUFFIX = ".atf"


def _check_suffix(path: Path, suffix: str):
    if path.suffix.lower() != suffix:
        raise ValueError(f"Unsupported file type: {path.suffix} (expected {suffix})")


# atf writer
def write_atf(path: str | Path, array: np.ndarray) -> Path:
    path = Path(path)
    _check_suffix(path, ATF_SUFFIX)
    arr = np.asarray(array, dtype=np.complex128)
    header = np.array([arr.ndim, *arr.shape], dtype="<u4")
    payload = complex_to_interleaved(arr).astype("<f8")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(ATF_MAGIC)
        fh.write(header.tobytes())
        fh.write(payload.tobytes())
    logger.debug("Wrote ATF1 %s with shape %s", path, arr.shape)
    return path


# atf reader
def read_atf(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    _check_suffix(path, ATF_SUFFIX)
    raw = path.read_bytes()
    if raw[:4] != ATF_MAGIC:
        raise ValueError(f"Bad ATF1 magic in {path}: {raw[:4]!r}")
    rank = int(np.frombuffer(raw, dtype="<u4", count=1, offset=4)[0])
    dims = tuple(int(d) for d in np.frombuffer(raw, dtype="<u4", count=rank, offset=8))
    offset = 8 + 4 * rank
    expected = 2 * int(np.prod(dims, dtype=np.int64))
    flat = np.frombuffer(raw, dtype="<f8", offset=offset)
    if flat.size != expected:
        raise ValueError(f"ATF1 payload of {path} holds {flat.size} values, expected {expected} for {dims}")
    return interleaved_to_complex(flat.astype(np.float64), dims).copy()


def export_csv(path: str | Path, array: np.ndarray) -> Path:
    """1-D or 2-D slice as CSV with separate real and imaginary columns."""
    path = Path(path)
    _check_suffix(path, ".csv")
    arr = np.asarray(array, dtype=np.complex128)
    if arr.ndim == 1:
        df = pd.DataFrame({"index": np.arange(arr.size), "re": arr.real, "im": arr.imag})
    elif arr.ndim == 2:
        i, j = np.indices(arr.shape)
        df = pd.DataFrame({"row": i.ravel(), "col": j.ravel(), "re": arr.real.ravel(), "im": arr.imag.ravel()})
    else:
        raise ValueError(f"CSV export supports 1-D and 2-D arrays, got rank {arr.ndim}")
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    return path


def load_csv(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    _check_suffix(path, ".csv")
    df = pd.read_csv(path)
    values = df["re"].to_numpy() + 1j * df["im"].to_numpy()
    if "index" in df.columns:
        return values
    shape = (int(df["row"].max()) + 1, int(df["col"].max()) + 1)
    out = np.zeros(shape, dtype=np.complex128)
    out[df["row"].to_numpy(), df["col"].to_numpy()] = values
    return out
