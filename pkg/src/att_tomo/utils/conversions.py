from __future__ import annotations

import numpy as np
from scipy import signal

TWO_PI = 2.0 * np.pi


def wrap_angle(angle):
    """Reduce angles to [0, 2pi)."""
    return np.mod(angle, TWO_PI)


def wrap_signed(angle):
    """Reduce angles to [-pi, pi)."""
    return np.mod(np.asarray(angle) + np.pi, TWO_PI) - np.pi


def fft_frequencies(n: int) -> np.ndarray:
    # integer frequencies in numpy FFT order
    return np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(int)


def nyquist_mask(n: int) -> np.ndarray:
    """True on every frequency except the (ambiguous) Nyquist one for even n."""
    keep = np.ones(n, dtype=bool)
    if n % 2 == 0:
        keep[n // 2] = False
    return keep


def resample_periodic(values: np.ndarray, n: int, axis: int = -1) -> np.ndarray:
    values = np.asarray(values)
    if values.shape[axis] == n:
        return values.copy()
    return signal.resample(values, n, axis=axis)


def complex_to_interleaved(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    return arr.view(np.float64).reshape(-1)


def interleaved_to_complex(flat: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    flat = np.ascontiguousarray(flat, dtype=np.float64)
    return flat.view(np.complex128).reshape(shape)
