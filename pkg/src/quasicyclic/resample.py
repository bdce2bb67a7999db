"""
Band-limited resampling by sinc interpolation.

Data sampled at a fractional rate ``s_tilde`` (samples per symbol) is
turned into the continuous function

    Y(t) = sum_{j=0}^{n_tilde-1} y(j) * sinc(s_tilde * t - j)

(``t`` in symbol periods) and re-sampled at an integer rate. The finite
sum is used as is, i.e. the data is taken to be zero outside the frame.
"""

from dataclasses import dataclass
import math

import numpy as np

from .signal_core import Dataset


@dataclass(frozen=True)
class ResampleSpec:
    s_tilde: float
    s_new: int

    def __post_init__(self):
        if not self.s_tilde > 0:
            raise ValueError(f"s_tilde must be positive, got {self.s_tilde}")
        if int(self.s_new) != self.s_new or self.s_new < 1:
            raise ValueError(f"s_new must be a positive integer, got {self.s_new}")

    def output_length(self, n_tilde: int) -> int:
        """``floor(n_tilde / s_tilde) * s_new`` samples: the same time span."""
        return int(math.floor(n_tilde / self.s_tilde + 1e-9)) * int(self.s_new)


def sinc_matrix(n_tilde: int, s_tilde: float, times) -> np.ndarray:
    """``M[a, j] = sinc(s_tilde * times[a] - j)`` for ``j < n_tilde``."""
    times = np.asarray(times, dtype=float).reshape(-1)
    return np.sinc(s_tilde * times[:, None] - np.arange(n_tilde)[None, :])


def sinc_eval(y, s_tilde: float, t):
    """Band-limited interpolant of ``y`` at time(s) ``t``."""
    y = np.asarray(y, dtype=complex).reshape(-1)
    scalar = np.ndim(t) == 0
    vals = sinc_matrix(y.size, s_tilde, t) @ y
    return complex(vals[0]) if scalar else vals.reshape(np.shape(t))


def resample_dataset(data: Dataset, spec: ResampleSpec) -> Dataset:
    """Re-sample every vector at ``spec.s_new`` samples per symbol.

    Output sample ``j`` is ``Y(j / s_new)`` for ``j`` below
    :meth:`ResampleSpec.output_length`.
    """
    if data.m == 0:
        raise ValueError("cannot resample an empty dataset")
    n_out = spec.output_length(data.n)
    if n_out == 0:
        raise ValueError("frame shorter than one symbol period")
    times = np.arange(n_out) / spec.s_new
    M = sinc_matrix(data.n, spec.s_tilde, times)
    return Dataset(data.vectors @ M.T)
