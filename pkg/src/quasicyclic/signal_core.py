"""
Cyclic signal primitives.

Signals and spectra are plain one-dimensional complex ``numpy`` arrays
indexed modulo their length. Every function returns a fresh array and
never writes into its inputs.

The DFT used throughout is the unitary one,

    x_hat(k) = n**-0.5 * sum_i x(i) * exp(-2j*pi*i*k/n),

so inner products and norms are preserved between the two domains.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

# Imaginary residue allowed on quantities that are real by construction.
REAL_RESIDUE_TOL = 1e-10


def as_signal(x) -> np.ndarray:
    """Copy ``x`` into a 1-D complex array, rejecting empty input."""
    arr = np.array(x, dtype=complex).reshape(-1)
    if arr.size == 0:
        raise ValueError("a signal needs at least one sample")
    return arr


def unit_vector(n: int, j: int) -> np.ndarray:
    """Standard basis signal e_j of length ``n`` (``j`` taken mod n)."""
    e = np.zeros(n, dtype=complex)
    e[j % n] = 1.0
    return e


def delta(n: int) -> np.ndarray:
    """Kronecker delta of length ``n``."""
    return unit_vector(n, 0)


def sample(x, i: int) -> complex:
    """Element ``i mod n`` of ``x``."""
    x = np.asarray(x)
    return x[i % x.shape[-1]]


def circular_shift(x, j: int) -> np.ndarray:
    """Circular convolution with e_j: ``result(i) = x(i - j mod n)``.

    Works along the last axis, so a stack of signals is shifted row-wise.
    """
    return np.roll(np.asarray(x, dtype=complex), int(j), axis=-1)


def inner_product(x, y) -> complex:
    """``<x, y> = sum_i x(i) * conj(y(i))``."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return complex(np.vdot(y, x))


def norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x)))


def dft(x) -> np.ndarray:
    """Unitary DFT along the last axis (any length, O(n log n))."""
    return np.fft.fft(np.asarray(x, dtype=complex), axis=-1, norm="ortho")


def idft(x_hat) -> np.ndarray:
    """Inverse of :func:`dft`."""
    return np.fft.ifft(np.asarray(x_hat, dtype=complex), axis=-1, norm="ortho")


def autocorrelation(x) -> np.ndarray:
    """Cyclic autocorrelation ``R_x(j) = <x, x (*) e_j>``, ``0 <= j < n``.

    Evaluated through the DFT: ``R_x = sqrt(n) * idft(|x_hat|**2)``.
    """
    x = as_signal(x)
    n = x.size
    return np.sqrt(n) * idft(np.abs(dft(x)) ** 2)


def real_part_checked(values, tol: float = REAL_RESIDUE_TOL, what: str = "value") -> np.ndarray:
    """Drop the imaginary part of a provably-real quantity after checking it."""
    values = np.asarray(values)
    if np.iscomplexobj(values):
        scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
        residue = float(np.max(np.abs(values.imag), initial=0.0))
        if residue > tol * scale:
            raise ArithmeticError(f"{what} has imaginary residue {residue:.3e}")
        return values.real.copy()
    return np.asarray(values, dtype=float)


def energy_spectrum(x) -> np.ndarray:
    """Energy spectrum ``S_x = dft(R_x) / sqrt(n)``; equals ``|x_hat|**2``."""
    x = as_signal(x)
    s = dft(autocorrelation(x)) / np.sqrt(x.size)
    return real_part_checked(s, what="energy spectrum")


def _check_coset_args(n: int, t: int, N: int) -> None:
    if N < 1 or n % N != 0:
        raise ValueError(f"N={N} does not divide n={n}")
    if not 0 <= t < N:
        raise ValueError(f"coset index t={t} outside 0..{N - 1}")


def coset_indices(n: int, t: int, N: int) -> np.ndarray:
    """Indices ``t, t+N, ..., t+(s-1)N`` of the coset ``t + <N>``."""
    _check_coset_args(n, t, N)
    return np.arange(t, n, N)


def coset_extract(x_hat, t: int, N: int) -> np.ndarray:
    """Entries of ``x_hat`` on the coset ``t + <N>`` in ascending order."""
    x_hat = np.asarray(x_hat, dtype=complex)
    n = x_hat.shape[-1]
    _check_coset_args(n, t, N)
    return x_hat[..., t::N].copy()


def coset_embed(values, t: int, N: int, n: int) -> np.ndarray:
    """Place coset values back into a length-``n`` spectrum, zeros elsewhere."""
    _check_coset_args(n, t, N)
    values = np.asarray(values, dtype=complex)
    if values.shape[-1] != n // N:
        raise ValueError(f"expected {n // N} coset values, got {values.shape[-1]}")
    out = np.zeros(values.shape[:-1] + (n,), dtype=complex)
    out[..., t::N] = values
    return out


def coset_energies(x_hat, N: int) -> np.ndarray:
    """``||x_hat_{t+<N>}||**2`` for every ``t`` in ``0..N-1``."""
    x_hat = np.asarray(x_hat, dtype=complex)
    n = x_hat.shape[-1]
    if N < 1 or n % N != 0:
        raise ValueError(f"N={N} does not divide n={n}")
    # index k = t + l*N sits at [l, t] after reshaping to (s, N)
    return np.sum(np.abs(x_hat.reshape(x_hat.shape[:-1] + (n // N, N))) ** 2, axis=-2)


@dataclass(frozen=True)
class NyquistCheck:
    """Outcome of :func:`is_shift_orthonormal`.

    ``time_deviation`` is the largest departure of the autocorrelation from
    the ideal values at lags that are multiples of ``s``; ``freq_deviation``
    is ``max_t | ||x_hat_{t+<N>}||**2 - 1/N |``.
    """

    ok: bool
    time_ok: bool
    freq_ok: bool
    time_deviation: float
    freq_deviation: float

    def __bool__(self) -> bool:
        return self.ok


def is_shift_orthonormal(x, s: int, tol: float = 1e-9) -> NyquistCheck:
    """Test whether ``x`` is orthonormal to its circular shifts by multiples of ``s``.

    The time-domain verdict checks ``R_x(0) = 1`` and ``R_x(ks) = 0``. The
    frequency-domain verdict checks that every coset of the spectrum carries
    energy ``1/N``. The two are mathematically equivalent; a disagreement
    only happens right at the tolerance boundary and is reported via
    ``ok=False``.
    """
    x = as_signal(x)
    n = x.size
    if s < 1 or n % s != 0:
        raise ValueError(f"s={s} does not divide n={n}")
    N = n // s
    # Direct lags <x, x (*) e_{ks}> from the block Gram matrix, not the DFT
    # route, so the two checks stay independent.
    blocks = x.reshape(N, s)
    gram = blocks @ blocks.conj().T  # gram[a, b] = <block a, block b>
    rows = np.arange(N)
    lags = gram[rows[None, :], (rows[None, :] - rows[:, None]) % N].sum(axis=1)
    target = np.zeros(N)
    target[0] = 1.0
    time_dev = float(np.max(np.abs(lags - target)))

    freq_dev = float(np.max(np.abs(coset_energies(dft(x), N) - 1.0 / N)))
    time_ok = time_dev <= tol
    freq_ok = freq_dev <= tol
    return NyquistCheck(time_ok and freq_ok, time_ok, freq_ok, time_dev, freq_dev)


@dataclass(frozen=True)
class Dataset:
    """``m`` signals of common length ``n`` stored as the rows of ``vectors``."""

    vectors: np.ndarray
    centroid: Optional[np.ndarray] = None
    centered: bool = False

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=complex)
        if vecs.ndim == 1:
            vecs = vecs[None, :]
        if vecs.ndim != 2 or vecs.shape[1] == 0:
            raise ValueError(f"dataset must be an (m, n) array, got shape {vecs.shape}")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        if self.centroid is not None:
            c = np.array(self.centroid, dtype=complex).reshape(-1)
            if c.size != vecs.shape[1]:
                raise ValueError("centroid length does not match the vectors")
            c.setflags(write=False)
            object.__setattr__(self, "centroid", c)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.m

    def energy(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))
