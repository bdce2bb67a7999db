"""
Synthetic cyclostationary data: RRC pulses, QAM/PAM symbols, AWGN.

Time ``tau`` is measured in symbol periods; a frame sampled at ``s``
samples per symbol has samples ``y(k) = Y(k / s)``. Symbol ``j`` (1-based)
is centered at ``tau = j``. In circular mode the frame is one period of a
signal with period ``N`` symbols, so pulse tails wrap around the frame and
the sampled data is exactly cyclostationary.

All randomness comes from :func:`substream`, which derives independent
``numpy`` PCG64 generators from a 64-bit seed, a stream name and an index.
"""

from dataclasses import dataclass, replace
from enum import Enum
import math
import zlib

import numpy as np

from .signal_core import Dataset, coset_energies, dft, idft

# Distance from tau = 0 or +-1/(4 alpha) at which the continuity values are used.
_SINGULAR_EPS = 1e-8


class Alphabet(str, Enum):
    PAM4 = "pam4"
    QAM16 = "qam16"


_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0])
CONSTELLATIONS = {
    Alphabet.PAM4: (_LEVELS / math.sqrt(5.0)).astype(complex),
    Alphabet.QAM16: ((_LEVELS[:, None] + 1j * _LEVELS[None, :]).reshape(-1) / math.sqrt(10.0)),
}


def substream(seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, name, index)``.

    Generation of vector ``i`` uses ``index=i``, so producing vectors one at
    a time, in any order, gives the same data as producing them together.
    """
    return np.random.default_rng([int(seed) & (2**64 - 1), zlib.crc32(name.encode()), int(index)])


@dataclass(frozen=True)
class ModulationSpec:
    """One modulation system.

    ``s`` may be fractional; the frame then has ``floor(s * N)`` samples.
    ``offset_samples`` delays every symbol by that many samples. In linear
    (non-circular) mode ``guard_symbols`` extra symbols are transmitted on
    each side of the frame, so the frame is a window cut from a longer
    stream rather than an isolated burst.
    """

    alphabet: Alphabet = Alphabet.QAM16
    N: int = 81
    s: float = 9
    alpha: float = 0.5
    power: float = 1.0
    offset_samples: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0
    circular: bool = True
    real_noise: bool = False
    guard_symbols: int = 0

    def __post_init__(self):
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.s > 0:
            raise ValueError("s must be positive")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"roll-off must lie in [0, 1], got {self.alpha}")
        if self.power < 0 or self.noise_sigma < 0:
            raise ValueError("power and noise_sigma must be non-negative")
        if self.guard_symbols < 0:
            raise ValueError("guard_symbols must be non-negative")

    @property
    def n(self) -> int:
        return int(math.floor(self.s * self.N + 1e-9))

    @property
    def symbols_per_frame(self) -> int:
        """Symbols drawn per frame, guards included (none in circular mode)."""
        return self.N if self.circular else self.N + 2 * self.guard_symbols


def _check_alpha(alpha):
    if not 0 <= alpha <= 1:
        raise ValueError(f"roll-off must lie in [0, 1], got {alpha}")


def rrc_pulse(alpha: float, tau):
    """Root-raised-cosine pulse with unit symbol period and unit energy.

    Accepts scalars or arrays. Points within ``1e-8`` of ``tau = 0`` or
    ``tau = +-1/(4 alpha)`` take the limiting values.
    """
    _check_alpha(alpha)
    tau = np.asarray(tau, dtype=float)
    out = np.empty_like(tau)
    at_zero = np.abs(tau) < _SINGULAR_EPS
    if alpha > 0:
        at_pole = np.abs(np.abs(tau) - 1.0 / (4 * alpha)) < _SINGULAR_EPS
    else:
        at_pole = np.zeros_like(at_zero)
    regular = ~(at_zero | at_pole)
    t = tau[regular]
    num = np.sin(np.pi * t * (1 - alpha)) + 4 * alpha * t * np.cos(np.pi * t * (1 + alpha))
    den = np.pi * t * (1 - (4 * alpha * t) ** 2)
    out[regular] = num / den
    out[at_zero] = 1 + alpha * (4 / np.pi - 1)
    if alpha > 0:
        arg = np.pi * (1 + alpha) / (4 * alpha)
        out[at_pole] = alpha * (np.sin(arg) - (2 / np.pi) * np.cos(arg))
    return out if out.ndim else float(out)


def rrc_spectrum(alpha: float, f):
    """Fourier transform of :func:`rrc_pulse` (real, even, band-limited).

    ``f`` is in cycles per symbol period; the support is
    ``|f| <= (1 + alpha) / 2``.
    """
    _check_alpha(alpha)
    f = np.abs(np.asarray(f, dtype=float))
    lo, hi = (1 - alpha) / 2, (1 + alpha) / 2
    out = np.where(f <= lo, 1.0, 0.0)
    if alpha > 0:
        band = (f > lo) & (f <= hi)
        out = np.where(band, np.cos(np.pi / (2 * alpha) * (f - lo)), out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RrcPulse:
    """RRC pulse as a callable of ``tau``, also exposing its spectrum."""

    alpha: float

    def __call__(self, tau):
        return rrc_pulse(self.alpha, tau)

    def spectrum(self, f):
        return rrc_spectrum(self.alpha, f)

    @property
    def bandwidth(self) -> float:
        return (1 + self.alpha) / 2


def periodic_rrc_pulse(N: int, s: int, alpha: float, delay: float = 0.0) -> np.ndarray:
    """Sampled, ``N``-periodic RRC pulse scaled to unit energy.

    Equals ``sum_r rrc_pulse(alpha, k/s - delay - r*N) / sqrt(s)`` for
    ``k = 0..N*s-1``, built exactly from the spectrum. For ``s > 1 + alpha``
    it is ``s``-shift-orthonormal.
    """
    _check_alpha(alpha)
    n = N * s
    l = np.fft.fftfreq(n, d=1.0 / n)  # signed frequency index
    spec = rrc_spectrum(alpha, l / N) * np.exp(-2j * np.pi * l * delay / N) / math.sqrt(N)
    return idft(spec)


def random_shift_orthonormal_pulse(N: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """Random pulse whose spectrum has energy exactly ``1/N`` on every coset."""
    if N < 1 or s < 1:
        raise ValueError("N and s must be positive")
    n = N * s
    spec = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    energies = coset_energies(spec, N)
    spec = (spec.reshape(s, N) / np.sqrt(N * energies)[None, :]).reshape(n)
    return idft(spec)


def shift_modulate(symbols, pulse, s: int) -> np.ndarray:
    """``sum_j a_j * (pulse (*) e_{j s})`` for a sampled pulse of length ``N*s``.

    Symbol ``j`` (1-based) drives the pulse circularly shifted by ``j*s``.
    """
    pulse = np.asarray(pulse, dtype=complex).reshape(-1)
    a = np.asarray(symbols, dtype=complex)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    n = pulse.size
    if s < 1 or n != a.shape[1] * s:
        raise ValueError(f"pulse length {n} is not {a.shape[1]} symbols * s={s}")
    train = np.zeros((a.shape[0], n), dtype=complex)
    train[:, s::s] = a[:, :-1]
    train[:, 0] = a[:, -1]  # symbol N lands on shift N*s = 0 mod n
    y = math.sqrt(n) * idft(dft(train) * dft(pulse)[None, :])
    return y[0] if single else y


def draw_symbols(alphabet, count, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform symbols from the unit-power constellation.

    ``count`` may be an int or a shape tuple.
    """
    points = CONSTELLATIONS[Alphabet(alphabet)]
    return points[rng.integers(0, points.size, size=count)]


def add_awgn(x, sigma: float, rng: np.random.Generator, real: bool = False) -> np.ndarray:
    """Add white Gaussian noise of per-sample variance ``sigma**2``.

    Complex noise is circular: each of the real and imaginary parts has
    standard deviation ``sigma / sqrt(2)``. ``real=True`` puts all of it on
    the real axis.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    x = np.array(x, dtype=complex)
    if sigma == 0:
        return x
    if real:
        return x + sigma * rng.standard_normal(x.shape)
    scale = sigma / math.sqrt(2.0)
    return x + scale * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))


def _fourier_modulate(symbols, pulse, s, n, delay):
    # Y(tau) = sum_j a_j psi_per(tau - j - delay) has period N and Fourier
    # coefficients A(l) * Psi(l/N) / N, nonzero only for |l| <= N * bandwidth.
    N = symbols.shape[-1]
    L = int(math.floor(N * pulse.bandwidth + 1e-9))
    l = np.arange(-L, L + 1)
    j = np.arange(1, N + 1)
    analysis = np.exp(-2j * np.pi * np.outer(j, l) / N)  # (N, 2L+1)
    weights = pulse.spectrum(l / N) * np.exp(-2j * np.pi * l * delay / N) / N
    tau = np.arange(n) / s
    synthesis = weights[:, None] * np.exp(2j * np.pi * np.outer(l, tau) / N)  # (2L+1, n)
    return _rowwise(symbols, analysis @ synthesis)


def _rowwise(a, M):
    # one vector-matrix product per frame, so a frame's samples do not
    # depend on how many frames are generated together
    return np.stack([row @ M for row in a])


def pulse_matrix(pulse, N: int, s: float, n: int, delay: float = 0.0, circular: bool = True,
                 wraps: int = 64, guard: int = 0):
    """Matrix ``H[k, c]``: sample ``k`` of the pulse of the ``c``-th symbol.

    Symbols sit at ``tau = 1 - guard, ..., N + guard``. Circular mode (which
    ignores ``guard``) sums ``2*wraps + 1`` periodic images of the pulse.
    """
    first = 1 if circular else 1 - guard
    centers = np.arange(first, N + 1 + (0 if circular else guard))
    tau = np.arange(n)[:, None] / s - centers[None, :] - delay
    if not circular:
        return np.asarray(pulse(tau), dtype=float)
    H = np.zeros((n, N))
    for r in range(-wraps, wraps + 1):
        H += pulse(tau - r * N)
    return H


def modulate(symbols, pulse, spec: ModulationSpec, wraps: int = 64) -> np.ndarray:
    """Sampled frame(s) ``sqrt(P) * sum_j a_j psi(k/s - j - T/s)``.

    ``symbols`` has shape (K,) or (m, K) with ``K = spec.symbols_per_frame``.
    ``pulse`` is a callable of time;
    if it also provides ``spectrum`` and ``bandwidth`` (as :class:`RrcPulse`
    does) circular frames are synthesized exactly in the frequency domain.
    """
    a = np.asarray(symbols, dtype=complex)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.shape[1] != spec.symbols_per_frame:
        raise ValueError(f"expected {spec.symbols_per_frame} symbols per frame, got {a.shape[1]}")
    delay = spec.offset_samples / spec.s
    n = spec.n
    if spec.circular and hasattr(pulse, "spectrum"):
        y = _fourier_modulate(a, pulse, spec.s, n, delay)
    else:
        H = pulse_matrix(pulse, spec.N, spec.s, n, delay, spec.circular, wraps, spec.guard_symbols)
        y = _rowwise(a, H.T.astype(complex))
    y *= math.sqrt(spec.power)
    return y[0] if single else y


def modulated_dataset(spec: ModulationSpec, m: int, pulse=None, stream: str = "system") -> np.ndarray:
    """``m`` noiseless frames of ``spec`` with per-frame symbol substreams."""
    pulse = RrcPulse(spec.alpha) if pulse is None else pulse
    symbols = np.stack(
        [draw_symbols(spec.alphabet, spec.symbols_per_frame, substream(spec.seed, f"{stream}/symbols", i)) for i in range(m)]
    )
    return modulate(symbols, pulse, spec)


def noisy(frames, sigma: float, seed: int, real: bool = False, stream: str = "noise") -> np.ndarray:
    """Add independent AWGN to each frame from its own substream."""
    frames = np.atleast_2d(frames)
    return np.stack([add_awgn(f, sigma, substream(seed, stream, i), real=real) for i, f in enumerate(frames)])


def two_system_mixture(spec1: ModulationSpec, spec2: ModulationSpec, m: int, seed: int = None) -> Dataset:
    """Two superposed RRC systems plus noise (noise level from ``spec1``).

    Both specs must share ``N`` and ``s``; the second normally carries the
    time offset.
    """
    if spec1.N != spec2.N or spec1.s != spec2.s:
        raise ValueError("both systems must share N and s")
    if m < 1:
        raise ValueError("m must be positive")
    seed = spec1.seed if seed is None else seed
    spec1 = replace(spec1, seed=seed)
    spec2 = replace(spec2, seed=seed)
    y = modulated_dataset(spec1, m, stream="system1") + modulated_dataset(spec2, m, stream="system2")
    y = noisy(y, spec1.noise_sigma, seed, real=spec1.real_noise)
    return Dataset(y)


def mixture_specs(p1: float = 1.0, p2: float = 0.0, sigma: float = 0.05, seed: int = 0,
                  alpha1: float = 0.04, alpha2: float = 0.9, N: int = 81, s: int = 9, offset: float = 5.0):
    """Default two-system setup: roll-offs 0.04 and 0.9, 81 symbols, 9 samples each, offset 5."""
    spec1 = ModulationSpec(Alphabet.QAM16, N, s, alpha1, p1, 0.0, sigma, seed)
    spec2 = ModulationSpec(Alphabet.QAM16, N, s, alpha2, p2, offset, sigma, seed)
    return spec1, spec2
