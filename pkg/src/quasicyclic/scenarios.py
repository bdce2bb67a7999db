"""
Reference datasets used by the CLI and the acceptance suite.

Each builder returns a :class:`Scenario` holding the dataset, the rate it
was generated at and, when there is one, the ground-truth pulse.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import synth
from .signal_core import Dataset

INTRO_DEFAULTS = dict(m=100, N=6, s=9, alpha=0.5)
MIXTURE_DEFAULTS = dict(m=100, N=81, s=9, alpha1=0.04, alpha2=0.9, offset=5.0, sigma=0.05)
SWEEP_DEFAULTS = dict(m=100, N=100, s=9, alpha=0.5, sigma=0.1)
FRACTIONAL_DEFAULTS = dict(m=100, N=100, s=8.5, alpha=0.0, guard=20, sigma=0.0)


@dataclass(frozen=True)
class Scenario:
    name: str
    data: Dataset
    s_hint: float
    seed: int
    description: str
    truth: Optional[np.ndarray] = None


def intro(seed: int = 0, m: int = 100, N: int = 6, s: int = 9, alpha: float = 0.5,
          sigma: float = 0.0, real_noise: bool = True) -> Scenario:
    """PAM-4 symbols on shifts of a known real shift-orthonormal pulse.

    The pulse is the sampled periodic RRC pulse; ``sigma > 0`` adds noise
    (real by default, matching the real-valued pulse and symbols).
    """
    pulse = synth.periodic_rrc_pulse(N, s, alpha)
    symbols = np.stack([synth.draw_symbols("pam4", N, synth.substream(seed, "intro/symbols", i)) for i in range(m)])
    y = synth.shift_modulate(symbols, pulse, s)
    y = synth.noisy(y, sigma, seed, real=real_noise, stream="intro/noise")
    desc = f"PAM-4 on a periodic RRC pulse (alpha={alpha}), N={N}, s={s}, sigma={sigma}"
    return Scenario("intro", Dataset(y), s, seed, desc, truth=pulse)


def mixture(p1: float = 1.0, p2: float = 0.0, seed: int = 0, m: int = 100, N: int = 81, s: int = 9,
            alpha1: float = 0.04, alpha2: float = 0.9, offset: float = 5.0, sigma: float = 0.05) -> Scenario:
    """Two superposed QAM-16 RRC systems with powers ``p1``, ``p2`` plus AWGN."""
    spec1, spec2 = synth.mixture_specs(p1, p2, sigma, seed, alpha1, alpha2, N, s, offset)
    data = synth.two_system_mixture(spec1, spec2, m)
    desc = (f"two RRC systems: P1={p1} (alpha={alpha1}), P2={p2} (alpha={alpha2}, "
            f"offset {offset} samples), N={N}, s={s}, sigma={sigma}")
    return Scenario("mixture", data, s, seed, desc)


def sweep(seed: int = 0, m: int = 100, N: int = 100, s: int = 9, alpha: float = 0.5,
          sigma: float = 0.1) -> Scenario:
    """Single QAM-16 RRC system in AWGN, for symbol-period estimation."""
    spec = synth.ModulationSpec("qam16", N, s, alpha, noise_sigma=sigma, seed=seed)
    y = synth.noisy(synth.modulated_dataset(spec, m), sigma, seed)
    desc = f"QAM-16 RRC (alpha={alpha}), N={N}, s={s}, sigma={sigma}"
    return Scenario("sweep", Dataset(y), s, seed, desc)


def fractional(seed: int = 0, m: int = 100, N: int = 100, s: float = 8.5, alpha: float = 0.0,
               guard: int = 20, sigma: float = 0.0) -> Scenario:
    """QAM-16 frames at a non-integer rate, cut from a longer symbol stream."""
    spec = synth.ModulationSpec("qam16", N, s, alpha, noise_sigma=sigma, seed=seed,
                                circular=False, guard_symbols=guard)
    y = synth.noisy(synth.modulated_dataset(spec, m), sigma, seed)
    desc = f"QAM-16 RRC (alpha={alpha}) at s={s}, N={N}, linear with {guard} guard symbols, sigma={sigma}"
    return Scenario("fractional", Dataset(y), s, seed, desc)


BUILDERS = {"intro": intro, "mixture": mixture, "sweep": sweep, "fractional": fractional}
