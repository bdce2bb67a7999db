"""
Symbol-period estimation.

Two estimators of the oversampling rate ``s``:

* a sweep over candidate integer rates scoring each by ``lambda1/lambda2``,
  the energy captured by the first quasicyclic component family relative
  to the second;
* a coarse bandwidth-based guess, ``1 / (occupied fraction of the band)``.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from . import pca
from .qpca import QpcaConfig, qpca
from .signal_core import Dataset, dft

# lambda2 below this (as a fraction of total energy) makes the ratio infinite
RATIO_FLOOR = 1e-12


@dataclass(frozen=True)
class PeriodSweepRow:
    s: int
    lambda1: float
    lambda2: float
    ratio: float
    n_used: int


def sweep_period(data: Dataset, s_min: int, s_max: int, config: QpcaConfig = None):
    """Score every candidate rate in ``s_min..s_max``.

    Returns ``(rows, s_star)`` where ``s_star`` maximizes the ratio; ties
    (including several infinite ratios) go to the smallest ``s``.
    """
    if not 1 <= s_min <= s_max <= data.n:
        raise ValueError(f"invalid sweep range {s_min}..{s_max} for length {data.n}")
    base = config or QpcaConfig(s=s_min)
    rows = []
    for s in range(s_min, s_max + 1):
        res = qpca(data, replace(base, s=s, num_components=2))
        lam1 = float(res.lambdas[0])
        lam2 = float(res.lambdas[1]) if res.k > 1 else 0.0
        ratio = math.inf if lam2 < RATIO_FLOOR else lam1 / lam2
        rows.append(PeriodSweepRow(s, lam1, lam2, ratio, (data.n // s) * s))
    best = max(rows, key=lambda r: (r.ratio, -r.s))
    return rows, best.s


def average_energy_spectrum(data: Dataset) -> np.ndarray:
    """Mean of ``|y_hat_i|**2`` over the centered vectors."""
    _, centered = pca.center(data)
    return np.mean(np.abs(dft(centered.vectors)) ** 2, axis=0)


def bandwidth_period_estimate(data: Dataset, energy_threshold: float = 0.95):
    """Rate guess from the occupied bandwidth.

    Finds the narrowest window of bins, centered on the circular centroid of
    the average energy spectrum, holding ``energy_threshold`` of the energy.
    With ``B`` the window width as a fraction of all bins, returns
    ``(1 / B, B)``.
    """
    if not 0 < energy_threshold < 1:
        raise ValueError("energy_threshold must lie strictly between 0 and 1")
    S = average_energy_spectrum(data)
    total = S.sum()
    if total <= 0:
        raise pca.DegenerateDataError("data has zero energy")
    n = S.size
    phase = np.angle(np.sum(S * np.exp(2j * np.pi * np.arange(n) / n)))
    center = int(round(phase * n / (2 * np.pi))) % n
    # bins center, center+1, center-1, center+2, ... ; window of half-width w
    # holds the first min(2w+1, n) of them
    d = np.arange(1, n // 2 + 1)
    order = np.empty(2 * d.size + 1, dtype=int)
    order[0] = center
    order[1::2] = (center + d) % n
    order[2::2] = (center - d) % n
    cum = np.cumsum(S[order[:n]])
    target = energy_threshold * total
    for w in range(n // 2 + 1):
        width = min(2 * w + 1, n)
        if cum[width - 1] >= target:
            band = width / n
            return 1.0 / band, band
    return 1.0, 1.0
