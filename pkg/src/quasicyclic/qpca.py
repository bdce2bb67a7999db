"""
Quasicyclic PCA.

Finds unit-energy pulses ``q`` whose circular shifts by multiples of ``s``
form an orthonormal family, chosen so the family captures as much of the
centered data energy as possible. In the DFT domain the shift constraint
becomes "every coset ``t + <N>`` of the spectrum carries energy ``1/N``"
and the objective separates over cosets, so the problem splits into ``N``
ordinary PCA problems of dimension ``s``.

Signals of length ``n = N*s``; ``s`` samples per symbol, ``N`` symbols.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import logging

import numpy as np

from . import pca
from .signal_core import Dataset, dft, idft, is_shift_orthonormal

logger = logging.getLogger(__name__)


class PhasePolicy(str, Enum):
    """How the free per-coset phase of every component is fixed.

    ``LEADING_REAL`` makes the first significant entry of each coset vector
    real and positive. ``ZERO_PHASE`` pairs every coset with its mirror
    coset ``-t mod N`` and picks the phases that minimize the imaginary
    energy of the time-domain pulse (a real pulse when one exists).
    """

    LEADING_REAL = "leading_real"
    ZERO_PHASE = "zero_phase"


class ShiftOrthonormalityError(ValueError):
    """The pulse is not orthonormal to its own shifts by multiples of ``s``."""


@dataclass(frozen=True)
class QpcaConfig:
    s: int
    num_components: int = 1
    phase_policy: PhasePolicy = PhasePolicy.LEADING_REAL
    tol: float = 1e-9
    threads: int = 1

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise ValueError(f"s must be a positive integer, got {self.s}")
        if self.num_components < 1:
            raise ValueError("num_components must be at least 1")
        object.__setattr__(self, "phase_policy", PhasePolicy(self.phase_policy))


@dataclass(frozen=True)
class QpcaResult:
    """Components found by :func:`qpca`.

    Attributes
    ----------
    components : ndarray, shape (k, n)
        Time-domain pulses ``q^(1..k)``.
    lambdas : ndarray, shape (k,)
        Fraction of the total centered energy captured by each pulse's
        shift family.
    coset_eigenvalues : ndarray, shape (k, N)
        Eigenvalues of the per-coset PCA problems on the augmented data.
    """

    components: np.ndarray
    lambdas: np.ndarray
    coset_eigenvalues: np.ndarray
    N: int
    s: int
    centroid: np.ndarray
    total_energy: float
    spectra: np.ndarray = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.N * self.s

    @property
    def k(self) -> int:
        return len(self.lambdas)


def extend_truncate(data: Dataset, s: int) -> Dataset:
    """Cut (or zero-pad) every vector to length ``floor(n_tilde/s) * s``."""
    n_tilde = data.n
    if s < 1 or n_tilde < s:
        raise ValueError(f"need at least one full period: n={n_tilde}, s={s}")
    n = (n_tilde // s) * s
    if n == n_tilde:
        return data
    if n < n_tilde:
        return Dataset(data.vectors[:, :n])
    out = np.zeros((data.m, n), dtype=complex)
    out[:, :n_tilde] = data.vectors
    return Dataset(out)


def augment(spectra, N: int) -> np.ndarray:
    """Spectra of every data vector shifted by ``j*s`` samples, ``j = 0..N-1``.

    Row ``i + m*j`` of the output is ``y_hat_i(k) * exp(-2j*pi*j*k/N)``,
    the DFT of ``y_i`` circularly shifted by ``j*s``.
    """
    Y = np.atleast_2d(np.asarray(spectra, dtype=complex))
    m, n = Y.shape
    if N < 1 or n % N:
        raise ValueError(f"N={N} does not divide n={n}")
    k = np.arange(n)
    ramps = np.exp(-2j * np.pi * np.outer(np.arange(N), k % N) / N)  # (N, n)
    return (ramps[:, None, :] * Y[None, :, :]).reshape(N * m, n)


def solve_coset(z_hat, t: int, N: int, k: int = 1):
    """PCA of the augmented spectra restricted to the coset ``t + <N>``.

    Returns the coset vectors scaled to squared norm ``1/N`` (shape
    ``(k, s)``, or ``(s,)`` when ``k == 1``) and the PCA eigenvalues.
    """
    Z = np.atleast_2d(np.asarray(z_hat, dtype=complex))
    n = Z.shape[1]
    if N < 1 or n % N:
        raise ValueError(f"N={N} does not divide n={n}")
    if not 0 <= t < N:
        raise ValueError(f"coset index t={t} outside 0..{N - 1}")
    vecs, vals, _ = pca.batched_components(data=Z[None, :, t::N], k=k)
    vecs = vecs[0] / np.sqrt(N)
    if k == 1:
        return vecs[0], float(vals[0, 0])
    return vecs, vals[0]


def _coset_grams(Y_hat, N: int) -> np.ndarray:
    """Scatter matrices of the augmented data, one per coset.

    Every augmented row restricted to coset ``t`` is a unit-modulus multiple
    of the original row, so the ``N*m`` augmented rows collapse exactly to
    ``N * sum_i y_t,i y_t,i^H``.
    """
    m, n = Y_hat.shape
    s = n // N
    blocks = np.ascontiguousarray(Y_hat.reshape(m, s, N).transpose(2, 0, 1))  # [t, i, l] = y_hat_i(t + l*N)
    return N * (blocks.transpose(0, 2, 1) @ blocks.conj())


def _solve_all_cosets(grams, k: int, threads: int):
    N = grams.shape[0]
    if threads <= 1 or N < 2:
        return pca.batched_components(gram=grams, k=k)
    chunks = np.array_split(np.arange(N), min(threads, N))
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda idx: pca.batched_components(gram=grams[idx], k=k), chunks))
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(3))


def _mirror_positions(N: int, s: int):
    """For coset ``t`` and entry ``l`` (index ``t + l*N``), where ``-index mod n`` lives."""
    n = N * s
    idx = np.arange(n).reshape(s, N)  # [l, t]
    neg = (-idx) % n
    return neg % N, neg // N  # mirror coset, mirror position


def zero_phase(q_hat, N: int) -> np.ndarray:
    """Re-phase the cosets of ``q_hat`` to minimize the pulse's imaginary energy.

    For index ``k`` the imaginary part of the pulse couples ``q_hat(k)`` and
    ``q_hat(-k)``, i.e. coset ``t`` with coset ``-t mod N``. Only the sum of
    the two coset phases matters, so the lower coset keeps its phase and the
    mirror absorbs the correction. Self-mirrored cosets get half the
    correction.
    """
    q_hat = np.asarray(q_hat, dtype=complex)
    n = q_hat.size
    s = n // N
    mt, ml = _mirror_positions(N, s)
    cos = q_hat.reshape(s, N)
    mirrored = cos[ml, mt]  # q_hat(-k) laid out like cos
    c = np.sum(cos * mirrored, axis=0)  # per coset t
    phases = np.zeros(N)
    for t in range(N):
        tm = (-t) % N
        if abs(c[t]) == 0 or tm < t:
            continue
        if tm == t:
            phi = -np.angle(c[t]) / 2
            # branch: keep the first significant coset entry in the right half-plane
            v = cos[:, t] * np.exp(1j * phi)
            lead = v[np.argmax(np.abs(v) > pca.PHASE_THRESHOLD * np.abs(v).max())]
            if lead.real < 0:
                phi += np.pi
            phases[t] = phi
        else:
            phases[tm] = -np.angle(c[t])
    return (cos * np.exp(1j * phases)[None, :]).reshape(n)


def assemble(coset_vectors, N: int) -> np.ndarray:
    """Sum of per-coset vectors into a full spectrum.

    ``coset_vectors[t]`` holds the ``s`` entries of coset ``t + <N>``.
    """
    cv = np.asarray(coset_vectors, dtype=complex)
    s = cv.shape[-1]
    return np.ascontiguousarray(np.swapaxes(cv, -1, -2)).reshape(cv.shape[:-2] + (N * s,))


def family_coefficients(Y, q, s: int, spectra=None) -> np.ndarray:
    """``<y_i, q (*) e_{js}>`` for every row ``i`` and ``j = 0..N-1``.

    Computed as a circular cross-correlation through the DFT; pass the
    rows' ``spectra`` when they are already at hand.
    """
    q = np.asarray(q, dtype=complex)
    n = q.size
    Y_hat = dft(np.atleast_2d(Y)) if spectra is None else np.atleast_2d(spectra)
    corr = np.sqrt(n) * idft(Y_hat * np.conj(dft(q)))
    return corr[:, ::s]


def _require_shift_orthonormal(q, s, tol):
    n = np.asarray(q).size
    if s < 1 or n % s:
        raise ValueError(f"s={s} does not divide n={n}")
    check = is_shift_orthonormal(q, s, tol)
    if not check.ok:
        raise ShiftOrthonormalityError(
            f"pulse is not {s}-shift-orthonormal (time dev {check.time_deviation:.2e}, "
            f"coset dev {check.freq_deviation:.2e})"
        )


def project_family(y, q, s: int, tol: float = 1e-9) -> np.ndarray:
    """Orthogonal projection of ``y`` onto the span of ``q``'s ``s``-shifts."""
    _require_shift_orthonormal(q, s, tol)
    y = np.asarray(y, dtype=complex)
    if y.shape != np.shape(q):
        raise ValueError("signal and pulse lengths differ")
    n = y.size
    coeffs = family_coefficients(y, q, s)[0]
    train = np.zeros(n, dtype=complex)
    train[::s] = coeffs
    return np.sqrt(n) * idft(dft(train) * dft(q))


def captured_energies(data, q, s: int, tol: float = 1e-9, spectra=None) -> np.ndarray:
    """``||project_family(y_i, q, s)||**2`` for every data vector.

    The family is orthonormal, so this is the sum of squared coefficients.
    """
    _require_shift_orthonormal(q, s, tol)
    Y = data.vectors if isinstance(data, Dataset) else np.atleast_2d(data)
    return np.sum(np.abs(family_coefficients(Y, q, s, spectra)) ** 2, axis=1)


def energy_fraction(data, q, s: int, tol: float = 1e-9, spectra=None) -> float:
    """Share of the (centered) data energy captured by the shift family of ``q``."""
    Y = data.vectors if isinstance(data, Dataset) else np.atleast_2d(data)
    total = float(np.sum(np.abs(Y) ** 2))
    if total == 0:
        raise pca.DegenerateDataError("data has zero energy")
    return float(np.sum(captured_energies(Y, q, s, tol, spectra)) / total)


def qpca(data: Dataset, config: QpcaConfig) -> QpcaResult:
    """Quasicyclic principal components of ``data`` at ``config.s`` samples per symbol.

    Vectors are truncated to a whole number of periods, centered, and
    transformed. The coset problems are solved jointly, coset vectors are
    scaled to energy ``1/N``, phased per ``config.phase_policy``,
    reassembled and transformed back.

    A component is dropped (with all later ones) when the data left after
    the earlier components has under ``1e-12`` of the total energy, or when
    ``num_components`` exceeds the coset dimension ``s``.
    """
    s = int(config.s)
    trimmed = extend_truncate(data, s)
    n = trimmed.n
    N = n // s
    centroid, centered = pca.center(trimmed)
    Y = centered.vectors
    total = float(np.sum(np.abs(Y) ** 2))
    if total == 0:
        raise pca.DegenerateDataError("centered data has zero energy")

    Y_hat = dft(Y)
    grams = _coset_grams(Y_hat, N)
    vecs, vals, residual = _solve_all_cosets(grams, config.num_components, config.threads)
    k = vals.shape[1]
    # residual is in augmented units (N times the data energy)
    exhausted = residual.sum(axis=0) < pca.RESIDUAL_RTOL * N * total
    for j in range(1, k):
        if exhausted[j - 1]:
            k = j
            break

    spectra = np.zeros((k, n), dtype=complex)
    comps = np.zeros((k, n), dtype=complex)
    lambdas = np.zeros(k)
    for j in range(k):
        q_hat = assemble(vecs[:, j, :], N) / np.sqrt(N)
        if config.phase_policy is PhasePolicy.ZERO_PHASE:
            q_hat = zero_phase(q_hat, N)
        spectra[j] = q_hat
        comps[j] = idft(q_hat)
        lambdas[j] = energy_fraction(Y, comps[j], s, tol=max(config.tol, 1e-9), spectra=Y_hat)
    return QpcaResult(
        components=comps,
        lambdas=lambdas,
        coset_eigenvalues=vals[:, :k].T.copy(),
        N=N,
        s=s,
        centroid=centroid,
        total_energy=total,
        spectra=spectra,
    )


def rephase(q_hat, N: int, phases) -> np.ndarray:
    """Multiply coset ``t`` of ``q_hat`` by ``exp(1j * phases[t])``."""
    q_hat = np.asarray(q_hat, dtype=complex)
    s = q_hat.size // N
    return (q_hat.reshape(s, N) * np.exp(1j * np.asarray(phases))[None, :]).reshape(-1)


def family_gram(pulses, s: int) -> np.ndarray:
    """Gram matrix of all ``s``-shifts of all ``pulses`` (rows), in (pulse, shift) order."""
    P = np.atleast_2d(np.asarray(pulses, dtype=complex))
    n = P.shape[1]
    shifted = np.concatenate([np.roll(P, j * s, axis=1) for j in range(n // s)])
    order = np.arange(shifted.shape[0]).reshape(n // s, P.shape[0]).T.reshape(-1)
    F = shifted[order]
    return F @ F.conj().T


def objective_from_cosets(result: QpcaResult, j: int = 0) -> float:
    """Captured energy of component ``j`` implied by its coset eigenvalues."""
    return float(np.sum(result.coset_eigenvalues[j]) / result.N)

