"""
Principal component analysis of complex data by power iteration.

The engine in this module works on a *batch* of independent eigenproblems
at once, which is how the quasicyclic solver uses it (one problem per
frequency coset). The plain single-dataset functions are thin wrappers
around a batch of size one.
"""

from dataclasses import dataclass
import logging

import numpy as np

from .signal_core import Dataset

logger = logging.getLogger(__name__)

RAYLEIGH_RTOL = 1e-13
MAX_ITERATIONS = 10_000
PHASE_THRESHOLD = 1e-10
# Residual energy below this fraction of the starting energy counts as exhausted.
RESIDUAL_RTOL = 1e-12

_START_SEED = 20240417
_START_PERTURBATION = 0.25


class DegenerateDataError(ValueError):
    """Raised when the data carries no energy to extract a component from."""


@dataclass(frozen=True)
class PcaResult:
    """Ordered principal components.

    Attributes
    ----------
    components : ndarray, shape (k, n)
        Unit-norm, mutually orthogonal rows, phase-normalized.
    eigenvalues : ndarray, shape (k,)
        Captured energies ``sum_i |<y_i, q_j>|**2``, non-increasing.
    rank_bound : int
        Dimension of the span of the input data.
    """

    components: np.ndarray
    eigenvalues: np.ndarray
    rank_bound: int

    @property
    def k(self) -> int:
        return len(self.eigenvalues)


def start_vector(d: int, index: int = 0) -> np.ndarray:
    """Normalized all-ones vector plus a fixed pseudorandom perturbation.

    Component ``index`` gets its own perturbation: reusing the first start
    vector after deflation would leave it with no weight in a degenerate
    top eigenspace.
    """
    rng = np.random.default_rng(_START_SEED if index == 0 else [_START_SEED, index])
    v = np.ones(d, dtype=complex)
    v += _START_PERTURBATION * (rng.standard_normal(d) + 1j * rng.standard_normal(d))
    return v / np.linalg.norm(v)


def phase_normalize(v, threshold: float = PHASE_THRESHOLD) -> np.ndarray:
    """Rotate ``v`` so its first significant entry is real and positive.

    An entry is significant when its magnitude exceeds ``threshold`` times
    the largest magnitude in ``v``. Works row-wise on 2-D input.
    """
    v = np.array(v, dtype=complex)
    single = v.ndim == 1
    rows = np.atleast_2d(v)
    mags = np.abs(rows)
    peak = mags.max(axis=-1)
    if np.any(peak == 0):
        raise ValueError("cannot phase-normalize a zero vector")
    first = np.argmax(mags > threshold * peak[:, None], axis=-1)
    lead = rows[np.arange(rows.shape[0]), first]
    rows = rows * (np.conj(lead) / np.abs(lead))[:, None]
    rows[np.arange(rows.shape[0]), first] = np.abs(lead)
    return rows[0] if single else rows


def _orthogonalize(v, basis):
    # v: (B, d); basis: (B, j, d) orthonormal rows
    if basis is None or basis.shape[1] == 0:
        return v
    coeff = np.einsum("bjd,bd->bj", basis.conj(), v)
    return v - np.einsum("bj,bjd->bd", coeff, basis)


class _Operator:
    """Batched scatter operator ``C_b = sum_i y_i y_i^H`` of data rows ``y_i``.

    With ``<y, q> = sum y * conj(q)`` the captured energy is ``q^H C q``, so
    ``C = B^H B`` for ``B = conj(Y)``; ``B`` is what gets stored. Either the
    data ``Y`` of shape (B, M, d) is applied implicitly, or a precomputed
    scatter stack of shape (B, d, d) is used.
    """

    def __init__(self, data=None, gram=None):
        if (data is None) == (gram is None):
            raise ValueError("give exactly one of data / gram")
        self.data = None if data is None else np.conj(np.asarray(data, dtype=complex))
        self.gram = None if gram is None else np.asarray(gram, dtype=complex)
        src = self.data if self.data is not None else self.gram
        self.batch = src.shape[0]
        self.dim = src.shape[-1]
        self.deflated = False

    def deflate(self, basis):
        """Operator with ``basis`` (B, j, d) projected out on both sides.

        Only Gram stacks are deflated in place; implicit data operators keep
        projecting every iterate instead.
        """
        if self.gram is None or basis is None:
            return self
        P = np.eye(self.dim)[None] - np.swapaxes(basis, 1, 2) @ basis.conj()
        G = P.conj().transpose(0, 2, 1) @ self.gram @ P
        out = _Operator(gram=(G + G.conj().transpose(0, 2, 1)) / 2)
        out.deflated = True
        return out

    def apply(self, v, idx):
        if self.gram is not None:
            G = self.gram if idx.size == self.batch else self.gram[idx]
            return (G @ v[:, :, None])[:, :, 0]
        Y = self.data[idx]
        return np.einsum("bmi,bm->bi", Y.conj(), np.einsum("bmi,bi->bm", Y, v))

    def trace(self):
        if self.gram is not None:
            return np.einsum("bii->b", self.gram).real
        return np.sum(np.abs(self.data) ** 2, axis=(1, 2))

    def residual_trace(self, basis):
        """Trace of the operator with ``basis`` projected out, per problem."""
        if basis is None or basis.shape[1] == 0 or self.deflated:
            return self.trace()
        if self.gram is not None:
            proj = np.einsum("bjd,bde,bje->b", basis.conj(), self.gram, basis).real
            return self.trace() - proj
        # data rows are stored conjugated: <row, basis_j> pairs conj(y) with conj(basis)
        coeff = np.einsum("bmd,bjd->bmj", self.data, basis)
        return self.trace() - np.sum(np.abs(coeff) ** 2, axis=(1, 2))

    def dense_top(self, b, basis):
        """Top eigenpair of problem ``b`` with ``basis`` projected out, densely."""
        d = self.dim
        P = np.eye(d, dtype=complex)
        if basis is not None and basis.shape[0]:
            P = P - basis.T @ basis.conj()
        if self.gram is not None:
            G = P.conj().T @ self.gram[b] @ P
            w, V = np.linalg.eigh((G + G.conj().T) / 2)
            return V[:, -1], float(w[-1])
        Y = self.data[b] @ P
        M = Y.shape[0]
        if M < d:
            w, U = np.linalg.eigh(Y @ Y.conj().T)
            v = Y.conj().T @ U[:, -1]
            nv = np.linalg.norm(v)
            if nv == 0:
                return _orthogonalize(start_vector(d)[None], None if basis is None else basis[None])[0], 0.0
            return v / nv, float(w[-1])
        w, V = np.linalg.eigh(Y.conj().T @ Y)
        return V[:, -1], float(w[-1])


def _batched_top(op: _Operator, basis=None, atol=0.0, rtol=RAYLEIGH_RTOL, max_iter=MAX_ITERATIONS, index=0):
    """Top eigenpair of every problem in ``op``, orthogonal to ``basis``.

    Returns ``(vectors (B, d), values (B,), converged (B,))``. A problem
    whose deflated operator maps the iterate to norm ``<= atol`` is treated
    as exhausted (value 0) if its remaining trace is also below ``atol``;
    otherwise the start vector was unlucky and the problem is solved
    densely. Problems that hit the iteration cap are likewise re-solved
    densely and flagged as not converged.

    Each problem's iterate and stopping point depend only on that problem,
    so results do not depend on how problems are grouped into batches.
    """
    B, d = op.batch, op.dim
    v0 = _orthogonalize(np.tile(start_vector(d, index), (B, 1)), basis)
    n0 = np.linalg.norm(v0, axis=1, keepdims=True)
    v0 /= np.where(n0 > 0, n0, 1.0)
    exhausted = op.residual_trace(basis) <= atol
    out_v = v0.copy()
    out_lam = np.zeros(B)
    converged = np.zeros(B, dtype=bool)

    # working set: problems still iterating, plus finished ones awaiting compaction
    ws = np.arange(B)
    v = v0
    lam = np.full(B, np.inf)
    live = np.ones(B, dtype=bool)
    # A deflated Gram stack already maps into the complement of the basis.
    wbasis = None if op.deflated else basis
    for _ in range(max_iter):
        w = op.apply(v, ws)
        if wbasis is not None:
            w = _orthogonalize(w, wbasis)
        rq = np.vecdot(v, w).real
        nw = np.sqrt(np.vecdot(w, w).real)
        null = nw <= atol
        done = live & ((np.abs(rq - lam) <= rtol * np.abs(rq)) | null)
        rq[null] = 0.0
        nw[null] = 1.0
        v = np.where(null[:, None], v, w / nw[:, None])
        lam = rq
        if done.any():
            idx = ws[done]
            out_v[idx] = v[done]
            out_lam[idx] = lam[done]
            converged[idx] = ~null[done] | exhausted[idx]
            live &= ~done
            n_live = int(live.sum())
            if n_live == 0:
                break
            if n_live <= live.size // 2:
                ws, v, lam, live = ws[live], v[live], lam[live], live[live]
                if wbasis is not None:
                    wbasis = basis[ws]
    for b in np.flatnonzero(~converged):
        logger.debug("power iteration hit the cap on problem %d; dense fallback", b)
        vec, val = op.dense_top(b, None if basis is None else basis[b])
        out_v[b] = vec
        out_lam[b] = val
    return out_v, np.maximum(out_lam, 0.0), converged


def batched_components(data=None, gram=None, k: int = 1, phase: bool = True):
    """First ``k`` principal components for a batch of independent problems.

    Parameters
    ----------
    data : array_like, shape (B, M, d), optional
        ``B`` data sets of ``M`` vectors each (rows), applied implicitly.
    gram : array_like, shape (B, d, d), optional
        Precomputed scatter stacks ``sum_i y_i y_i^H = Y^T conj(Y)``; use
        for small ``d``.
    k : int
        Components per problem, found by successive deflation.
    phase : bool
        Apply :func:`phase_normalize` to every returned vector.

    Returns
    -------
    vectors : ndarray, shape (B, k, d)
    values : ndarray, shape (B, k)
    residual : ndarray, shape (B, k)
        Operator trace remaining *after* each deflation step.
    """
    op = _Operator(data=data, gram=gram)
    B, d = op.batch, op.dim
    k = min(k, d)
    vectors = np.zeros((B, k, d), dtype=complex)
    values = np.zeros((B, k))
    total = op.trace()
    atol = RESIDUAL_RTOL * 1e-3 * float(total.sum())
    residual = np.zeros((B, k))
    for j in range(k):
        basis = vectors[:, :j, :] if j else None
        vec, val, _ = _batched_top(op.deflate(basis), basis, atol=atol, index=j)
        vec = _orthogonalize(vec, basis)
        vec /= np.linalg.norm(vec, axis=1, keepdims=True)
        vectors[:, j, :] = vec
        values[:, j] = val
        residual[:, j] = np.maximum(total - values[:, : j + 1].sum(axis=1), 0.0)
    if phase and k:
        vectors = phase_normalize(vectors.reshape(B * k, d)).reshape(B, k, d)
    return vectors, values, residual


def center(data: Dataset):
    """Subtract the centroid from every vector.

    Returns
    -------
    centroid : ndarray
    centered : Dataset
    """
    if data.m == 0:
        raise ValueError("cannot center an empty dataset")
    centroid = data.vectors.mean(axis=0)
    return centroid, Dataset(data.vectors - centroid, centroid=centroid, centered=True)


def _matrix(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.vectors
    Y = np.asarray(data, dtype=complex)
    return Y[None, :] if Y.ndim == 1 else Y


def first_component(data):
    """Unit vector maximizing ``sum_i |<y_i, q>|**2`` and the attained value.

    ``data`` is a centered :class:`Dataset` or an (m, n) array of rows. No
    centering happens here.
    """
    Y = _matrix(data)
    if not np.any(Y):
        raise DegenerateDataError("all data vectors are zero")
    vec, val, _ = batched_components(data=Y[None], k=1)
    return vec[0, 0], float(val[0, 0])


def components(data, k: int) -> PcaResult:
    """First ``k`` principal components by deflation.

    Stops early, returning fewer components, once the residual energy drops
    below ``1e-12`` of the starting energy.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    Y = _matrix(data)
    total = float(np.sum(np.abs(Y) ** 2))
    if total == 0:
        raise DegenerateDataError("all data vectors are zero")
    rank = int(np.linalg.matrix_rank(Y))
    vec, val, residual = batched_components(data=Y[None], k=min(k, rank))
    keep = val.shape[1]
    for j in range(val.shape[1]):
        if residual[0, j] < RESIDUAL_RTOL * total:
            keep = j + 1
            break
    return PcaResult(vec[0, :keep].copy(), val[0, :keep].copy(), rank)


def captured_energy(data, q) -> float:
    """``sum_i |<y_i, q>|**2``."""
    Y = _matrix(data)
    return float(np.sum(np.abs(Y @ np.conj(np.asarray(q, dtype=complex))) ** 2))


def scatter(data) -> np.ndarray:
    """``sum_i y_i y_i^H`` (d x d) for data rows ``y_i``."""
    Y = _matrix(data)
    return Y.T @ Y.conj()


def dense_eigenvalues(data) -> np.ndarray:
    """Eigenvalues of the scatter operator, descending, by dense decomposition.

    The nonzero spectrum of ``Y^H Y`` and ``Y Y^H`` agree, so the smaller
    of the two is decomposed.
    """
    Y = _matrix(data)
    G = Y @ Y.conj().T if Y.shape[0] < Y.shape[1] else Y.conj().T @ Y
    return np.sort(np.maximum(np.linalg.eigvalsh(G), 0.0))[::-1]
