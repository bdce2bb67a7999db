import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasicyclic import pca, synth
from quasicyclic.qpca import (
    PhasePolicy,
    QpcaConfig,
    ShiftOrthonormalityError,
    _coset_grams,
    assemble,
    augment,
    captured_energies,
    energy_fraction,
    extend_truncate,
    family_gram,
    objective_from_cosets,
    project_family,
    qpca,
    rephase,
    solve_coset,
    zero_phase,
)
from quasicyclic.signal_core import Dataset, dft, idft, is_shift_orthonormal


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def direct_objective(Y, q, s):
    """sum_i sum_j |<y_i, q (*) e_{js}>|**2 by explicit shifting."""
    n = q.size
    return sum(abs(np.vdot(np.roll(q, j * s), y)) ** 2 for y in Y for j in range(n // s))


def projector(vectors):
    V = np.atleast_2d(vectors)
    return V.T @ V.conj()


# ---------------------------------------------------------------- config

def test_config_validation():
    with pytest.raises(ValueError):
        QpcaConfig(s=0)
    with pytest.raises(ValueError):
        QpcaConfig(s=2.5)
    with pytest.raises(ValueError):
        QpcaConfig(s=3, num_components=0)
    assert QpcaConfig(s=3, phase_policy="zero_phase").phase_policy is PhasePolicy.ZERO_PHASE


# ---------------------------------------------------------------- extend_truncate

def test_truncate_drops_tail():
    d = Dataset(np.arange(200.0).reshape(2, 100))
    out = extend_truncate(d, 9)
    assert out.n == 99
    assert np.array_equal(out.vectors, d.vectors[:, :99])


def test_truncate_identity_and_example_three():
    d = Dataset(np.ones((1, 90)))
    assert extend_truncate(d, 9) is d
    assert extend_truncate(Dataset(np.ones((1, 850))), 9).n == 846


def test_truncate_needs_one_period():
    with pytest.raises(ValueError):
        extend_truncate(Dataset(np.ones((1, 5))), 6)


# ---------------------------------------------------------------- augment

def test_augment_layout_and_shift_theorem():
    rng = np.random.default_rng(0)
    m, N, s = 3, 4, 5
    Y = crandn(rng, m, N * s)
    Z = augment(dft(Y), N)
    assert Z.shape == (m * N, N * s)
    assert np.allclose(np.abs(Z), np.tile(np.abs(dft(Y)), (N, 1)))
    for j in range(N):
        for i in range(m):
            assert np.allclose(idft(Z[i + m * j]), np.roll(Y[i], j * s), atol=1e-12)
    assert np.array_equal(Z[:m], dft(Y))


def test_augment_single_shift_is_identity():
    Y_hat = crandn(np.random.default_rng(1), 2, 7)
    assert np.array_equal(augment(Y_hat, 1), Y_hat)


def test_augment_rejects_bad_N():
    with pytest.raises(ValueError):
        augment(np.zeros((1, 10)), 3)


# ---------------------------------------------------------------- solve_coset

def test_solve_coset_matches_dense_and_norm():
    rng = np.random.default_rng(2)
    m, N, s = 4, 3, 2
    Y_hat = dft(crandn(rng, m, N * s))
    Z = augment(Y_hat, N)
    for t in range(N):
        v, lam = solve_coset(Z, t, N)
        assert np.vdot(v, v).real == pytest.approx(1 / N, abs=1e-12)
        C = pca.scatter(Z[:, t::N])
        w, V = np.linalg.eigh(C)
        assert lam == pytest.approx(w[-1], rel=1e-9)
        assert abs(np.vdot(V[:, -1], v)) * np.sqrt(N) > 1 - 1e-9


def test_solve_coset_single_coset_is_pca():
    Z = crandn(np.random.default_rng(3), 5, 4)
    v, lam = solve_coset(Z, 0, 1)
    q, mu = pca.first_component(Z)
    assert np.allclose(v, q) and lam == pytest.approx(mu)
    assert np.linalg.norm(v) == pytest.approx(1)


def test_solve_coset_rejects_bad_t():
    with pytest.raises(ValueError):
        solve_coset(np.zeros((2, 6)), 3, 3)


@pytest.mark.parametrize("m,N,s", [(1, 1, 3), (4, 3, 2), (5, 6, 9), (2, 10, 1)])
def test_compact_grams_equal_augmented_scatter(m, N, s):
    Y_hat = dft(crandn(np.random.default_rng(m * N * s), m, N * s))
    Z = augment(Y_hat, N)
    G = _coset_grams(Y_hat, N)
    for t in range(N):
        assert np.allclose(G[t], pca.scatter(Z[:, t::N]), atol=1e-10)


# ---------------------------------------------------------------- qpca

def test_reduces_to_pca_when_one_period():
    rng = np.random.default_rng(4)
    X = crandn(rng, 12, 7)
    res = qpca(Dataset(X), QpcaConfig(s=7))
    assert res.N == 1
    _, centered = pca.center(Dataset(X))
    q, lam = pca.first_component(centered)
    assert abs(np.vdot(q, res.components[0])) > 1 - 1e-9
    assert res.lambdas[0] == pytest.approx(lam / centered.energy(), rel=1e-9)


def test_intro_pulse_recovery():
    N, s = 6, 9
    phi = synth.periodic_rrc_pulse(N, s, 0.5)
    a = synth.draw_symbols("pam4", (100, N), np.random.default_rng(0))
    res = qpca(Dataset(synth.shift_modulate(a, phi, s)), QpcaConfig(s))
    overlaps = [abs(np.vdot(np.roll(phi, j * s), res.components[0])) for j in range(N)]
    assert max(overlaps) > 0.99
    assert res.lambdas[0] > 0.99


def test_objective_matches_time_domain_and_cosets():
    rng = np.random.default_rng(5)
    for m, N, s in [(6, 4, 3), (3, 5, 2), (10, 2, 6)]:
        X = crandn(rng, m, N * s)
        res = qpca(Dataset(X), QpcaConfig(s, num_components=min(2, s)))
        _, centered = pca.center(Dataset(X))
        Y = centered.vectors
        for j in range(res.k):
            direct = direct_objective(Y, res.components[j], s)
            assert objective_from_cosets(res, j) == pytest.approx(direct, rel=1e-8)
            assert res.lambdas[j] == pytest.approx(direct / centered.energy(), rel=1e-8)


def test_explicit_augmentation_route_agrees():
    rng = np.random.default_rng(6)
    m, N, s = 5, 4, 3
    X = crandn(rng, m, N * s)
    res = qpca(Dataset(X), QpcaConfig(s))
    _, centered = pca.center(Dataset(X))
    Z = augment(dft(centered.vectors), N)
    per_coset = [solve_coset(Z, t, N) for t in range(N)]
    q_hat = assemble(np.array([v for v, _ in per_coset]), N)
    assert np.allclose(res.coset_eigenvalues[0], [lam for _, lam in per_coset], rtol=1e-9)
    # identical up to per-coset phase: compare coset projectors
    for t in range(N):
        assert np.allclose(projector(q_hat[t::N]), projector(res.spectra[0][t::N]), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 6), st.integers(1, 6), st.integers(1, 4),
       st.sampled_from(list(PhasePolicy)), st.integers(0, 2**32))
def test_result_invariants(m, N, s, k, policy, seed):
    X = crandn(np.random.default_rng(seed), m, N * s)
    if m == 1:
        X = np.vstack([X, crandn(np.random.default_rng(seed + 1), 1, N * s)])
    res = qpca(Dataset(X), QpcaConfig(s, num_components=k, phase_policy=policy))
    assert 1 <= res.k <= min(k, s)
    for q in res.components:
        assert is_shift_orthonormal(q, s, tol=1e-9)
    G = family_gram(res.components, s)
    assert np.max(np.abs(G - np.eye(res.k * N))) < 1e-8
    assert np.all(np.diff(res.lambdas) <= 1e-9)
    assert np.all(res.lambdas >= -1e-12)
    assert res.lambdas.sum() <= 1 + 1e-9


def test_full_set_of_components_captures_everything():
    X = crandn(np.random.default_rng(7), 20, 24)
    res = qpca(Dataset(X), QpcaConfig(4, num_components=4))
    assert res.k == 4
    assert res.lambdas.sum() == pytest.approx(1.0, abs=1e-9)


def test_component_list_truncates_when_data_is_exhausted():
    N, s = 6, 9
    phi = synth.random_shift_orthonormal_pulse(N, s, np.random.default_rng(8))
    a = synth.draw_symbols("qam16", (40, N), np.random.default_rng(9))
    res = qpca(Dataset(synth.shift_modulate(a, phi, s)), QpcaConfig(s, num_components=3))
    assert res.k == 1
    assert res.lambdas[0] == pytest.approx(1.0, abs=1e-9)


def test_phase_ambiguity_leaves_lambda_unchanged():
    rng = np.random.default_rng(10)
    X = crandn(rng, 15, 40)
    res = qpca(Dataset(X), QpcaConfig(8))
    _, centered = pca.center(Dataset(X))
    for _ in range(10):
        q = idft(rephase(res.spectra[0], res.N, rng.uniform(0, 2 * np.pi, res.N)))
        assert energy_fraction(centered, q, 8) == pytest.approx(res.lambdas[0], abs=1e-10)


def test_thread_count_does_not_change_results():
    X = crandn(np.random.default_rng(11), 30, 12 * 5)
    base = qpca(Dataset(X), QpcaConfig(5, num_components=3, threads=1))
    for threads in (2, 3, 8, 64):
        other = qpca(Dataset(X), QpcaConfig(5, num_components=3, threads=threads))
        assert np.array_equal(base.components, other.components)
        assert np.array_equal(base.lambdas, other.lambdas)
        assert np.array_equal(base.coset_eigenvalues, other.coset_eigenvalues)


def test_beats_random_shift_orthonormal_pulses():
    rng = np.random.default_rng(12)
    m, N, s = 4, 4, 2
    X = crandn(rng, m, N * s)
    res = qpca(Dataset(X), QpcaConfig(s))
    _, centered = pca.center(Dataset(X))
    best = max(direct_objective(centered.vectors, synth.random_shift_orthonormal_pulse(N, s, rng), s)
               for _ in range(2000))
    assert direct_objective(centered.vectors, res.components[0], s) >= best


# ---------------------------------------------------------------- phase policies

def test_leading_real_policy():
    res = qpca(Dataset(crandn(np.random.default_rng(13), 6, 20)), QpcaConfig(4))
    for t in range(res.N):
        block = res.spectra[0][t::res.N]
        lead = block[np.argmax(np.abs(block) > 1e-10 * np.abs(block).max())]
        assert lead.imag == 0 and lead.real > 0


@pytest.mark.parametrize("N,s,alpha", [(6, 9, 0.5), (9, 4, 0.9), (8, 5, 0.2)])
def test_zero_phase_recovers_real_pulse(N, s, alpha):
    phi = synth.periodic_rrc_pulse(N, s, alpha)
    a = synth.draw_symbols("qam16", (50, N), np.random.default_rng(N))
    data = Dataset(synth.shift_modulate(a, phi, s))
    res = qpca(data, QpcaConfig(s, phase_policy="zero_phase"))
    q = res.components[0]
    assert np.linalg.norm(q.imag) < 1e-8
    assert is_shift_orthonormal(q, s)
    lr = qpca(data, QpcaConfig(s))
    assert res.lambdas[0] == pytest.approx(lr.lambdas[0], abs=1e-12)


@pytest.mark.parametrize("N,s", [(3, 2), (4, 3), (5, 2), (2, 4)])
def test_zero_phase_minimizes_imaginary_energy(N, s):
    rng = np.random.default_rng(N * 10 + s)
    q_hat = dft(synth.random_shift_orthonormal_pulse(N, s, rng))
    best = zero_phase(q_hat, N)
    achieved = np.linalg.norm(idft(best).imag) ** 2
    assert np.allclose(np.abs(best), np.abs(q_hat))
    trials = [np.linalg.norm(idft(rephase(q_hat, N, rng.uniform(0, 2 * np.pi, N))).imag) ** 2
              for _ in range(5000)]
    assert achieved <= min(trials) + 1e-12


# ---------------------------------------------------------------- projections

def test_project_family_basics():
    rng = np.random.default_rng(14)
    N, s = 5, 3
    q = synth.random_shift_orthonormal_pulse(N, s, rng)
    assert np.allclose(project_family(q, q, s), q, atol=1e-12)
    assert np.allclose(project_family(np.roll(q, 2 * s), q, s), np.roll(q, 2 * s), atol=1e-12)
    # a vector orthogonal to every shift
    F = np.stack([np.roll(q, j * s) for j in range(N)])
    y = crandn(rng, N * s)
    y -= F.T @ (F.conj() @ y)
    assert np.allclose(project_family(y, q, s), 0, atol=1e-12)
    z = crandn(rng, N * s)
    p = project_family(z, q, s)
    coeffs = F.conj() @ z
    assert np.linalg.norm(p) ** 2 == pytest.approx(np.sum(np.abs(coeffs) ** 2), rel=1e-12)
    assert np.allclose(p, F.T @ coeffs, atol=1e-12)


def test_project_family_requires_orthonormal_pulse():
    with pytest.raises(ShiftOrthonormalityError):
        project_family(np.ones(6), np.ones(6), 2)


def test_energy_fraction_extremes():
    rng = np.random.default_rng(15)
    N, s = 4, 4
    q = synth.random_shift_orthonormal_pulse(N, s, rng)
    inside = synth.shift_modulate(crandn(rng, 5, N), q, s)
    assert energy_fraction(inside, q, s) == pytest.approx(1, abs=1e-12)
    F = np.stack([np.roll(q, j * s) for j in range(N)])
    outside = crandn(rng, 5, N * s)
    outside -= (outside @ F.conj().T) @ F
    assert energy_fraction(outside, q, s) == pytest.approx(0, abs=1e-12)
    with pytest.raises(pca.DegenerateDataError):
        energy_fraction(np.zeros((2, 16)), q, s)
    per = captured_energies(inside, q, s)
    assert np.allclose(per, np.sum(np.abs(inside) ** 2, axis=1))
