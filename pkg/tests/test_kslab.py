import numpy as np
import pytest
from sklearn.base import clone

from teichlab import kslab as ks
from teichlab.exceptions import IllConditioned, KernelDimensionJump, ValidationError


def test_diagonal_closed_form():
    pair = ks.harmonic_projector(np.diag([0.0, 2.0]))
    assert np.allclose(pair.F, np.diag([1.0, 0.0]), atol=1e-15)
    assert np.allclose(pair.G, np.diag([0.0, 0.5]), atol=1e-15)
    assert pair.kernel_dim == 1


@pytest.mark.parametrize("d", [2, 5, 20, 50])
@pytest.mark.parametrize("kernel_dim", [0, 1, 2])
def test_green_identity_planted(d, kernel_dim):
    L, basis = ks.planted_kernel(d, kernel_dim, seed=d)
    pair = ks.harmonic_projector(L)
    assert pair.kernel_dim == kernel_dim
    assert ks.green_identity_residual(pair, L) < 1e-11
    assert ks.basis_green_residual(pair, L) < 1e-11
    # F is the orthogonal projector onto the planted kernel
    assert np.allclose(pair.F, basis @ basis.T, atol=1e-12)


def test_projector_algebra():
    L, _ = ks.planted_kernel(12, 2, seed=4)
    p = ks.harmonic_projector(L)
    assert np.allclose(p.F @ p.F, p.F, atol=1e-12)
    assert np.allclose(L @ p.F, 0, atol=1e-12)
    assert np.allclose(p.G @ p.F, 0, atol=1e-12)
    assert np.allclose(p.F @ p.G, 0, atol=1e-12)


def test_weighted_inner_product():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((6, 6))
    W = a @ a.T + 6 * np.eye(6)
    # L self-adjoint for <u, v> = u^T W v means W L symmetric
    S, _ = ks.planted_kernel(6, 2, seed=2)
    L = np.linalg.solve(W, S)
    p = ks.harmonic_projector(L, weight=W)
    assert p.kernel_dim == 2
    assert np.allclose(p.F @ p.F, p.F, atol=1e-12)
    # W-orthogonal: W F is symmetric
    assert np.allclose(W @ p.F, (W @ p.F).T, atol=1e-12)
    assert ks.basis_green_residual(p, L) < 1e-11


def test_complex_hermitian():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    L = (q * np.array([0, 0, 1.0, 3.0])) @ q.conj().T
    p = ks.harmonic_projector(L)
    assert p.kernel_dim == 2
    assert ks.green_identity_residual(p, L) < 1e-12


def test_rejects_non_selfadjoint():
    with pytest.raises(ValidationError):
        ks.harmonic_projector(np.array([[0.0, 1.0], [0.0, 1.0]]))


def test_ill_conditioned_gap():
    with pytest.raises(IllConditioned):
        ks.harmonic_projector(np.diag([0.0, 5e-9, 1.0]), rank_tol=1e-9)


@pytest.mark.parametrize("delta", [1e-2, 1e-3])
def test_rotation_family_deviation(delta):
    fam = ks.OperatorFamily.from_callable(ks.rotation_family, np.arange(5) * delta)
    rep = ks.projector_continuity(fam)
    # |F(t+d) - F(t)|_F = 2 |sin d| cos d -> sqrt(2) * 2 sin(d/2) ~ sqrt(2) d
    assert abs(rep.max_F_step / delta - np.sqrt(2)) < 0.1 * np.sqrt(2)
    assert rep.passed
    assert set(rep.kernel_dims) == {1}


def test_rotation_deviation_closed_form():
    d = 0.3
    p0 = ks.harmonic_projector(ks.rotation_family(0.0))
    p1 = ks.harmonic_projector(ks.rotation_family(d))
    assert np.linalg.norm(p1.F - p0.F) == pytest.approx(np.sqrt(2) * abs(np.sin(d)), rel=1e-12)


def test_diagonal_crossing_jumps():
    fam = ks.OperatorFamily.from_callable(ks.diagonal_family, [-1e-3, 0.0, 1e-3])
    with pytest.raises(KernelDimensionJump):
        ks.projector_continuity(fam)


def test_diagonal_away_from_crossing_is_continuous():
    fam = ks.OperatorFamily.from_callable(ks.diagonal_family, np.linspace(0.5, 1.0, 6))
    rep = ks.projector_continuity(fam)
    assert rep.max_F_step == 0
    assert rep.max_G_step > 0


def test_planted_family_richardson():
    fam = ks.OperatorFamily.from_callable(ks.planted_family(10), np.arange(7) * 1e-3)
    rep = ks.projector_continuity(fam)
    assert rep.passed
    assert 0.45 < rep.richardson_ratio < 0.55


def test_family_validation():
    with pytest.raises(ValidationError):
        ks.OperatorFamily(np.array([0.0]), [np.eye(2)])
    with pytest.raises(ValidationError):
        ks.OperatorFamily(np.array([1.0, 0.0]), [np.eye(2)] * 2)


def test_estimator():
    L, basis = ks.planted_kernel(8, 2, seed=5)
    est = ks.HarmonicProjector().fit(L)
    assert est.kernel_dim_ == 2
    u = np.random.default_rng(0).standard_normal((3, 8))
    assert np.allclose(est.transform(u), u @ (basis @ basis.T), atol=1e-12)
    assert est.score() > -1e-11
    assert clone(est).get_params() == {"rank_tol": None, "weight": None}


@pytest.mark.parametrize("theta", [0.0, 0.4, 2.0])
def test_rotation_projector_closed_form(theta):
    r = ks.rotation(theta)
    L = ks.rotation_family(theta)
    p = ks.harmonic_projector(L)
    assert np.allclose(p.F, r @ np.diag([1.0, 0.0]) @ r.T, atol=1e-14)
    assert ks.green_identity_residual(p, L) < 1e-12


def test_perturbed_pair_detected():
    L, _ = ks.planted_kernel(10, 2, seed=7)
    p = ks.harmonic_projector(L)
    bad = ks.ProjectorPair(p.F, 1.01 * p.G, p.weight, p.kernel_dim)
    assert ks.green_identity_residual(bad, L) > 1e-4
    assert ks.green_identity_residual(p, L) < 1e-12


def test_diag_example_residual_zero():
    L = np.diag([0.0, 2.0])
    assert ks.green_identity_residual(ks.harmonic_projector(L), L) < 1e-15


def test_weighted_orthogonality_of_ranges():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((7, 7))
    W = a @ a.T + 7 * np.eye(7)
    S, _ = ks.planted_kernel(7, 3, seed=9)
    L = np.linalg.solve(W, S)
    p = ks.harmonic_projector(L, weight=W)
    # <F u, L G v>_W = 0 for all u, v
    assert np.abs(p.F.T @ W @ (L @ p.G)).max() < 1e-12
    assert np.abs(W @ p.F - (W @ p.F).T).max() < 1e-12


def test_constant_kernel_family_has_zero_projector_step():
    fam = ks.OperatorFamily.from_callable(lambda t: np.diag([0.0, 1 + t * t]), np.linspace(0, 1, 5))
    rep = ks.projector_continuity(fam)
    assert rep.max_F_step == 0


def test_halving_delta_halves_deviation():
    steps = []
    for delta in (2e-3, 1e-3):
        fam = ks.OperatorFamily.from_callable(ks.rotation_family, [0.0, delta])
        steps.append(ks.projector_continuity(fam).max_F_step)
    assert 0.4 <= steps[1] / steps[0] <= 0.6


def test_one_sided_jump_has_unit_norm():
    left = ks.harmonic_projector(ks.diagonal_family(-1e-3))
    at = ks.harmonic_projector(ks.diagonal_family(0.0))
    assert np.linalg.norm(at.F - left.F) == pytest.approx(1.0)


def test_jump_raised_exactly_on_dimension_change():
    def family(t):
        return np.diag([max(t, 0.0), 1.0, 2.0])

    ks.projector_continuity(ks.OperatorFamily.from_callable(family, [0.1, 0.25, 0.5]))
    fam = ks.OperatorFamily.from_callable(family, [-0.1, 0.0, 0.1])
    with pytest.raises(KernelDimensionJump):
        ks.projector_continuity(fam)
