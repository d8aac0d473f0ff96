import math

import numpy as np
import pytest

from gframe_lab import gframe, linops, scenarios
from gframe_lab.errors import DimensionMismatch, NotOrthonormal, SpaceMismatch
from gframe_lab.gframe import GFrameFamily
from gframe_lab.measure import CoefficientFamily, DiscretizedMeasureSpace, weighted_inner_product


def identity_family(n=2, mu=1.0):
    sp = DiscretizedMeasureSpace([mu], (n,))
    return GFrameFamily(sp, n, (np.eye(n),))


def random_family(rng, n=5, nodes=7):
    dims = tuple(int(d) for d in rng.integers(1, 4, nodes))
    return scenarios.random_gframe(n, dims, seed=int(rng.integers(1 << 30)))


def random_coeffs(rng, space):
    return CoefficientFamily(space, tuple(rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in space.block_dims))


def test_analysis_trivial_cases(ex15):
    f = np.array([1.0, -2.0j])
    np.testing.assert_array_equal(gframe.analysis(identity_family(), f).blocks[0], f)
    fam = ex15.lambda_family
    assert all(not np.any(b) for b in gframe.analysis(fam, np.zeros(2)).blocks)
    w = fam.space.coordinates
    got = np.array([b[0] for b in gframe.analysis(fam, [1.0, 0.0]).blocks])
    np.testing.assert_allclose(got, np.cos(w), atol=1e-15)
    with pytest.raises(DimensionMismatch):
        gframe.analysis(fam, np.zeros(3))


def test_synthesis_trivial_cases():
    fam = identity_family()
    v = np.array([3.0, 1j])
    np.testing.assert_array_equal(gframe.synthesis(fam, CoefficientFamily(fam.space, (v,))), v)
    assert not np.any(gframe.synthesis(fam, CoefficientFamily.zeros(fam.space)))
    other = DiscretizedMeasureSpace([2.0], (2,))
    with pytest.raises(SpaceMismatch):
        gframe.synthesis(fam, CoefficientFamily.zeros(other))


def test_synthesis_is_adjoint_of_analysis(rng):
    fam = random_family(rng)
    for _ in range(10):
        f = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        c = random_coeffs(rng, fam.space)
        lhs = np.vdot(f, gframe.synthesis(fam, c))  # <T c, f>
        rhs = weighted_inner_product(c, gframe.analysis(fam, f))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


def test_frame_operator_small_cases(ex15):
    np.testing.assert_array_equal(gframe.frame_operator(identity_family()), np.eye(2))
    fam = scenarios.diag_example().lambda_family
    np.testing.assert_allclose(gframe.frame_operator(fam), np.eye(2), atol=0)
    S = gframe.frame_operator(ex15.lambda_family)
    assert linops.operator_norm(S - math.pi * np.eye(2)) <= 1e-10


def test_frame_bounds_reports(ex15):
    rep = gframe.frame_bounds(identity_family())
    assert rep.lower_bound == pytest.approx(1.0) and rep.upper_bound == pytest.approx(1.0)
    assert rep.verdict == "frame" and rep.tight and rep.parseval
    rep = gframe.frame_bounds(ex15.lambda_family)
    assert abs(rep.lower_bound - math.pi) <= 1e-6 and abs(rep.upper_bound - math.pi) <= 1e-6
    assert rep.tight and not rep.parseval
    assert rep.notes


def test_rank_deficient_is_bessel_only():
    s = scenarios.rank_deficient_fixture()
    rep = gframe.frame_bounds(s.lambda_family)
    assert rep.verdict == "bessel_only"
    assert abs(rep.lower_bound) <= 1e-12
    assert rep.upper_bound > 0


def test_zero_family_is_degenerate():
    sp = DiscretizedMeasureSpace([1.0, 1.0], (1, 1))
    fam = GFrameFamily(sp, 2, (np.zeros((1, 2)), np.zeros((1, 2))))
    assert gframe.frame_bounds(fam).verdict == "not_bessel_degenerate"


def test_frame_operator_equals_stacked_composition(rng):
    fam = random_family(rng)
    n = fam.ambient_dim
    # column j of T T* is synthesis(analysis(e_j))
    composed = np.column_stack([gframe.synthesis(fam, gframe.analysis(fam, e)) for e in np.eye(n)])
    assert linops.operator_norm(composed - gframe.frame_operator(fam)) <= 1e-12 * linops.operator_norm(composed)


def test_quadratic_form_matches_operator(rng):
    fam = random_family(rng)
    S = gframe.frame_operator(fam)
    for _ in range(100):
        f = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        q = gframe.quadratic_form(fam, f)
        assert abs(np.vdot(f, S @ f) - q) <= 1e-12 * q


def test_optimal_bounds_are_attained(rng):
    fam = random_family(rng)
    rep = gframe.frame_bounds(fam)
    lam, V = linops.hermitian_eigendecomposition(gframe.frame_operator(fam))
    assert gframe.quadratic_form(fam, V[:, 0]) == pytest.approx(rep.lower_bound, abs=linops.EIG_TOL * rep.upper_bound)
    assert gframe.quadratic_form(fam, V[:, -1]) == pytest.approx(rep.upper_bound, abs=linops.EIG_TOL * rep.upper_bound)


def test_induced_sequence_cases(ex15):
    seq = gframe.induced_sequence(identity_family(3))
    np.testing.assert_array_equal(seq.vectors, np.eye(3))
    seq = gframe.induced_sequence(ex15.lambda_family)
    w = ex15.space.coordinates
    np.testing.assert_allclose(seq.vectors, np.column_stack([np.cos(w), np.sin(w)]), atol=1e-15)
    np.testing.assert_array_equal(seq.weights, ex15.space.weights)


def test_induced_sequence_preserves_form_and_bounds(rng):
    fam = random_family(rng)
    bases = [scenarios.random_unitary(rng, d) for d in fam.space.block_dims]
    seq = gframe.induced_sequence(fam, bases)
    S = gframe.frame_operator(fam)
    for _ in range(20):
        f = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        total = sum(m * abs(np.vdot(u, f)) ** 2 for m, u in zip(seq.weights, seq.vectors))
        assert total == pytest.approx(np.vdot(f, S @ f).real, rel=1e-12)
    a = gframe.frame_bounds(fam)
    b = gframe.vector_family_bounds(seq.vectors, seq.weights)
    assert b.lower_bound == pytest.approx(a.lower_bound, rel=1e-10, abs=1e-12)
    assert b.upper_bound == pytest.approx(a.upper_bound, rel=1e-10)


def test_induced_sequence_rejects_bad_basis():
    fam = identity_family(2)
    with pytest.raises(NotOrthonormal):
        gframe.induced_sequence(fam, [np.array([[1.0, 1.0], [0.0, 1.0]])])


def test_mixed_frame_operator(rng):
    fam = random_family(rng)
    S = gframe.frame_operator(fam)
    np.testing.assert_allclose(gframe.mixed_frame_operator(fam, fam), S, atol=1e-13)
    zero = fam.map_blocks(lambda B: np.zeros_like(B))
    assert not np.any(gframe.mixed_frame_operator(fam, zero))
    other = scenarios.random_gframe(5, fam.space.block_dims, weights=fam.space.weights, seed=99)
    M = gframe.mixed_frame_operator(fam, other)
    N = gframe.mixed_frame_operator(other, fam)
    assert linops.operator_norm(M.conj().T - N) <= 1e-12 * linops.operator_norm(M)
