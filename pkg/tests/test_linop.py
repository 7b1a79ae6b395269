"""Metric-aware operators, rank policy, adjoints and pseudo-inverses."""

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st
from hypothesis.extra.numpy import arrays

from src.core.linop import (
    InnerProductSpace,
    LinearOp,
    adjoint,
    from_array,
    identity,
    image_basis,
    index,
    kernel_basis,
    op_norm,
    orthogonal_projector,
    pinv,
    rank_profile,
    zero,
)
from src.errors import InvalidMetric, ShapeMismatch
from tests.conftest import random_complex_matrix, random_gram

small_ints = st.integers(min_value=-5, max_value=5).map(float)


class TestSpaces:

    def test_zero_space_is_legal(self):
        space = InnerProductSpace(0)
        assert space.dim == 0
        assert identity(space).shape == (0, 0)

    def test_rejects_non_hermitian_gram(self):
        with pytest.raises(InvalidMetric):
            InnerProductSpace(2, np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_rejects_indefinite_gram(self):
        with pytest.raises(InvalidMetric):
            InnerProductSpace(2, np.diag([1.0, -1.0]))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ShapeMismatch):
            InnerProductSpace(3, np.eye(2))

    def test_orthonormal_round_trip(self, rng):
        space = InnerProductSpace(4, random_gram(rng, 4))
        x = random_complex_matrix(rng, 4, 2)
        np.testing.assert_allclose(space.from_orthonormal(space.to_orthonormal(x)), x, atol=1e-12)

    def test_inner_product_uses_metric(self):
        space = InnerProductSpace(2, np.diag([2.0, 1.0]))
        assert space.inner(np.array([1.0, 0.0]), np.array([1.0, 0.0])) == pytest.approx(2.0)


class TestOperators:

    def test_shape_checked(self):
        with pytest.raises(ShapeMismatch):
            LinearOp(InnerProductSpace(2), InnerProductSpace(3), np.zeros((2, 2)))

    def test_composition_requires_matching_spaces(self):
        a = from_array(np.ones((2, 3)))
        with pytest.raises(ShapeMismatch):
            a @ a

    def test_arithmetic(self):
        a = from_array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose((a + a - 0.5 * a).matrix, 1.5 * a.matrix)
        np.testing.assert_allclose((-a).matrix, -a.matrix)


class TestAdjoint:

    def test_orthonormal_adjoint_is_conjugate_transpose(self, rng):
        m = random_complex_matrix(rng, 3, 5)
        np.testing.assert_allclose(adjoint(from_array(m)).matrix, m.conj().T)

    def test_zero_operator(self):
        z = zero(InnerProductSpace(2), InnerProductSpace(3))
        assert np.all(adjoint(z).matrix == 0)

    def test_weighted_domain(self):
        dom = InnerProductSpace(2, np.diag([2.0, 1.0]))
        op = LinearOp(dom, InnerProductSpace(1), np.array([[1.0, 0.0]]))
        np.testing.assert_allclose(adjoint(op).matrix, [[0.5], [0.0]], atol=1e-15)

    def test_defining_identity(self, rng):
        dom = InnerProductSpace(3, random_gram(rng, 3))
        cod = InnerProductSpace(4, random_gram(rng, 4))
        op = LinearOp(dom, cod, random_complex_matrix(rng, 4, 3))
        u = random_complex_matrix(rng, 3, 1)[:, 0]
        v = random_complex_matrix(rng, 4, 1)[:, 0]
        lhs = cod.inner(op.apply(u), v)
        rhs = dom.inner(u, adjoint(op).apply(v))
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_defining_identity_over_random_pairs(self, rng):
        for _ in range(100):
            m, n = (int(k) for k in rng.integers(1, 6, size=2))
            dom = InnerProductSpace(n, random_gram(rng, n))
            cod = InnerProductSpace(m, random_gram(rng, m))
            op = LinearOp(dom, cod, random_complex_matrix(rng, m, n))
            u = random_complex_matrix(rng, n, 1)[:, 0]
            v = random_complex_matrix(rng, m, 1)[:, 0]
            lhs = cod.inner(op.apply(u), v)
            rhs = dom.inner(u, adjoint(op).apply(v))
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))

    def test_adjoint_is_an_involution(self, rng):
        dom = InnerProductSpace(3, random_gram(rng, 3))
        cod = InnerProductSpace(2, random_gram(rng, 2))
        op = LinearOp(dom, cod, random_complex_matrix(rng, 2, 3))
        np.testing.assert_allclose(adjoint(adjoint(op)).matrix, op.matrix, atol=1e-12 * np.abs(op.matrix).max())


class TestRank:

    def test_identity(self):
        assert rank_profile(from_array(np.eye(2))).rank == 2

    def test_tiny_singular_value_dropped(self):
        assert rank_profile(from_array(np.diag([1.0, 1e-14]))).rank == 1

    def test_singular_values_descending(self, rng):
        s = rank_profile(from_array(random_complex_matrix(rng, 5, 4))).singular_values
        assert np.all(np.diff(s) <= 0)

    def test_tetrahedron_vertex_coboundary(self, tetra):
        assert rank_profile(tetra.diffs[0]).rank == 3

    def test_empty_operator(self):
        assert rank_profile(zero(InnerProductSpace(0), InnerProductSpace(3))).rank == 0

    @pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
    def test_tolerance_out_of_range(self, tol):
        with pytest.raises(ValueError):
            rank_profile(from_array(np.eye(2)), tol)

    @given(arrays(np.float64, (4, 3), elements=small_ints))
    @hsettings(max_examples=60, deadline=None)
    def test_rank_matches_adjoint(self, m):
        op = from_array(m)
        assert rank_profile(op).rank == rank_profile(adjoint(op)).rank

    @pytest.mark.parametrize("rank", [0, 1, 2, 3])
    def test_rank_matches_adjoint_weighted(self, rng, rank):
        dom = InnerProductSpace(4, random_gram(rng, 4))
        cod = InnerProductSpace(3, random_gram(rng, 3))
        matrix = random_complex_matrix(rng, 3, 4, rank=rank) if rank else np.zeros((3, 4))
        op = LinearOp(dom, cod, matrix)
        assert rank_profile(op).rank == rank_profile(adjoint(op)).rank == rank

    @given(arrays(np.float64, (4, 3), elements=small_ints))
    @hsettings(max_examples=60, deadline=None)
    def test_rank_nullity(self, m):
        op = from_array(m)
        r = rank_profile(op).rank
        assert kernel_basis(op).shape[1] == 3 - r
        assert image_basis(op).shape[1] == r


class TestPseudoInverse:

    def test_invertible(self, rng):
        m = random_complex_matrix(rng, 3, 3)
        np.testing.assert_allclose(pinv(from_array(m)).matrix, np.linalg.inv(m), atol=1e-12 * np.linalg.cond(m))

    def test_zero(self):
        assert np.all(pinv(from_array(np.zeros((2, 3)))).matrix == 0)

    def test_diagonal(self):
        np.testing.assert_allclose(pinv(from_array(np.diag([2.0, 0.0]))).matrix, np.diag([0.5, 0.0]))

    def test_moore_penrose_identities_weighted(self, rng):
        dom = InnerProductSpace(4, random_gram(rng, 4))
        cod = InnerProductSpace(3, random_gram(rng, 3))
        a = LinearOp(dom, cod, random_complex_matrix(rng, 3, 4, rank=2))
        p = pinv(a)
        scale = op_norm(a) * op_norm(p)
        assert op_norm(a @ p @ a - a) <= 1e-10 * op_norm(a) * scale
        assert op_norm(p @ a @ p - p) <= 1e-10 * op_norm(p) * scale
        ap, pa = a @ p, p @ a
        assert op_norm(ap - adjoint(ap)) <= 1e-10 * scale
        assert op_norm(pa - adjoint(pa)) <= 1e-10 * scale


class TestNorm:

    def test_identity(self):
        assert op_norm(identity(InnerProductSpace(3))) == pytest.approx(1.0)

    def test_diagonal(self):
        assert op_norm(from_array(np.diag([3.0, 1.0]))) == pytest.approx(3.0)

    def test_weighted_domain(self):
        dom = InnerProductSpace(2, np.diag([4.0, 1.0]))
        op = LinearOp(dom, InnerProductSpace(2), np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert op_norm(op) == pytest.approx(1.0)

    def test_empty(self):
        assert op_norm(zero(InnerProductSpace(0), InnerProductSpace(0))) == 0.0


class TestProjectorsAndIndex:

    def test_kernel_projector_is_orthogonal(self, rng):
        dom = InnerProductSpace(5, random_gram(rng, 5))
        a = LinearOp(dom, InnerProductSpace(3), random_complex_matrix(rng, 3, 5, rank=2))
        p = orthogonal_projector(dom, kernel_basis(a))
        assert op_norm(p @ p - p) <= 1e-10
        assert op_norm(p - adjoint(p)) <= 1e-10
        assert op_norm(a @ p) <= 1e-10 * op_norm(a)

    def test_projector_on_zero_space(self):
        space = InnerProductSpace(0)
        assert orthogonal_projector(space, np.zeros((0, 0))).shape == (0, 0)
        assert orthogonal_projector(space, kernel_basis(zero(space, InnerProductSpace(3)))).shape == (0, 0)

    def test_projector_onto_nothing(self):
        space = InnerProductSpace(3)
        assert np.all(orthogonal_projector(space, np.zeros((3, 0))).matrix == 0)

    @pytest.mark.parametrize("rows,cols,rank", [(2, 2, 1), (3, 5, 3), (6, 4, 2)])
    def test_index_is_dimension_difference(self, rng, rows, cols, rank):
        op = from_array(random_complex_matrix(rng, rows, cols, rank=rank))
        assert index(op) == cols - rows
