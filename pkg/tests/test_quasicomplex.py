"""Sequence model, curvature, adjoint sequences and Laplacians."""

import numpy as np
import pytest

from src.analysis.cohomology import betti
from src.builders.perturb import PerturbationSpec, perturb
from src.core.linop import InnerProductSpace, LinearOp, adjoint, from_array, kernel_basis, op_norm
from src.core.quasicomplex import (
    QuasiComplex,
    adjoint_sequence,
    is_exact,
    laplacian,
    laplacian_commutator,
    laplacians,
    short_complex,
    validate,
)
from src.errors import ParseError, ShapeMismatch
from tests.conftest import random_complex_matrix, random_exact_complex, random_gram


def assert_harmonic_kernel_is_intersection(qc, tol=1e-8):
    """ker Delta^i equals ker A^i intersected with ker A^{i-1}*, both inclusions and dimension."""
    for i in range(qc.N + 1):
        above, below_adj = qc.diff(i), adjoint(qc.diff(i - 1))
        delta = laplacian(qc, i)
        harmonic = kernel_basis(delta)
        assert np.linalg.norm(above.matrix @ harmonic) <= tol
        assert np.linalg.norm(below_adj.matrix @ harmonic) <= tol

        k = kernel_basis(above)
        both = k @ kernel_basis(from_array(below_adj.matrix @ k))
        assert both.shape[1] == harmonic.shape[1]
        assert np.linalg.norm(delta.matrix @ both) <= tol


class TestConstruction:

    def test_from_matrices_reads_dimensions(self, tetra):
        qc = QuasiComplex.from_matrices([d.matrix for d in tetra.diffs])
        assert qc.dims == [4, 6, 4]
        assert qc.N == 2
        assert qc.order_list == [0.0, 0.0]

    def test_chain_mismatch(self):
        with pytest.raises(ShapeMismatch):
            QuasiComplex.from_matrices([np.ones((2, 3)), np.ones((2, 3))])

    def test_wrong_number_of_orders(self):
        with pytest.raises(ShapeMismatch):
            QuasiComplex.from_matrices([np.ones((2, 3))], orders=[1.0, 1.0])

    def test_out_of_range_differentials_are_zero(self, tetra):
        assert tetra.diff(-1).shape == (4, 0)
        assert tetra.diff(2).shape == (0, 4)
        assert tetra.space(5).dim == 0

    def test_euler_count(self, tetra, torus):
        assert tetra.euler_count == 2
        assert torus.euler_count == 0

    def test_from_dict_rejects_bad_shapes(self, tetra):
        data = tetra.to_dict()
        data["spaces"][1]["dim"] = 5
        with pytest.raises(ShapeMismatch):
            QuasiComplex.from_dict(data)

    def test_from_dict_rejects_missing_keys(self):
        with pytest.raises(ParseError):
            QuasiComplex.from_dict({"diffs": []})

    def test_weighted_spaces_survive_serialization(self, rng):
        gram = random_gram(rng, 3)
        qc = QuasiComplex.from_matrices([random_complex_matrix(rng, 3, 2)], grams=[None, gram])
        restored = QuasiComplex.from_dict(qc.to_dict())
        np.testing.assert_allclose(restored.spaces[1].gram_matrix, qc.spaces[1].gram_matrix)
        np.testing.assert_allclose(restored.diffs[0].matrix, qc.diffs[0].matrix)


class TestCurvature:

    def test_tetrahedron_is_exact(self, tetra):
        report = validate(tetra)
        assert report.is_exact
        assert report.max_absolute <= 1e-14

    def test_single_operator_has_no_curvature(self, rng):
        report = validate(short_complex(from_array(random_complex_matrix(rng, 3, 2))))
        assert report.absolute == []
        assert report.is_exact

    def test_perturbed_tetrahedron(self, perturbed_tetra):
        report = validate(perturbed_tetra)
        assert not report.is_exact
        assert 0 < report.max_relative <= 3e-3

    def test_large_curvature_is_reported_not_rejected(self):
        qc = QuasiComplex.from_matrices([np.eye(2), np.eye(2)])
        report = validate(qc)
        assert report.relative == [pytest.approx(1.0)]
        assert not report.is_exact

    def test_floor_applies_to_tiny_operators(self):
        qc = QuasiComplex.from_matrices([1e-7 * np.eye(2), 1e-7 * np.eye(2)])
        assert is_exact(qc)

    @pytest.mark.parametrize("eps", [1e-2, 1e-4])
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("rank_limit", [None, 1])
    def test_perturbation_curvature_bound(self, tetra, torus, eps, seed, rank_limit):
        for qc in (tetra, torus):
            norms = [op_norm(d) for d in qc.diffs]
            report = validate(perturb(qc, PerturbationSpec(eps=eps, seed=seed, rank_limit=rank_limit)))
            for i, c in enumerate(report.absolute):
                assert 0 < c <= eps * (norms[i + 1] + norms[i] + eps) * (1 + 1e-9) + 1e-14


class TestAdjointSequence:

    def test_short_complex(self, rng):
        a = from_array(random_complex_matrix(rng, 3, 2))
        adj = adjoint_sequence(short_complex(a))
        assert adj.dims == [3, 2]
        np.testing.assert_allclose(adj.diffs[0].matrix, a.matrix.conj().T)

    def test_exactness_preserved(self, tetra):
        assert validate(adjoint_sequence(tetra)).max_absolute <= 1e-12

    def test_betti_numbers_reverse(self, tetra, torus):
        for qc in (tetra, torus):
            original = betti(qc).betti
            assert betti(adjoint_sequence(qc)).betti == original[::-1]

    def test_curvature_reverses_on_quasicomplexes(self, rng, perturbed_tetra, torus):
        weighted = random_exact_complex(rng, [3, 5, 4, 2], [2, 2, 1])
        for qc in (
            perturbed_tetra,
            perturb(torus, PerturbationSpec(eps=1e-3, seed=2)),
            perturb(weighted, PerturbationSpec(eps=1e-2, seed=1)),
        ):
            forward = validate(qc).absolute
            backward = validate(adjoint_sequence(qc)).absolute
            assert len(backward) == len(forward) > 0
            np.testing.assert_allclose(backward, forward[::-1], rtol=1e-8)


class TestLaplacians:

    def test_short_complex_convention(self, rng):
        dom = InnerProductSpace(2, random_gram(rng, 2))
        a = LinearOp(dom, InnerProductSpace(3), random_complex_matrix(rng, 3, 2))
        delta = laplacians(short_complex(a))
        assert op_norm(delta[0] - adjoint(a) @ a) <= 1e-12 * op_norm(delta[0])
        assert op_norm(delta[1] - a @ adjoint(a)) <= 1e-12 * op_norm(delta[1])

    def test_self_adjoint(self, torus):
        for i in range(torus.N + 1):
            delta = laplacian(torus, i)
            assert op_norm(delta - adjoint(delta)) <= 1e-12

    def test_commute_with_differentials_on_complexes(self, tetra, torus):
        for qc in (tetra, torus):
            assert max(laplacian_commutator(qc)) <= 1e-12

    def test_commutator_is_small_for_quasicomplexes(self, tetra, perturbed_tetra):
        curvature = validate(perturbed_tetra).max_absolute
        norms = [op_norm(d) for d in perturbed_tetra.diffs]
        assert 0 < max(laplacian_commutator(perturbed_tetra)) <= 4 * curvature * max(norms)

    @pytest.mark.parametrize("name", ["tetra", "torus", "genus2"])
    def test_kernel_is_intersection_of_kernels(self, request, name):
        assert_harmonic_kernel_is_intersection(request.getfixturevalue(name))

    def test_kernel_is_intersection_of_kernels_weighted(self, rng):
        for _ in range(5):
            assert_harmonic_kernel_is_intersection(random_exact_complex(rng, [3, 5, 4, 2], [2, 2, 1]))
