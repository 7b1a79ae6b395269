"""Hodge decomposition, Green operators and parametrices."""

import numpy as np
import pytest

from src.analysis.hodge import (
    defect_scaling,
    essential_cutoff,
    green_commutator,
    harmonic_ranks,
    hodge_decompose,
    parametrix,
    transfer_parametrix,
)
from src.builders.perturb import PerturbationSpec, perturb
from src.core.linop import from_array, op_norm
from src.core.quasicomplex import QuasiComplex, short_complex
from src.errors import StepOutOfRange
from tests.conftest import random_complex_matrix, random_exact_complex

HODGE_TOL = 1e-8


class TestDecomposition:

    def test_hodge_identity_on_corpus(self, exact_corpus):
        for name, qc in exact_corpus.items():
            for i in range(qc.N + 1):
                residuals = hodge_decompose(qc, i).residuals
                assert residuals["hodge_identity"] <= HODGE_TOL, name
                assert residuals["summand_orthogonality"] <= HODGE_TOL, name

    def test_projector_and_green_identities(self, torus):
        for i in range(torus.N + 1):
            r = hodge_decompose(torus, i).residuals
            assert r["projector_idempotence"] <= 1e-10
            assert r["projector_selfadjoint"] <= 1e-10
            assert r["green_left"] <= 1e-8
            assert r["green_right"] <= 1e-8
            assert r["green_harmonic"] <= 1e-10

    def test_weighted_random_complex(self, rng):
        qc = random_exact_complex(rng, [3, 6, 5, 2], [2, 3, 2])
        for i in range(qc.N + 1):
            r = hodge_decompose(qc, i).residuals
            assert r["hodge_identity"] <= HODGE_TOL
            assert r["summand_orthogonality"] <= HODGE_TOL

    def test_invertible_laplacian(self, rng):
        m = random_complex_matrix(rng, 3, 3)
        qc = short_complex(from_array(m))
        data = hodge_decompose(qc, 0)
        assert data.harmonic_rank == 0
        assert op_norm(data.harmonic_projector) == 0.0
        expected = np.linalg.inv(m.conj().T @ m)
        np.testing.assert_allclose(data.green.matrix, expected, atol=1e-10 * np.abs(expected).max())

    def test_zero_differentials(self):
        qc = QuasiComplex.from_matrices([np.zeros((3, 2)), np.zeros((1, 3))])
        for i in range(qc.N + 1):
            data = hodge_decompose(qc, i)
            np.testing.assert_allclose(data.harmonic_projector.matrix, np.eye(qc.dims[i]), atol=1e-12)
            assert np.all(data.green.matrix == 0)

    def test_tetrahedron_constants_are_harmonic(self, tetra):
        data = hodge_decompose(tetra, 0)
        assert data.harmonic_rank == 1
        ones = np.ones(4)
        np.testing.assert_allclose(data.harmonic_projector.apply(ones), ones, atol=1e-12)
        np.testing.assert_allclose(data.laplacian.apply(ones), 0, atol=1e-12)

    def test_step_out_of_range(self, tetra):
        with pytest.raises(StepOutOfRange):
            hodge_decompose(tetra, 3)
        with pytest.raises(StepOutOfRange):
            hodge_decompose(tetra, -1)

    def test_harmonic_ranks_are_betti_numbers(self, tetra, torus, genus2):
        assert harmonic_ranks(tetra) == [1, 0, 1]
        assert harmonic_ranks(torus) == [1, 2, 1]
        assert harmonic_ranks(genus2) == [1, 4, 1]

    def test_cutoff(self, tetra, perturbed_tetra):
        assert essential_cutoff(tetra) == 0.0
        assert essential_cutoff(perturbed_tetra) > 0.0

    def test_quasicomplex_keeps_cohomology_dimensions(self, tetra, perturbed_tetra):
        assert harmonic_ranks(perturbed_tetra) == harmonic_ranks(tetra)


class TestParametrix:

    def test_exact_tetrahedron(self, tetra):
        result = parametrix(tetra)
        assert result.is_exact
        assert result.max_defect <= 1e-10

    def test_invertible_short_complex(self, rng):
        m = random_complex_matrix(rng, 3, 3)
        result = parametrix(short_complex(from_array(m)))
        expected = np.linalg.inv(m)
        np.testing.assert_allclose(result.operators[1].matrix, expected, atol=1e-10 * np.abs(expected).max())
        assert result.max_defect <= 1e-10
        assert all(op_norm(h) == 0.0 for h in result.harmonic)

    def test_perturbed_defect_is_curvature_sized(self, tetra):
        result = parametrix(perturb(tetra, PerturbationSpec(eps=1e-4, seed=3)))
        assert not result.is_exact
        assert result.max_defect <= 1e-2

    def test_defect_scales_linearly(self, tetra):
        scaling = defect_scaling(tetra, (1e-3, 1e-4, 1e-5), seed=11)
        assert scaling["slope"] == pytest.approx(1.0, abs=0.2)
        assert list(scaling["table"]["eps"]) == [1e-3, 1e-4, 1e-5]
        assert scaling["table"]["max_defect"].is_monotonic_decreasing

    def test_transfer_to_perturbed_complex(self, torus):
        perturbed = perturb(torus, PerturbationSpec(eps=1e-4, seed=5))
        report = transfer_parametrix(torus, perturbed)
        assert report.within_bounds
        assert max(report.defects) > 0


class TestGreenCommutator:

    def test_vanishes_on_complexes(self, tetra):
        assert max(green_commutator(tetra)["commutators"]) <= 1e-10

    def test_curvature_sized_on_quasicomplexes(self, perturbed_tetra):
        result = green_commutator(perturbed_tetra)
        assert result["max_curvature"] > 0
        assert np.isfinite(result["kappa_prime"])
        assert max(result["commutators"]) <= 1e-1
