"""Shared fixtures: corpus complexes and settings isolation."""

import numpy as np
import pytest

from config.settings import MESHES_DIR, set_settings
from src.builders.derham import derham_complex
from src.builders.meshes import load_mesh, torus_grid
from src.builders.perturb import PerturbationSpec, perturb


@pytest.fixture(autouse=True)
def fresh_settings():
    set_settings(None)
    yield
    set_settings(None)


@pytest.fixture(scope="session")
def tetra_mesh():
    return load_mesh(MESHES_DIR / "tetrahedron.off")


@pytest.fixture(scope="session")
def tetra(tetra_mesh):
    return derham_complex(tetra_mesh)


@pytest.fixture(scope="session")
def torus_mesh():
    return torus_grid(3)


@pytest.fixture(scope="session")
def torus(torus_mesh):
    return derham_complex(torus_mesh)


@pytest.fixture(scope="session")
def icosa():
    return derham_complex(load_mesh(MESHES_DIR / "icosahedron.off"))


@pytest.fixture(scope="session")
def genus2():
    return derham_complex(load_mesh(MESHES_DIR / "genus2.off"))


@pytest.fixture(scope="session")
def exact_corpus(tetra, torus, icosa, genus2):
    return {"tetrahedron": tetra, "torus": torus, "icosahedron": icosa, "genus2": genus2}


@pytest.fixture
def perturbed_tetra(tetra):
    return perturb(tetra, PerturbationSpec(eps=1e-3, seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_complex_matrix(rng, rows, cols, rank=None):
    """Complex Gaussian matrix, optionally of limited rank."""
    if rank is None:
        return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    left = rng.standard_normal((rows, rank)) + 1j * rng.standard_normal((rows, rank))
    right = rng.standard_normal((rank, cols)) + 1j * rng.standard_normal((rank, cols))
    return left @ right


def random_gram(rng, n):
    """Well-conditioned Hermitian positive-definite matrix."""
    x = random_complex_matrix(rng, n, n)
    return x @ x.conj().T + n * np.eye(n)


def random_exact_complex(rng, dims, ranks, weighted=True):
    """
    Random complex with prescribed dimensions and differential ranks.

    Each differential is killed on the image of the previous one by the
    metric-orthogonal projector, so the result is exact to roundoff.
    """
    from src.core.linop import InnerProductSpace, LinearOp, identity, image_basis, orthogonal_projector
    from src.core.quasicomplex import QuasiComplex

    spaces = [InnerProductSpace(n, random_gram(rng, n) if weighted else None) for n in dims]
    diffs = []
    for i, r in enumerate(ranks):
        raw = LinearOp(spaces[i], spaces[i + 1], random_complex_matrix(rng, dims[i + 1], dims[i], rank=r))
        if diffs:
            proj = orthogonal_projector(spaces[i], image_basis(diffs[-1]))
            raw = raw @ (identity(spaces[i]) - proj)
        diffs.append(raw)
    return QuasiComplex(tuple(spaces), tuple(diffs))
