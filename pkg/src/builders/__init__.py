# Fixture builders: meshes, de Rham complexes, Koszul symbols, perturbations
from .meshes import SurfaceMesh, load_mesh, torus_grid
from .derham import derham_complex, permutation_endomorphism
from .koszul import koszul_sample, koszul_sampler
from .perturb import PerturbationSpec, perturb

__all__ = [
    'SurfaceMesh', 'load_mesh', 'torus_grid',
    'derham_complex', 'permutation_endomorphism',
    'koszul_sample', 'koszul_sampler',
    'PerturbationSpec', 'perturb',
]
