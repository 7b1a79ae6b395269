"""
Simplicial de Rham Complexes
============================
Cochain complexes ``0 -> C^0 --d^0--> C^1 --d^1--> C^2 -> 0`` of a closed
triangulated surface, the discrete stand-in for the de Rham complex: they
carry exactly the cohomology of the surface and have integer differentials.

- ``d^0`` (edges x vertices): ``(d^0 c)(a, b) = c(b) - c(a)`` for the edge ``a < b``.
- ``d^1`` (faces x edges): +1 when the face's cyclic order runs along the edge
  orientation, -1 otherwise.
"""

from typing import List, Sequence
import logging

import numpy as np

from src.builders.meshes import SurfaceMesh, face_edges
from src.core.quasicomplex import QuasiComplex
from src.errors import NotAnEndomorphism, ShapeMismatch

logger = logging.getLogger(__name__)


def coboundary_matrices(mesh: SurfaceMesh) -> List[np.ndarray]:
    """Integer coboundary matrices ``[d^0, d^1]``."""
    n_vertices, n_edges, n_faces = mesh.counts
    d0 = np.zeros((n_edges, n_vertices), dtype=np.int64)
    for k, (a, b) in enumerate(mesh.edges):
        d0[k, a] = -1
        d0[k, b] = 1

    d1 = np.zeros((n_faces, n_edges), dtype=np.int64)
    for f, face in enumerate(mesh.faces):
        for u, w in face_edges(face):
            if u < w:
                d1[f, mesh.edge_index[(u, w)]] = 1
            else:
                d1[f, mesh.edge_index[(w, u)]] = -1
    return [d0, d1]


def derham_complex(mesh: SurfaceMesh) -> QuasiComplex:
    """
    Simplicial de Rham complex of a validated mesh with orthonormal cochain bases.

    ``d^1 d^0 = 0`` is checked in integer arithmetic before the matrices are
    embedded in floating point.
    """
    d0, d1 = coboundary_matrices(mesh)
    if np.any(d1 @ d0):
        raise ShapeMismatch(f"Coboundary matrices of {mesh.name} do not compose to zero")
    logger.debug("de Rham complex of %s: dims %s", mesh.name, mesh.counts)
    return QuasiComplex.from_matrices([d0, d1], dims=list(mesh.counts))


def permutation_endomorphism(mesh: SurfaceMesh, perm: Sequence[int]) -> List[np.ndarray]:
    """
    Cochain pullback ``(f^* c)(s) = c(f(s))`` of a vertex permutation ``f``.

    ``perm[v]`` is the image of vertex ``v``; ``f`` must map edges to edges
    and faces to faces. Signs record whether ``f`` keeps the orientation of
    each simplex.

    Raises:
        NotAnEndomorphism: when ``perm`` is not an automorphism of the mesh
    """
    perm = [int(p) for p in perm]
    n_vertices, n_edges, n_faces = mesh.counts
    if sorted(perm) != list(range(n_vertices)):
        raise NotAnEndomorphism("perm is not a permutation of the vertices")

    e0 = np.zeros((n_vertices, n_vertices))
    for v in range(n_vertices):
        e0[v, perm[v]] = 1.0

    e1 = np.zeros((n_edges, n_edges))
    for k, (a, b) in enumerate(mesh.edges):
        fa, fb = perm[a], perm[b]
        key = (min(fa, fb), max(fa, fb))
        if key not in mesh.edge_index:
            raise NotAnEndomorphism(f"Edge {(a, b)} maps to a non-edge {key}")
        e1[k, mesh.edge_index[key]] = 1.0 if fa < fb else -1.0

    face_lookup = {frozenset(int(x) for x in face): f for f, face in enumerate(mesh.faces)}
    e2 = np.zeros((n_faces, n_faces))
    for f, face in enumerate(mesh.faces):
        image = [perm[int(x)] for x in face]
        target = face_lookup.get(frozenset(image))
        if target is None:
            raise NotAnEndomorphism(f"Face {face.tolist()} maps to a non-face {image}")
        same_orientation = tuple(image[:2]) in face_edges(mesh.faces[target])
        e2[f, target] = 1.0 if same_orientation else -1.0

    return [e0, e1, e2]
