"""
Surface Meshes
==============
Triangulated closed surfaces: OFF / JSON ingestion, validation, the
built-in periodic torus grid, and OFF export.

Edges are oriented from the lower to the higher vertex index and listed
lexicographically, so the cochain matrices built from a mesh do not depend
on the file format it came from.
"""

from dataclasses import dataclass
from collections import defaultdict, deque
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union
import json
import logging

import numpy as np

from src.errors import NotClosedSurface, NotOrientable, ParseError

logger = logging.getLogger(__name__)

MeshSource = Union[str, Path, bytes]


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Vertices (V x 3) and oriented triangular faces (F x 3)."""
    vertices: np.ndarray
    faces: np.ndarray
    name: str = "mesh"

    @cached_property
    def edges(self) -> np.ndarray:
        """Sorted endpoint pairs ``(a, b)``, ``a < b``, in lexicographic order."""
        pairs = set()
        for face in self.faces:
            for u, w in face_edges(face):
                pairs.add((min(u, w), max(u, w)))
        return np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)

    @cached_property
    def edge_index(self) -> Dict[Tuple[int, int], int]:
        return {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges)}

    @property
    def counts(self) -> Tuple[int, int, int]:
        return len(self.vertices), len(self.edges), len(self.faces)

    @property
    def euler_count(self) -> int:
        v, e, f = self.counts
        return v - e + f

    @property
    def genus(self) -> float:
        return (2 - self.euler_count) / 2

    def to_dict(self) -> Dict[str, Any]:
        return {
            "vertices": self.vertices.tolist(),
            "faces": self.faces.tolist(),
        }


def face_edges(face) -> List[Tuple[int, int]]:
    a, b, c = (int(x) for x in face)
    return [(a, b), (b, c), (c, a)]


# =========================================================================
# VALIDATION
# =========================================================================

def validate_mesh(mesh: SurfaceMesh) -> SurfaceMesh:
    """
    Check that the mesh is a closed, orientable triangulated surface.

    Faces are made globally consistent starting from the first face of each
    component; a mesh whose orientation had to be repaired is returned with
    the flipped faces.

    Raises:
        ParseError: out-of-range or repeated vertex indices
        NotClosedSurface: some edge is not shared by exactly two faces
        NotOrientable: no consistent orientation exists
    """
    faces = np.asarray(mesh.faces, dtype=np.int64).reshape(-1, 3)
    n_vertices = len(mesh.vertices)
    if faces.size and (faces.min() < 0 or faces.max() >= n_vertices):
        raise ParseError(f"Face references a vertex outside 0..{n_vertices - 1}")
    for face in faces:
        if len(set(face.tolist())) != 3:
            raise ParseError(f"Degenerate face {face.tolist()}")

    incidence: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for f, face in enumerate(faces):
        for u, w in face_edges(face):
            incidence[(min(u, w), max(u, w))].append(f)

    for edge, owners in incidence.items():
        if len(owners) != 2:
            raise NotClosedSurface(f"Edge {edge} is shared by {len(owners)} faces")

    faces = _orient(faces, incidence)
    return SurfaceMesh(np.asarray(mesh.vertices, dtype=float), faces, mesh.name)


def _traverses(face, u: int, w: int) -> bool:
    """True when ``face`` runs along ``u -> w``."""
    return (u, w) in face_edges(face)


def _orient(faces: np.ndarray, incidence: Dict[Tuple[int, int], List[int]]) -> np.ndarray:
    faces = faces.copy()
    flips = np.zeros(len(faces), dtype=bool)
    visited = np.zeros(len(faces), dtype=bool)

    neighbours: Dict[int, List[Tuple[int, Tuple[int, int]]]] = defaultdict(list)
    for edge, (f, g) in incidence.items():
        neighbours[f].append((g, edge))
        neighbours[g].append((f, edge))

    for start in range(len(faces)):
        if visited[start]:
            continue
        visited[start] = True
        queue = deque([start])
        while queue:
            f = queue.popleft()
            oriented_f = faces[f][::-1] if flips[f] else faces[f]
            for g, (u, w) in neighbours[f]:
                # consistent neighbours traverse the shared edge in opposite directions
                f_forward = _traverses(oriented_f, u, w)
                g_forward = _traverses(faces[g], u, w)
                need_flip = f_forward == g_forward
                if not visited[g]:
                    visited[g] = True
                    flips[g] = need_flip
                    queue.append(g)
                else:
                    oriented_g = faces[g][::-1] if flips[g] else faces[g]
                    if _traverses(oriented_g, u, w) == f_forward:
                        raise NotOrientable("Face orientations cannot be made consistent")

    if flips.any():
        logger.warning("Re-oriented %d faces for a consistent orientation", int(flips.sum()))
        faces[flips] = faces[flips][:, ::-1]
    return faces


# =========================================================================
# LOADING
# =========================================================================

def parse_off(text: str, name: str = "mesh") -> SurfaceMesh:
    """Parse an ASCII OFF file of triangles (``#`` comments allowed)."""
    tokens: List[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())

    if not tokens or tokens[0].upper() != "OFF":
        raise ParseError("Not a valid OFF header")
    try:
        n_vertices, n_faces = int(tokens[1]), int(tokens[2])
        pos = 4
        vertices = [[float(x) for x in tokens[pos + 3 * k: pos + 3 * k + 3]] for k in range(n_vertices)]
        pos += 3 * n_vertices
        faces = []
        for _ in range(n_faces):
            count = int(tokens[pos])
            if count != 3:
                raise ParseError(f"Only triangular faces are supported, got a {count}-gon")
            faces.append([int(x) for x in tokens[pos + 1: pos + 4]])
            pos += 1 + count
    except (IndexError, ValueError) as e:
        raise ParseError(f"Truncated or malformed OFF data: {e}") from e

    if any(len(v) != 3 for v in vertices) or any(len(f) != 3 for f in faces):
        raise ParseError("Truncated OFF data")
    return SurfaceMesh(np.array(vertices, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3), name)


def parse_mesh_json(text: str, name: str = "mesh") -> SurfaceMesh:
    """Parse ``{"vertices": [[x, y, z], ...], "faces": [[i, j, k], ...]}``."""
    try:
        data = json.loads(text)
        vertices = np.array(data["vertices"], dtype=float).reshape(-1, 3)
        faces = np.array(data["faces"], dtype=np.int64).reshape(-1, 3)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Malformed mesh JSON: {e}") from e
    return SurfaceMesh(vertices, faces, name)


def load_mesh(source: MeshSource, format: Optional[str] = None) -> SurfaceMesh:
    """
    Load and validate a mesh from a path or raw bytes.

    Args:
        source: file path, or the file contents as bytes
        format: "OFF" or "JSON"; inferred from the suffix (or the content) when omitted
    """
    try:
        if isinstance(source, bytes):
            text, name = source.decode("utf-8"), "mesh"
        else:
            path = Path(source)
            text, name = path.read_text(encoding="utf-8"), path.stem
            if format is None:
                format = "JSON" if path.suffix.lower() == ".json" else "OFF"
    except UnicodeDecodeError as e:
        raise ParseError(f"Mesh file is not UTF-8 text: {e}") from e

    if format is None:
        format = "JSON" if text.lstrip().startswith("{") else "OFF"
    format = format.upper()
    if format == "OFF":
        mesh = parse_off(text, name)
    elif format == "JSON":
        mesh = parse_mesh_json(text, name)
    else:
        raise ParseError(f"Unknown mesh format: {format}")

    mesh = validate_mesh(mesh)
    logger.info("Loaded mesh %s: V=%d E=%d F=%d", mesh.name, *mesh.counts)
    return mesh


def torus_grid(n: int = 3) -> SurfaceMesh:
    """
    Periodic ``n x n`` grid with every square split along its diagonal:
    ``n^2`` vertices, ``3 n^2`` edges, ``2 n^2`` faces.
    """
    if n < 3:
        raise ValueError("torus_grid needs n >= 3 for a simplicial triangulation")

    def v(i: int, j: int) -> int:
        return (i % n) * n + (j % n)

    faces = []
    for i in range(n):
        for j in range(n):
            faces.append([v(i, j), v(i + 1, j), v(i + 1, j + 1)])
            faces.append([v(i, j), v(i + 1, j + 1), v(i, j + 1)])

    R, r = 2.0, 1.0
    vertices = []
    for i in range(n):
        for j in range(n):
            theta, phi = 2 * np.pi * i / n, 2 * np.pi * j / n
            vertices.append([(R + r * np.cos(phi)) * np.cos(theta), (R + r * np.cos(phi)) * np.sin(theta), r * np.sin(phi)])

    return validate_mesh(SurfaceMesh(np.array(vertices), np.array(faces, dtype=np.int64), f"torus_grid_{n}"))


def write_off(mesh: SurfaceMesh, path: Union[str, Path]) -> Path:
    """Write a mesh as ASCII OFF."""
    path = Path(path)
    v, _, f = mesh.counts
    lines = ["OFF", f"{v} {f} {len(mesh.edges)}"]
    lines += [" ".join(f"{x:.6f}" for x in vertex) for vertex in mesh.vertices]
    lines += ["3 " + " ".join(str(int(x)) for x in face) for face in mesh.faces]
    path.write_text("\n".join(lines) + "\n")
    return path
