"""
Linear Operators
================
Metric-aware dense linear operators between finite-dimensional inner product
spaces, and the numerical-rank primitives every other module consumes.

A space carries a Hermitian positive-definite Gram matrix ``G`` with
``<u, v> = v^H G u``. Non-identity metrics are reduced to the orthonormal
case once per space through the Cholesky factor ``G = L L^H``: coordinates
``y = L^H x`` are orthonormal, and an operator ``M`` becomes
``L_cod^H M L_dom^{-H}`` in those coordinates. All spectral routines run on
that orthonormalized matrix.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np
import scipy.linalg as sla

from config.settings import get_settings
from src.errors import InvalidMetric, ShapeMismatch

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


# =========================================================================
# SPACES
# =========================================================================

@dataclass(frozen=True, eq=False)
class InnerProductSpace:
    """
    Finite-dimensional complex space with a Hermitian positive-definite metric.

    ``gram=None`` means the standard (orthonormal) basis; ``dim=0`` is the
    zero space.
    """
    dim: int
    gram: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 0:
            raise ShapeMismatch(f"Negative space dimension {self.dim}")
        if self.gram is None:
            return

        gram = np.array(self.gram, dtype=complex)
        if gram.shape != (self.dim, self.dim):
            raise ShapeMismatch(f"Gram matrix shape {gram.shape} does not match dim {self.dim}")

        scale = max(np.linalg.norm(gram), 1.0)
        if np.linalg.norm(gram - gram.conj().T) > HERMITIAN_TOL * scale:
            raise InvalidMetric("Gram matrix is not Hermitian")
        gram = (gram + gram.conj().T) / 2
        if self.dim and np.linalg.eigvalsh(gram)[0] <= 0:
            raise InvalidMetric("Gram matrix is not positive-definite")

        # An explicit identity is stored as the orthonormal case.
        if np.array_equal(gram, np.eye(self.dim)):
            object.__setattr__(self, "gram", None)
        else:
            object.__setattr__(self, "gram", _frozen(gram))

    @property
    def is_orthonormal(self) -> bool:
        return self.gram is None

    @cached_property
    def gram_matrix(self) -> np.ndarray:
        """The Gram matrix, identity for orthonormal spaces."""
        if self.gram is None:
            return _frozen(np.eye(self.dim, dtype=complex))
        return self.gram

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower-triangular ``L`` with ``G = L L^H``."""
        if self.gram is None:
            return self.gram_matrix
        return _frozen(sla.cholesky(self.gram, lower=True))

    def to_orthonormal(self, x: np.ndarray) -> np.ndarray:
        """Map coordinates ``x`` to orthonormal coordinates ``L^H x``."""
        if self.gram is None:
            return np.asarray(x, dtype=complex)
        return self.cholesky.conj().T @ x

    def from_orthonormal(self, y: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_orthonormal`: ``L^{-H} y``."""
        if self.gram is None:
            return np.asarray(y, dtype=complex)
        return sla.solve_triangular(self.cholesky, y, lower=True, trans='C')

    def solve_gram(self, x: np.ndarray) -> np.ndarray:
        """``G^{-1} x``."""
        if self.gram is None:
            return np.asarray(x, dtype=complex)
        return sla.cho_solve((self.cholesky, True), x)

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """``<u, v> = v^H G u``."""
        return complex(np.vdot(v, self.gram_matrix @ u))

    def compatible(self, other: "InnerProductSpace") -> bool:
        """Same dimension and the same metric within tolerance."""
        if self is other:
            return True
        if self.dim != other.dim:
            return False
        if self.is_orthonormal and other.is_orthonormal:
            return True
        diff = np.linalg.norm(self.gram_matrix - other.gram_matrix)
        return diff <= HERMITIAN_TOL * max(1.0, np.linalg.norm(self.gram_matrix))

    def to_dict(self) -> Dict[str, Any]:
        from src.utils.formatting import encode_matrix
        return {"dim": self.dim, "gram": None if self.gram is None else encode_matrix(self.gram)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "InnerProductSpace":
        from src.utils.formatting import decode_matrix
        gram = data.get("gram")
        return cls(int(data["dim"]), None if gram is None else decode_matrix(gram))

    def __repr__(self) -> str:
        metric = "orthonormal" if self.is_orthonormal else "weighted"
        return f"InnerProductSpace(dim={self.dim}, {metric})"


# =========================================================================
# OPERATORS
# =========================================================================

@dataclass(frozen=True, eq=False)
class LinearOp:
    """Dense matrix ``codomain.dim x domain.dim`` between two spaces."""
    domain: InnerProductSpace
    codomain: InnerProductSpace
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.ndim != 2:
            # zero-sized spaces come in as flat arrays
            matrix = matrix.reshape(self.codomain.dim, self.domain.dim)
        if matrix.shape != (self.codomain.dim, self.domain.dim):
            raise ShapeMismatch(
                f"Matrix shape {matrix.shape} does not match "
                f"({self.codomain.dim}, {self.domain.dim})"
            )
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    @cached_property
    def orthonormal_matrix(self) -> np.ndarray:
        """The matrix in orthonormal coordinates, ``L_cod^H M L_dom^{-H}``."""
        m = self.codomain.to_orthonormal(self.matrix)
        if not self.domain.is_orthonormal:
            # (L_dom^{-1} m^H)^H = m L_dom^{-H}
            m = sla.solve_triangular(self.domain.cholesky, m.conj().T, lower=True).conj().T
        return _frozen(np.asarray(m))

    @classmethod
    def from_orthonormal(
        cls,
        matrix: np.ndarray,
        domain: InnerProductSpace,
        codomain: InnerProductSpace
    ) -> "LinearOp":
        """Build an operator from its orthonormal-coordinate matrix."""
        m = codomain.from_orthonormal(np.asarray(matrix, dtype=complex))
        if not domain.is_orthonormal:
            m = m @ domain.cholesky.conj().T
        return cls(domain, codomain, m)

    @property
    def H(self) -> "LinearOp":
        return adjoint(self)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def __matmul__(self, other: "LinearOp") -> "LinearOp":
        if not isinstance(other, LinearOp):
            return NotImplemented
        if not self.domain.compatible(other.codomain):
            raise ShapeMismatch(f"Cannot compose {self.shape} after {other.shape}")
        return LinearOp(other.domain, self.codomain, self.matrix @ other.matrix)

    def __add__(self, other: "LinearOp") -> "LinearOp":
        if not isinstance(other, LinearOp):
            return NotImplemented
        if not (self.domain.compatible(other.domain) and self.codomain.compatible(other.codomain)):
            raise ShapeMismatch(f"Cannot add operators of shapes {self.shape} and {other.shape}")
        return LinearOp(self.domain, self.codomain, self.matrix + other.matrix)

    def __neg__(self) -> "LinearOp":
        return LinearOp(self.domain, self.codomain, -self.matrix)

    def __sub__(self, other: "LinearOp") -> "LinearOp":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "LinearOp":
        if isinstance(scalar, LinearOp):
            return NotImplemented
        return LinearOp(self.domain, self.codomain, scalar * self.matrix)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LinearOp({self.domain.dim} -> {self.codomain.dim})"


@dataclass(frozen=True)
class RankProfile:
    """Numerical rank with the singular values and absolute threshold that decided it."""
    rank: int
    singular_values: np.ndarray
    rank_tol: float


# =========================================================================
# CONSTRUCTORS
# =========================================================================

def identity(space: InnerProductSpace) -> LinearOp:
    return LinearOp(space, space, np.eye(space.dim, dtype=complex))


def zero(domain: InnerProductSpace, codomain: InnerProductSpace) -> LinearOp:
    return LinearOp(domain, codomain, np.zeros((codomain.dim, domain.dim), dtype=complex))


def from_array(matrix: Any) -> LinearOp:
    """Operator between orthonormal spaces sized from the matrix."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    rows, cols = matrix.shape
    return LinearOp(InnerProductSpace(cols), InnerProductSpace(rows), matrix)


# =========================================================================
# SPECTRAL PRIMITIVES
# =========================================================================

def _resolve_tol(rank_tol_rel: Optional[float]) -> float:
    tol = get_settings().rank_tol if rank_tol_rel is None else rank_tol_rel
    if not 0 < tol < 1:
        raise ValueError(f"rank_tol_rel must lie in (0, 1), got {tol}")
    return tol


def svd(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``U diag(s) Vh`` that tolerates empty matrices."""
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return np.eye(rows, dtype=complex), np.zeros(0), np.eye(cols, dtype=complex)
    return sla.svd(matrix, full_matrices=True, lapack_driver='gesvd')


def rank_threshold(singular_values: np.ndarray, rank_tol_rel: Optional[float] = None) -> float:
    """Absolute cutoff ``rank_tol_rel * max(1, sigma_max)``."""
    tol = _resolve_tol(rank_tol_rel)
    sigma_max = float(singular_values[0]) if singular_values.size else 0.0
    return tol * max(1.0, sigma_max)


def rank_profile(op: LinearOp, rank_tol_rel: Optional[float] = None) -> RankProfile:
    """Numerical rank of ``op`` under the repo-wide rank policy."""
    m = op.orthonormal_matrix
    if min(m.shape) == 0:
        s = np.zeros(0)
    else:
        s = sla.svdvals(m)
    threshold = rank_threshold(s, rank_tol_rel)
    return RankProfile(rank=int(np.sum(s > threshold)), singular_values=s, rank_tol=threshold)


def adjoint(op: LinearOp) -> LinearOp:
    """Metric adjoint ``A* = G_dom^{-1} A^H G_cod``."""
    m = op.matrix.conj().T
    if not op.codomain.is_orthonormal:
        m = m @ op.codomain.gram_matrix
    m = op.domain.solve_gram(m)
    return LinearOp(op.codomain, op.domain, m)


def pinv(op: LinearOp, rank_tol_rel: Optional[float] = None) -> LinearOp:
    """Metric-aware Moore-Penrose pseudo-inverse (codomain -> domain)."""
    u, s, vh = svd(op.orthonormal_matrix)
    threshold = rank_threshold(s, rank_tol_rel)
    r = int(np.sum(s > threshold))
    inv = (vh[:r].conj().T / s[:r]) @ u[:, :r].conj().T
    return LinearOp.from_orthonormal(inv, op.codomain, op.domain)


def op_norm(op: LinearOp) -> float:
    """Metric-aware operator norm (largest singular value)."""
    m = op.orthonormal_matrix
    if min(m.shape) == 0:
        return 0.0
    return float(sla.svdvals(m)[0])


def kernel_basis(op: LinearOp, rank_tol_rel: Optional[float] = None) -> np.ndarray:
    """Metric-orthonormal basis of ``ker op`` as columns in domain coordinates."""
    u, s, vh = svd(op.orthonormal_matrix)
    r = int(np.sum(s > rank_threshold(s, rank_tol_rel)))
    return op.domain.from_orthonormal(vh[r:].conj().T)


def image_basis(op: LinearOp, rank_tol_rel: Optional[float] = None) -> np.ndarray:
    """Metric-orthonormal basis of ``im op`` as columns in codomain coordinates."""
    u, s, vh = svd(op.orthonormal_matrix)
    r = int(np.sum(s > rank_threshold(s, rank_tol_rel)))
    return op.codomain.from_orthonormal(u[:, :r])


def orthogonal_projector(space: InnerProductSpace, basis: np.ndarray) -> LinearOp:
    """
    Metric-orthogonal projector onto the span of metric-orthonormal columns.

    ``P = B B^H G``.
    """
    basis = np.asarray(basis, dtype=complex)
    if space.dim == 0:
        return zero(space, space)
    basis = basis.reshape(space.dim, -1)
    return LinearOp(space, space, basis @ (basis.conj().T @ space.gram_matrix))


def index(op: LinearOp, rank_tol_rel: Optional[float] = None) -> int:
    """Fredholm index ``dim ker - dim coker``; always ``dim V - dim W`` here."""
    rank = rank_profile(op, rank_tol_rel).rank
    return (op.domain.dim - rank) - (op.codomain.dim - rank)
