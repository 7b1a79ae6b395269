"""
Quasicomplexes
==============
The sequence data model: cochain complexes and quasicomplexes

    0 -> V^0 --A^0--> V^1 --A^1--> ... --A^{N-1}--> V^N -> 0

with measured curvature ``A^{i+1} A^i``, adjoint sequences and Laplacians
``Delta^i = A^{i-1} A^{i-1}* + A^i* A^i``. Out-of-range differentials
``A^{-1}`` and ``A^N`` are zero operators to/from zero spaces.

In finite dimensions every operator is compact, so "small" curvature is
quantified by norm; a quasicomplex is a complex exactly when every curvature
entry is below the exactness threshold.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from config.settings import get_settings
from src.core.linop import InnerProductSpace, LinearOp, adjoint, op_norm, zero
from src.errors import ParseError, ShapeMismatch
from src.utils.formatting import decode_matrix, encode_matrix

logger = logging.getLogger(__name__)

ZERO_SPACE = InnerProductSpace(0)


@dataclass(frozen=True, eq=False)
class QuasiComplex:
    """
    Finite sequence of operators ``diffs[i]: spaces[i] -> spaces[i+1]``.

    ``orders`` are the operator orders ``m_i`` (default all 0); they only
    matter to symbol-level order reductions.
    """
    spaces: Tuple[InnerProductSpace, ...]
    diffs: Tuple[LinearOp, ...]
    orders: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        spaces = tuple(self.spaces)
        diffs = tuple(self.diffs)
        if not spaces:
            raise ShapeMismatch("A quasicomplex needs at least one space")
        if len(diffs) != len(spaces) - 1:
            raise ShapeMismatch(f"{len(spaces)} spaces need {len(spaces) - 1} differentials, got {len(diffs)}")

        for i, d in enumerate(diffs):
            if not d.domain.compatible(spaces[i]):
                raise ShapeMismatch(f"diffs[{i}] domain (dim {d.domain.dim}) does not match spaces[{i}] (dim {spaces[i].dim})")
            if not d.codomain.compatible(spaces[i + 1]):
                raise ShapeMismatch(
                    f"diffs[{i}] codomain (dim {d.codomain.dim}) does not match spaces[{i + 1}] (dim {spaces[i + 1].dim})"
                )

        orders = self.orders
        if orders is not None:
            orders = tuple(float(m) for m in orders)
            if len(orders) != len(diffs):
                raise ShapeMismatch(f"Expected {len(diffs)} orders, got {len(orders)}")

        object.__setattr__(self, "spaces", spaces)
        object.__setattr__(self, "diffs", diffs)
        object.__setattr__(self, "orders", orders)

    @property
    def N(self) -> int:
        """Number of differentials; steps run over 0..N."""
        return len(self.diffs)

    @property
    def dims(self) -> List[int]:
        return [s.dim for s in self.spaces]

    @property
    def order_list(self) -> List[float]:
        return list(self.orders) if self.orders is not None else [0.0] * self.N

    def space(self, i: int) -> InnerProductSpace:
        """``V^i``, the zero space outside 0..N."""
        return self.spaces[i] if 0 <= i <= self.N else ZERO_SPACE

    def diff(self, i: int) -> LinearOp:
        """``A^i``, the zero operator outside 0..N-1."""
        if 0 <= i < self.N:
            return self.diffs[i]
        return zero(self.space(i), self.space(i + 1))

    def with_diffs(self, diffs: Sequence[LinearOp]) -> "QuasiComplex":
        """Same spaces and orders, new differentials."""
        return QuasiComplex(self.spaces, tuple(diffs), self.orders)

    @property
    def euler_count(self) -> int:
        """Alternating sum of the space dimensions."""
        return sum((-1) ** i * d for i, d in enumerate(self.dims))

    # =====================================================================
    # CONSTRUCTION / SERIALIZATION
    # =====================================================================

    @classmethod
    def from_matrices(
        cls,
        matrices: Sequence[Any],
        grams: Optional[Sequence[Optional[np.ndarray]]] = None,
        orders: Optional[Sequence[float]] = None,
        dims: Optional[Sequence[int]] = None,
    ) -> "QuasiComplex":
        """
        Build a quasicomplex from plain matrices.

        Space dimensions are read off the matrices unless ``dims`` is given
        (needed only when every matrix is empty).
        """
        mats = [np.atleast_2d(np.asarray(m, dtype=complex)) for m in matrices]
        if dims is None:
            if not mats:
                raise ShapeMismatch("Cannot infer dimensions without matrices; pass dims")
            dims = [mats[0].shape[1]] + [m.shape[0] for m in mats]
        if grams is None:
            grams = [None] * len(dims)
        if len(grams) != len(dims):
            raise ShapeMismatch(f"Expected {len(dims)} Gram matrices, got {len(grams)}")

        spaces = [InnerProductSpace(int(n), g) for n, g in zip(dims, grams)]
        diffs = []
        for i, m in enumerate(mats):
            if m.size == 0:
                m = m.reshape(spaces[i + 1].dim, spaces[i].dim)
            diffs.append(LinearOp(spaces[i], spaces[i + 1], m))
        return cls(tuple(spaces), tuple(diffs), None if orders is None else tuple(orders))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spaces": [s.to_dict() for s in self.spaces],
            "diffs": [encode_matrix(d.matrix) for d in self.diffs],
            "orders": None if self.orders is None else list(self.orders),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QuasiComplex":
        try:
            spaces = [InnerProductSpace.from_dict(s) for s in data["spaces"]]
            mats = [decode_matrix(m) for m in data["diffs"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Malformed quasicomplex object: {e}") from e
        if len(mats) != len(spaces) - 1:
            raise ShapeMismatch(f"{len(spaces)} spaces need {len(spaces) - 1} differentials, got {len(mats)}")

        diffs = []
        for i, m in enumerate(mats):
            if m.shape != (spaces[i + 1].dim, spaces[i].dim):
                raise ShapeMismatch(
                    f"diffs[{i}] has shape {m.shape}, expected ({spaces[i + 1].dim}, {spaces[i].dim})"
                )
            diffs.append(LinearOp(spaces[i], spaces[i + 1], m))
        orders = data.get("orders")
        return cls(tuple(spaces), tuple(diffs), None if orders is None else tuple(orders))

    def __repr__(self) -> str:
        return f"QuasiComplex(dims={self.dims})"


def short_complex(op: LinearOp, order: float = 0.0) -> QuasiComplex:
    """The short complex ``0 -> V --A--> W -> 0``."""
    return QuasiComplex((op.domain, op.codomain), (op,), (order,))


# =========================================================================
# CURVATURE
# =========================================================================

@dataclass
class CurvatureReport:
    """Per-step curvature ``|A^{i+1} A^i|`` for i = 0..N-2."""
    absolute: List[float] = field(default_factory=list)
    relative: List[float] = field(default_factory=list)
    is_exact: bool = True
    exactness_tol: float = 0.0
    floor: float = 0.0

    @property
    def max_absolute(self) -> float:
        return max(self.absolute, default=0.0)

    @property
    def max_relative(self) -> float:
        return max(self.relative, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "curvature_abs": self.absolute,
            "curvature_rel": self.relative,
            "max_curvature_rel": self.max_relative,
            "is_exact": self.is_exact,
        }


def _check_chain(qc: QuasiComplex) -> None:
    for i in range(qc.N - 1):
        if not qc.diffs[i].codomain.compatible(qc.diffs[i + 1].domain):
            raise ShapeMismatch(f"diffs[{i}] and diffs[{i + 1}] do not chain")


def validate(
    qc: QuasiComplex,
    exactness_tol: Optional[float] = None,
    floor: Optional[float] = None
) -> CurvatureReport:
    """
    Measure the curvature of ``qc``.

    Relative entries are ``|A^{i+1}A^i| / max(floor, |A^{i+1}||A^i|)``. A
    step counts as exact when its absolute curvature is at most
    ``max(exactness_tol * |A^{i+1}||A^i|, floor)``. Large curvature is
    reported, never rejected.
    """
    settings = get_settings()
    exactness_tol = settings.exactness_tol if exactness_tol is None else exactness_tol
    floor = settings.exactness_floor if floor is None else floor
    _check_chain(qc)

    report = CurvatureReport(exactness_tol=exactness_tol, floor=floor)
    norms = [op_norm(d) for d in qc.diffs]
    for i in range(qc.N - 1):
        absolute = op_norm(qc.diffs[i + 1] @ qc.diffs[i])
        scale = norms[i + 1] * norms[i]
        report.absolute.append(absolute)
        report.relative.append(absolute / max(floor, scale))
        if absolute > max(exactness_tol * scale, floor):
            report.is_exact = False

    logger.debug("Curvature of %r: max relative %.3e, exact=%s", qc, report.max_relative, report.is_exact)
    return report


def is_exact(qc: QuasiComplex, exactness_tol: Optional[float] = None) -> bool:
    return validate(qc, exactness_tol).is_exact


def adjoint_sequence(qc: QuasiComplex) -> QuasiComplex:
    """The adjoint sequence ``0 <- V^0 <-A^0*- V^1 <- ... <- V^N <- 0``, re-indexed forward."""
    spaces = tuple(reversed(qc.spaces))
    diffs = tuple(adjoint(qc.diffs[qc.N - 1 - i]) for i in range(qc.N))
    orders = None if qc.orders is None else tuple(reversed(qc.orders))
    return QuasiComplex(spaces, diffs, orders)


# =========================================================================
# LAPLACIANS
# =========================================================================

def laplacian(qc: QuasiComplex, i: int) -> LinearOp:
    """``Delta^i = A^{i-1} A^{i-1}* + A^i* A^i``."""
    below = qc.diff(i - 1)
    above = qc.diff(i)
    return below @ adjoint(below) + adjoint(above) @ above


def laplacians(qc: QuasiComplex) -> List[LinearOp]:
    """Laplacians at every step 0..N."""
    return [laplacian(qc, i) for i in range(qc.N + 1)]


def laplacian_commutator(qc: QuasiComplex) -> List[float]:
    """``|A^i Delta^i - Delta^{i+1} A^i|`` for i = 0..N-1; zero for complexes."""
    deltas = laplacians(qc)
    return [op_norm(qc.diffs[i] @ deltas[i] - deltas[i + 1] @ qc.diffs[i]) for i in range(qc.N)]
