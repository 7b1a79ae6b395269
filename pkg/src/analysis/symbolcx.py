"""
Symbol Complexes
================
Pointwise principal-symbol complexes over sampled cotangent directions:
ellipticity (exactness) checks, symbol Laplacians and order-reduction
conjugation.

A quasicomplex is elliptic when its symbol complex is exact at every
``(x, xi)`` off the zero section. We check that on samples: seeded random
unit covectors plus user-supplied points. Fibers carry the standard
Hermitian metric.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd
import scipy.linalg as sla

from src.core.linop import from_array, rank_profile
from src.errors import NotAComplex, ParseError, ShapeMismatch, ZeroCovector
from src.utils.formatting import decode_matrix, encode_matrix

logger = logging.getLogger(__name__)

COMPLEX_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SymbolComplexSample:
    """Symbol matrices ``sigma_i: F^i_x -> F^{i+1}_x`` at one point ``(x, xi)``."""
    point_id: str
    xi_norm: float
    mats: Tuple[np.ndarray, ...]
    orders: Tuple[float, ...] = ()
    fiber_dims: Tuple[int, ...] = ()

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(m, dtype=complex)) for m in self.mats)
        fibers = tuple(int(n) for n in self.fiber_dims)
        if not fibers:
            if not mats:
                raise ShapeMismatch("A sample without matrices needs fiber_dims")
            fibers = (mats[0].shape[1],) + tuple(m.shape[0] for m in mats)
        if len(fibers) != len(mats) + 1:
            raise ShapeMismatch(f"{len(mats)} symbols need {len(mats) + 1} fibers, got {len(fibers)}")

        checked = []
        for i, m in enumerate(mats):
            if m.size == 0:
                m = m.reshape(fibers[i + 1], fibers[i])
            if m.shape != (fibers[i + 1], fibers[i]):
                raise ShapeMismatch(f"sigma_{i} has shape {m.shape}, expected ({fibers[i + 1]}, {fibers[i]})")
            m.setflags(write=False)
            checked.append(m)
        mats = tuple(checked)

        orders = tuple(float(m) for m in self.orders) if self.orders else (0.0,) * len(mats)
        if len(orders) != len(mats):
            raise ShapeMismatch(f"Expected {len(mats)} orders, got {len(orders)}")

        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "fiber_dims", fibers)
        object.__setattr__(self, "xi_norm", float(self.xi_norm))

        defect = self.complex_defect
        if defect > COMPLEX_TOL:
            raise NotAComplex(f"Symbol sequence at {self.point_id} is not a complex (defect {defect:.3e})")

    @property
    def N(self) -> int:
        return len(self.mats)

    def symbol(self, i: int) -> np.ndarray:
        """``sigma_i``, zero outside 0..N-1."""
        if 0 <= i < self.N:
            return self.mats[i]
        rows = self.fiber_dims[i + 1] if 0 <= i + 1 <= self.N else 0
        cols = self.fiber_dims[i] if 0 <= i <= self.N else 0
        return np.zeros((rows, cols), dtype=complex)

    @property
    def complex_defect(self) -> float:
        """Largest ``|sigma_{i+1} sigma_i| / max(1, |sigma_{i+1}||sigma_i|)``."""
        worst = 0.0
        for i in range(self.N - 1):
            a, b = self.mats[i], self.mats[i + 1]
            if a.size == 0 or b.size == 0:
                continue
            scale = max(1.0, np.linalg.norm(b, 2) * np.linalg.norm(a, 2))
            worst = max(worst, np.linalg.norm(b @ a, 2) / scale)
        return float(worst)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point_id": self.point_id,
            "xi_norm": self.xi_norm,
            "orders": list(self.orders),
            "fiber_dims": list(self.fiber_dims),
            "mats": [encode_matrix(m) for m in self.mats],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SymbolComplexSample":
        try:
            return cls(
                point_id=str(data["point_id"]),
                xi_norm=float(data["xi_norm"]),
                mats=tuple(decode_matrix(m) for m in data["mats"]),
                orders=tuple(data.get("orders") or ()),
                fiber_dims=tuple(data.get("fiber_dims") or ()),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"Malformed symbol sample: {e}") from e


@dataclass(frozen=True)
class OrderReductionPlan:
    """Sobolev indices ``s_0 = s``, ``s_{i+1} = s_i - m_i``."""
    s: float
    s_list: Tuple[float, ...]

    @classmethod
    def from_orders(cls, s: float, orders: Sequence[float]) -> "OrderReductionPlan":
        s_list = [float(s)]
        for m in orders:
            s_list.append(s_list[-1] - float(m))
        return cls(s=float(s), s_list=tuple(s_list))

    @property
    def orders(self) -> List[float]:
        return [self.s_list[i] - self.s_list[i + 1] for i in range(len(self.s_list) - 1)]

    def is_consistent(self, orders: Sequence[float]) -> bool:
        """Stored indices equal the ones recomputed from ``orders``."""
        return self.from_orders(self.s, orders).s_list == self.s_list


def _check_covector(sample: SymbolComplexSample) -> None:
    if not sample.xi_norm > 0:
        raise ZeroCovector(f"Sample {sample.point_id} has |xi| = {sample.xi_norm}")


# =========================================================================
# ELLIPTICITY
# =========================================================================

@dataclass
class ExactnessVerdict:
    exact: bool
    steps: List[bool]
    kernel_dims: List[int]
    ranks: List[int]

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def symbol_exact(sample: SymbolComplexSample, rank_tol_rel: Optional[float] = None) -> ExactnessVerdict:
    """
    Exactness of the symbol complex: at step i, ``dim ker sigma_i = rank sigma_{i-1}``.

    Raises:
        ZeroCovector: when ``|xi| <= 0``
    """
    _check_covector(sample)
    ranks = [rank_profile(from_array(m), rank_tol_rel).rank if m.size else 0 for m in sample.mats]

    steps, kernel_dims = [], []
    for i in range(sample.N + 1):
        kernel_dim = sample.fiber_dims[i] - (ranks[i] if i < sample.N else 0)
        image_dim = ranks[i - 1] if i > 0 else 0
        kernel_dims.append(kernel_dim)
        steps.append(kernel_dim == image_dim)
    return ExactnessVerdict(exact=all(steps), steps=steps, kernel_dims=kernel_dims, ranks=ranks)


@dataclass
class LaplacianVerdict:
    invertible: bool
    steps: List[bool]
    min_singular_values: List[Optional[float]]

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


def symbol_laplacians(sample: SymbolComplexSample) -> List[np.ndarray]:
    """``sigma_{i-1} sigma_{i-1}* + sigma_i* sigma_i`` at every step."""
    out = []
    for i in range(sample.N + 1):
        below, above = sample.symbol(i - 1), sample.symbol(i)
        out.append(below @ below.conj().T + above.conj().T @ above)
    return out


def symbol_laplacian_check(sample: SymbolComplexSample, rank_tol_rel: Optional[float] = None) -> LaplacianVerdict:
    """
    Every symbol Laplacian is nonsingular.

    Invertibility is decided on the square-root factor
    ``[sigma_{i-1}*; sigma_i]`` under the linop rank policy; the reported
    numbers are the smallest singular values of the Laplacians themselves.

    Raises:
        ZeroCovector: when ``|xi| <= 0``
    """
    _check_covector(sample)
    steps, minima = [], []
    for i, lap in enumerate(symbol_laplacians(sample)):
        dim = sample.fiber_dims[i]
        if dim == 0:
            steps.append(True)
            minima.append(None)
            continue
        factor = np.vstack([sample.symbol(i - 1).conj().T, sample.symbol(i)])
        steps.append(rank_profile(from_array(factor), rank_tol_rel).rank == dim)
        minima.append(float(sla.svdvals(lap)[-1]))
    return LaplacianVerdict(invertible=all(steps), steps=steps, min_singular_values=minima)


def conjugate_orders(sample: SymbolComplexSample, plan: OrderReductionPlan) -> SymbolComplexSample:
    """
    Conjugate by the scalar order reductions ``r_i = |xi|^{s_i}``:
    ``sigma_i -> r_{i+1} sigma_i r_i^{-1}``, all orders mapped to 0.

    Raises:
        ZeroCovector: when ``|xi| <= 0``
        ShapeMismatch: when the plan length does not match the sample
    """
    _check_covector(sample)
    if len(plan.s_list) != sample.N + 1:
        raise ShapeMismatch(f"Plan has {len(plan.s_list)} indices, sample needs {sample.N + 1}")
    mats = tuple(
        sample.xi_norm ** (plan.s_list[i + 1] - plan.s_list[i]) * m
        for i, m in enumerate(sample.mats)
    )
    return SymbolComplexSample(
        point_id=sample.point_id,
        xi_norm=sample.xi_norm,
        mats=mats,
        orders=(0.0,) * sample.N,
        fiber_dims=sample.fiber_dims,
    )


# =========================================================================
# SWEEPS
# =========================================================================

SampleGenerator = Callable[[int, int], SymbolComplexSample]


@dataclass
class SweepResult:
    """Per-sample verdicts and their conjunction."""
    elliptic: bool
    table: pd.DataFrame
    offending: List[str] = field(default_factory=list)
    disagreements: int = 0
    vacuous: bool = False
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "elliptic": self.elliptic,
            "n_samples": int(len(self.table)),
            "offending": self.offending,
            "disagreements": self.disagreements,
            "vacuous": self.vacuous,
            "seed": self.seed,
        }


def sample_sweep(
    generator: Optional[SampleGenerator],
    n_samples: int,
    seed: int,
    extra_samples: Iterable[SymbolComplexSample] = (),
    rank_tol_rel: Optional[float] = None
) -> SweepResult:
    """
    Check ellipticity on ``generator(seed, k)`` for ``k < n_samples`` plus
    any user-supplied samples. An empty sweep is vacuously elliptic.
    """
    samples = [generator(seed, k) for k in range(n_samples)] if generator is not None else []
    samples.extend(extra_samples)

    rows = []
    for sample in samples:
        exact = symbol_exact(sample, rank_tol_rel)
        lap = symbol_laplacian_check(sample, rank_tol_rel)
        rows.append({
            "point_id": sample.point_id,
            "xi_norm": sample.xi_norm,
            "symbol_exact": exact.exact,
            "laplacian_check": lap.invertible,
            "failing_steps": [i for i, ok in enumerate(exact.steps) if not ok],
        })

    table = pd.DataFrame(rows, columns=["point_id", "xi_norm", "symbol_exact", "laplacian_check", "failing_steps"])
    vacuous = table.empty
    if vacuous:
        logger.warning("Empty symbol sweep: ellipticity holds vacuously")
        return SweepResult(elliptic=True, table=table, vacuous=True, seed=seed)

    offending = table.loc[~table["symbol_exact"], "point_id"].tolist()
    disagreements = int((table["symbol_exact"] != table["laplacian_check"]).sum())
    if disagreements:
        logger.warning("%d samples where exactness and Laplacian invertibility disagree", disagreements)

    return SweepResult(
        elliptic=not offending,
        table=table,
        offending=offending,
        disagreements=disagreements,
        seed=seed,
    )
