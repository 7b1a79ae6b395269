"""
Hodge Theory
============
Harmonic projectors, Green operators, the Hodge identity

    Id = H^i + A^{i-1} (A^{i-1}* G^i) + (A^i* G^{i+1}) A^i

and parametrix synthesis for complexes and quasicomplexes.

Kernel decisions are made on the square-root factor
``S^i = [A^{i-1}*; A^i]`` (``S^i* S^i = Delta^i``): its right singular vectors
diagonalize ``Delta^i`` and its singular values are the square roots of the
Laplacian's eigenvalues, so the rank threshold lives on the scale of the
differentials. For quasicomplexes the harmonic space is the essential one:
singular values up to ``sqrt(max curvature)`` count as harmonic.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence
import logging

import numpy as np
import pandas as pd

from src.core.linop import (
    LinearOp,
    adjoint,
    identity,
    op_norm,
    rank_threshold,
    svd,
    zero,
)
from src.core.quasicomplex import QuasiComplex, laplacian, validate
from src.errors import StepOutOfRange
from src.utils.formatting import encode_matrix

logger = logging.getLogger(__name__)


@dataclass
class HodgeData:
    """Hodge decomposition data at one step."""
    step: int
    laplacian: LinearOp
    harmonic_projector: LinearOp
    green: LinearOp
    parametrix: LinearOp
    harmonic_rank: int
    cutoff: float
    residuals: Dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_matrices: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "step": self.step,
            "harmonic_rank": self.harmonic_rank,
            "cutoff": self.cutoff,
            "residuals": self.residuals,
        }
        if include_matrices:
            data.update({
                "laplacian": encode_matrix(self.laplacian.matrix),
                "harmonic_projector": encode_matrix(self.harmonic_projector.matrix),
                "green": encode_matrix(self.green.matrix),
                "parametrix": encode_matrix(self.parametrix.matrix),
            })
        return data


@dataclass
class SpectralSplit:
    harmonic: LinearOp
    green: LinearOp
    rank: int
    cutoff: float


def essential_cutoff(qc: QuasiComplex) -> float:
    """Harmonic cutoff for singular values of ``S^i``: 0 for complexes, ``sqrt(max curvature)`` otherwise."""
    report = validate(qc)
    if report.is_exact:
        return 0.0
    return float(np.sqrt(report.max_absolute))


def spectral_split(
    qc: QuasiComplex,
    i: int,
    cutoff: float,
    rank_tol_rel: Optional[float] = None
) -> SpectralSplit:
    """Harmonic projector and Green operator of ``Delta^i`` from the SVD of ``S^i``."""
    space = qc.space(i)
    below = qc.diff(i - 1).orthonormal_matrix
    above = qc.diff(i).orthonormal_matrix
    stacked = np.vstack([below.conj().T, above])

    _, s, vh = svd(stacked)
    sigma = np.zeros(space.dim)
    sigma[:s.size] = s[:space.dim]
    threshold = max(rank_threshold(s, rank_tol_rel), cutoff)
    harmonic = sigma <= threshold

    v = vh.conj().T
    vh_h = v[:, harmonic]
    vh_n = v[:, ~harmonic]
    h_hat = vh_h @ vh_h.conj().T
    g_hat = (vh_n / sigma[~harmonic] ** 2) @ vh_n.conj().T

    return SpectralSplit(
        harmonic=LinearOp.from_orthonormal(h_hat, space, space),
        green=LinearOp.from_orthonormal(g_hat, space, space),
        rank=int(harmonic.sum()),
        cutoff=threshold,
    )


def _check_step(qc: QuasiComplex, i: int) -> None:
    if not 0 <= i <= qc.N:
        raise StepOutOfRange(f"Step {i} outside 0..{qc.N}")


def hodge_decompose(
    qc: QuasiComplex,
    i: int,
    rank_tol_rel: Optional[float] = None,
    cutoff: Optional[float] = None
) -> HodgeData:
    """
    Hodge decomposition at step ``i``.

    Returns the Laplacian, the metric-orthogonal projector ``H^i`` onto its
    (essential) kernel, the Green operator ``G^i`` (inverse of ``Delta^i`` off
    the kernel, zero on it) and ``P^i = A^{i-1}* G^i``. Residuals record the
    projector, Green and Hodge identities; for complexes the three Hodge
    summands are pairwise orthogonal.

    Raises:
        StepOutOfRange: when ``i`` is outside 0..N
    """
    _check_step(qc, i)
    cutoff = essential_cutoff(qc) if cutoff is None else cutoff

    split = spectral_split(qc, i, cutoff, rank_tol_rel)
    split_next = spectral_split(qc, i + 1, cutoff, rank_tol_rel) if i < qc.N else None

    delta = laplacian(qc, i)
    h, g = split.harmonic, split.green
    below, above = qc.diff(i - 1), qc.diff(i)
    ident = identity(qc.space(i))

    exact_part = below @ (adjoint(below) @ g)
    if split_next is not None:
        coexact_part = (adjoint(above) @ split_next.green) @ above
    else:
        coexact_part = zero(qc.space(i), qc.space(i))

    summands = (h, exact_part, coexact_part)
    orthogonality = max(
        op_norm(a @ b)
        for j, a in enumerate(summands)
        for k, b in enumerate(summands)
        if j != k
    )

    residuals = {
        "projector_idempotence": op_norm(h @ h - h),
        "projector_selfadjoint": op_norm(h - adjoint(h)),
        "laplacian_selfadjoint": op_norm(delta - adjoint(delta)),
        "green_left": op_norm(g @ delta - (ident - h)),
        "green_right": op_norm(delta @ g - (ident - h)),
        "green_harmonic": max(op_norm(h @ g), op_norm(g @ h)),
        "hodge_identity": op_norm(h + exact_part + coexact_part - ident),
        "summand_orthogonality": orthogonality,
    }

    return HodgeData(
        step=i,
        laplacian=delta,
        harmonic_projector=h,
        green=g,
        parametrix=adjoint(below) @ g,
        harmonic_rank=split.rank,
        cutoff=split.cutoff,
        residuals=residuals,
    )


def harmonic_ranks(qc: QuasiComplex, rank_tol_rel: Optional[float] = None) -> List[int]:
    """Rank of ``H^i`` at every step."""
    cutoff = essential_cutoff(qc)
    return [spectral_split(qc, i, cutoff, rank_tol_rel).rank for i in range(qc.N + 1)]


# =========================================================================
# PARAMETRICES
# =========================================================================

@dataclass
class ParametrixResult:
    """Parametrix ``P^i: V^i -> V^{i-1}`` with its homotopy defects."""
    operators: List[LinearOp]
    harmonic: List[LinearOp]
    defects: List[float]
    green_norms: List[float]
    max_curvature: float
    kappa: float
    is_exact: bool

    @property
    def max_defect(self) -> float:
        return max(self.defects, default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "defects": self.defects,
            "max_defect": self.max_defect,
            "green_norms": self.green_norms,
            "max_curvature": self.max_curvature,
            "kappa": self.kappa,
            "is_exact": self.is_exact,
        }


def homotopy_defects(
    qc: QuasiComplex,
    operators: Sequence[LinearOp],
    harmonic: Sequence[LinearOp]
) -> List[float]:
    """``|P^{i+1} A^i + A^{i-1} P^i - (Id - H^i)|`` for i = 0..N."""
    defects = []
    for i in range(qc.N + 1):
        ident = identity(qc.space(i))
        total = ident - harmonic[i]
        if i < qc.N:
            total = total - operators[i + 1] @ qc.diff(i)
        if i > 0:
            total = total - qc.diff(i - 1) @ operators[i]
        defects.append(op_norm(total))
    return defects


def parametrix(qc: QuasiComplex, rank_tol_rel: Optional[float] = None) -> ParametrixResult:
    """
    Parametrix ``P^i = G^{i-1} A^{i-1}*`` built from the Green operators.

    For complexes the homotopy identity holds to roundoff. For
    quasicomplexes the defect is of the size of the curvature; the measured
    ratio is reported as ``kappa``.
    """
    report = validate(qc)
    cutoff = 0.0 if report.is_exact else float(np.sqrt(report.max_absolute))
    splits = [spectral_split(qc, i, cutoff, rank_tol_rel) for i in range(qc.N + 1)]

    operators = [zero(qc.space(0), qc.space(-1))]
    for i in range(1, qc.N + 1):
        operators.append(splits[i - 1].green @ adjoint(qc.diff(i - 1)))

    harmonic = [s.harmonic for s in splits]
    defects = homotopy_defects(qc, operators, harmonic)
    max_curvature = report.max_absolute
    kappa = max(defects, default=0.0) / max_curvature if max_curvature > 0 else 0.0

    logger.debug("Parametrix of %r: max defect %.3e, kappa %.3e", qc, max(defects, default=0.0), kappa)
    return ParametrixResult(
        operators=operators,
        harmonic=harmonic,
        defects=defects,
        green_norms=[op_norm(s.green) for s in splits],
        max_curvature=max_curvature,
        kappa=kappa,
        is_exact=report.is_exact,
    )


@dataclass
class TransferReport:
    """Defects of an unperturbed parametrix evaluated on a perturbed quasicomplex."""
    defects: List[float]
    bounds: List[float]
    original_defects: List[float]

    @property
    def within_bounds(self) -> bool:
        return all(
            d <= d0 + b + 1e-12 * (1 + b)
            for d, d0, b in zip(self.defects, self.original_defects, self.bounds)
        )


def transfer_parametrix(original: QuasiComplex, perturbed: QuasiComplex) -> TransferReport:
    """
    A parametrix of a complex stays a parametrix after perturbing the differentials.

    With ``B^i = A^i + C^i`` the defect changes by ``P^{i+1} C^i + C^{i-1} P^i``,
    bounded by ``|P^{i+1}||C^i| + |C^{i-1}||P^i|``.
    """
    base = parametrix(original)
    defects = homotopy_defects(perturbed, base.operators, base.harmonic)

    c_norms = [op_norm(perturbed.diffs[i] - original.diffs[i]) for i in range(original.N)]
    p_norms = [op_norm(p) for p in base.operators]
    bounds = []
    for i in range(original.N + 1):
        bound = 0.0
        if i < original.N:
            bound += p_norms[i + 1] * c_norms[i]
        if i > 0:
            bound += c_norms[i - 1] * p_norms[i]
        bounds.append(bound)
    return TransferReport(defects=defects, bounds=bounds, original_defects=base.defects)


def green_commutator(qc: QuasiComplex, rank_tol_rel: Optional[float] = None) -> Dict[str, Any]:
    """
    ``|A^i G^i - G^{i+1} A^i|`` per step.

    Vanishes for complexes; for quasicomplexes it is curvature-sized and the
    measured ratio is reported as ``kappa_prime``.
    """
    report = validate(qc)
    cutoff = 0.0 if report.is_exact else float(np.sqrt(report.max_absolute))
    greens = [spectral_split(qc, i, cutoff, rank_tol_rel).green for i in range(qc.N + 1)]
    norms = [op_norm(qc.diffs[i] @ greens[i] - greens[i + 1] @ qc.diffs[i]) for i in range(qc.N)]
    max_curvature = report.max_absolute
    return {
        "commutators": norms,
        "max_curvature": max_curvature,
        "kappa_prime": max(norms, default=0.0) / max_curvature if max_curvature > 0 else 0.0,
    }


def defect_scaling(
    qc: QuasiComplex,
    eps_values: Sequence[float] = (1e-3, 1e-4, 1e-5),
    seed: int = 0
) -> Dict[str, Any]:
    """
    Fit the log-log slope of the parametrix defect against the perturbation size.

    Returns the per-epsilon table and the fitted slope (close to 1 when the
    defect is linear in the perturbation).
    """
    from src.builders.perturb import PerturbationSpec, perturb

    rows = []
    for eps in eps_values:
        perturbed = perturb(qc, PerturbationSpec(eps=eps, seed=seed))
        result = parametrix(perturbed)
        rows.append({
            "eps": eps,
            "max_curvature": result.max_curvature,
            "max_defect": result.max_defect,
            "kappa": result.kappa,
        })

    table = pd.DataFrame(rows)
    slope, _ = np.polyfit(np.log10(table["eps"].values), np.log10(table["max_defect"].values), 1)
    return {"table": table, "slope": float(slope), "seed": seed}
