"""
Reduction of Quasicomplexes
===========================
Reduce a small-curvature quasicomplex ``(V, A)`` to a complex ``(V, D)``
with ``D^{i+1} D^i = 0`` by a backward sweep of kernel projectors.

The sweep starts from the end of the sequence with ``D^{N-1} = A^{N-1}``.
At step ``k = N, ..., 2`` the differentials ``D^{k-1}`` and ``D^k`` are
fixed; the Green operator ``G^k`` of their Laplacian gives
``P^k = D^{k-1}* G^k`` and the projector ``Id - P^k D^{k-1}`` onto
``ker D^{k-1}``, and then ``D^{k-2} = (Id - P^k D^{k-1}) A^{k-2}``.
The projector that is applied is built from an orthonormal kernel basis of
``D^{k-1}``; the Green-route projector is formed, symmetrized and logged
against it.

Every step logs the norms that make up the proximity certificate
``|D^i - A^i| <= kappa_i * max_j |A^{j+1} A^j|`` with
``kappa_{N-1} = 0`` and ``kappa_{k-2} = |P^k| (1 + kappa_{k-1} |A^{k-2}|)``.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional
import logging

import scipy.linalg as sla

from config.settings import get_settings
from src.analysis.hodge import spectral_split
from src.core.linop import (
    LinearOp,
    adjoint,
    identity,
    kernel_basis,
    op_norm,
    orthogonal_projector,
)
from src.core.quasicomplex import QuasiComplex, short_complex, validate
from src.errors import ShapeMismatch

logger = logging.getLogger(__name__)


@dataclass
class SweepStep:
    """Norms recorded while fixing ``D^{target}`` at Laplacian step ``step``."""
    step: int
    target: int
    green_norm: float
    parametrix_norm: float
    projector_defect_raw: float
    projector_defect: float
    symmetrization_shift: float
    route_gap: float
    target_curvature: float
    corrected: bool
    kappa: float

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class ReductionResult:
    """Reduced complex plus its certificates."""
    reduced: QuasiComplex
    diff_norms: List[float]
    curvature_after: List[float]
    curvature_after_rel: List[float]
    kappas: List[float]
    sweep_log: List[SweepStep] = field(default_factory=list)
    max_input_curvature: float = 0.0
    input_relative_curvature: float = 0.0
    reduction_tol: float = 1e-10
    exact_output: bool = True
    certified: bool = True

    @property
    def bounds(self) -> List[float]:
        """``kappa_i * max input curvature``."""
        return [k * self.max_input_curvature for k in self.kappas]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reduced": self.reduced.to_dict(),
            "certificate": self.certificate(),
        }

    def certificate(self) -> Dict[str, Any]:
        return {
            "diff_norms": self.diff_norms,
            "curvature_after": self.curvature_after,
            "curvature_after_rel": self.curvature_after_rel,
            "kappas": self.kappas,
            "bounds": self.bounds,
            "max_input_curvature": self.max_input_curvature,
            "input_relative_curvature": self.input_relative_curvature,
            "reduction_tol": self.reduction_tol,
            "exact_output": self.exact_output,
            "certified": self.certified,
            "sweep_log": [s.to_dict() for s in self.sweep_log],
        }


def symmetrize_projector(proj: LinearOp) -> LinearOp:
    """
    Nearest metric-orthogonal projector: Hermitian part, then the spectral
    split of its eigenvalues at 1/2.
    """
    space = proj.domain
    m = proj.orthonormal_matrix
    herm = (m + m.conj().T) / 2
    if space.dim == 0:
        return proj
    w, v = sla.eigh(herm)
    keep = v[:, w > 0.5]
    return LinearOp.from_orthonormal(keep @ keep.conj().T, space, space)


def kernel_projector(d: LinearOp, rank_tol_rel: Optional[float] = None) -> LinearOp:
    """
    Projector onto ``ker d`` by the Green-operator route ``Id - d* G d``,
    ``G`` the Green operator of ``d d*``.
    """
    split = spectral_split(short_complex(d), 1, 0.0, rank_tol_rel)
    return identity(d.domain) - adjoint(d) @ split.green @ d


def kernel_projector_svd(d: LinearOp, rank_tol_rel: Optional[float] = None) -> LinearOp:
    """Projector onto ``ker d`` from an orthonormal kernel basis (independent route)."""
    return orthogonal_projector(d.domain, kernel_basis(d, rank_tol_rel))


def reduce(
    qc: QuasiComplex,
    reduction_tol: Optional[float] = None,
    rank_tol_rel: Optional[float] = None
) -> ReductionResult:
    """
    Reduce ``qc`` to a complex by the backward sweep.

    ``D^{N-1} = A^{N-1}`` exactly. A differential whose correction target
    ``|D^{k-1} A^{k-2}|`` is already within the exactness threshold is kept
    unchanged. Inputs with relative curvature above the certificate gate are
    still reduced but flagged uncertified.

    Raises:
        ShapeMismatch: for inputs without differentials
    """
    settings = get_settings()
    reduction_tol = settings.reduction_tol if reduction_tol is None else reduction_tol
    if qc.N < 1:
        raise ShapeMismatch("Reduction needs at least one differential")

    input_report = validate(qc)
    c = input_report.max_absolute
    a_norms = [op_norm(a) for a in qc.diffs]

    diffs: List[LinearOp] = list(qc.diffs)
    kappas = [0.0] * qc.N
    sweep_log: List[SweepStep] = []

    for k in range(qc.N, 1, -1):
        staged = qc.with_diffs(diffs)
        d_fixed = diffs[k - 1]
        a_target = qc.diffs[k - 2]

        split = spectral_split(staged, k, 0.0, rank_tol_rel)
        p = adjoint(d_fixed) @ split.green
        proj_raw = identity(qc.space(k - 1)) - p @ d_fixed
        proj_sym = symmetrize_projector(proj_raw)
        # D* G D squares the condition number of D
        proj = kernel_projector_svd(d_fixed, rank_tol_rel)

        target_curvature = op_norm(d_fixed @ a_target)
        threshold = max(
            settings.exactness_tol * op_norm(d_fixed) * a_norms[k - 2],
            settings.exactness_floor,
        )
        corrected = target_curvature > threshold
        if corrected:
            diffs[k - 2] = proj @ a_target

        p_norm = op_norm(p)
        kappas[k - 2] = p_norm * (1.0 + kappas[k - 1] * a_norms[k - 2])

        sweep_log.append(SweepStep(
            step=k,
            target=k - 2,
            green_norm=op_norm(split.green),
            parametrix_norm=p_norm,
            projector_defect_raw=op_norm(proj_raw @ proj_raw - proj_raw),
            projector_defect=op_norm(proj @ proj - proj),
            symmetrization_shift=op_norm(proj_sym - proj_raw),
            route_gap=op_norm(proj - proj_sym),
            target_curvature=target_curvature,
            corrected=corrected,
            kappa=kappas[k - 2],
        ))

    reduced = qc.with_diffs(diffs)
    diff_norms = [op_norm(d - a) for d, a in zip(diffs, qc.diffs)]
    d_norms = [op_norm(d) for d in diffs]

    curvature_after, curvature_after_rel = [], []
    exact_output = True
    for i in range(qc.N - 1):
        absolute = op_norm(diffs[i + 1] @ diffs[i])
        scale = d_norms[i + 1] * d_norms[i]
        curvature_after.append(absolute)
        curvature_after_rel.append(absolute / max(settings.exactness_floor, scale))
        if absolute > reduction_tol * (scale + 1.0):
            exact_output = False

    certified = exact_output and input_report.max_relative <= settings.certificate_gate
    if input_report.max_relative > settings.certificate_gate:
        logger.warning(
            "Input relative curvature %.3e exceeds the certificate gate %.3e; result is uncertified",
            input_report.max_relative, settings.certificate_gate,
        )
    if not exact_output:
        logger.warning("Reduced curvature %.3e exceeds reduction_tol %.1e", max(curvature_after), reduction_tol)

    return ReductionResult(
        reduced=reduced,
        diff_norms=diff_norms,
        curvature_after=curvature_after,
        curvature_after_rel=curvature_after_rel,
        kappas=kappas,
        sweep_log=sweep_log,
        max_input_curvature=c,
        input_relative_curvature=input_report.max_relative,
        reduction_tol=reduction_tol,
        exact_output=exact_output,
        certified=certified,
    )
