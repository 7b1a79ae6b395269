"""
Cohomology
==========
Betti numbers, Euler characteristics (for complexes and, through
reduction, for quasicomplexes) and Lefschetz numbers of endomorphisms.

The cohomology of a quasicomplex is not defined: ``betti`` refuses
non-exact input, and only the Euler characteristic of a reduced complex is
offered for quasicomplexes. Lefschetz numbers are computed for complexes
only.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence
import logging

import numpy as np
import scipy.linalg as sla

from config.settings import get_settings
from src.analysis.hodge import harmonic_ranks, spectral_split
from src.analysis.reduction import reduce
from src.core.linop import LinearOp, image_basis, kernel_basis, op_norm, rank_profile
from src.core.quasicomplex import QuasiComplex, validate
from src.errors import CertificateFailure, NotAComplex, NotAnEndomorphism, ShapeMismatch
from src.utils.formatting import real_if_close

logger = logging.getLogger(__name__)

Route = Literal["rank_nullity", "harmonic"]


@dataclass
class BettiReport:
    """Cohomology dimensions and Euler characteristic of a complex."""
    betti: List[int]
    route: str
    chi: int

    def to_dict(self) -> Dict[str, Any]:
        return {"betti": self.betti, "route": self.route, "chi": self.chi}


def _require_complex(c: QuasiComplex, exactness_tol: Optional[float] = None) -> None:
    report = validate(c, exactness_tol)
    if not report.is_exact:
        raise NotAComplex(
            f"Curvature {report.max_relative:.3e} (relative) exceeds the exactness tolerance; "
            "reduce the quasicomplex first"
        )


def betti(
    c: QuasiComplex,
    route: Route = "rank_nullity",
    exactness_tol: Optional[float] = None,
    rank_tol_rel: Optional[float] = None
) -> BettiReport:
    """
    Betti numbers ``b^i = dim ker A^i - rank A^{i-1}``.

    The harmonic route counts ``dim ker Delta^i`` instead; both agree on
    complexes.

    Raises:
        NotAComplex: when the curvature exceeds the exactness tolerance
    """
    _require_complex(c, exactness_tol)

    if route == "rank_nullity":
        ranks = [rank_profile(d, rank_tol_rel).rank for d in c.diffs]
        values = []
        for i in range(c.N + 1):
            kernel_dim = c.dims[i] - (ranks[i] if i < c.N else 0)
            b = kernel_dim - (ranks[i - 1] if i > 0 else 0)
            if b < 0:
                raise NotAComplex(f"Image of A^{i - 1} is not inside ker A^{i} at the rank tolerance")
            values.append(b)
    elif route == "harmonic":
        values = harmonic_ranks(c, rank_tol_rel)
    else:
        raise ValueError(f"Unknown route: {route}")

    chi = sum((-1) ** i * b for i, b in enumerate(values))
    return BettiReport(betti=values, route=route, chi=chi)


# =========================================================================
# EULER CHARACTERISTIC OF QUASICOMPLEXES
# =========================================================================

@dataclass
class EulerReport:
    """Euler characteristic of a quasicomplex via reduction, with consistency trials."""
    chi: int
    chis: List[int] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    trial_eps: float = 0.0
    consistent: bool = True
    certified: bool = True
    betti_reduced: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "chi": self.chi,
            "trial_chis": self.chis,
            "trial_seeds": self.seeds,
            "trial_eps": self.trial_eps,
            "consistent": self.consistent,
            "certified": self.certified,
            "betti_reduced": self.betti_reduced,
        }


def _reduced_chi(qc: QuasiComplex):
    """Betti numbers of the reduced complex, gated by the reduction's own curvature certificate."""
    result = reduce(qc)
    gate = max(get_settings().exactness_tol, 2 * max(result.curvature_after_rel, default=0.0))
    try:
        report = betti(result.reduced, "rank_nullity", exactness_tol=gate)
    except NotAComplex as e:
        logger.warning("Reduced complex fails the rank check (%s); chi from the dimension count", e)
        return BettiReport(betti=[], route="dimension_count", chi=qc.euler_count), False
    return report, result.certified


def euler_quasi(
    qc: QuasiComplex,
    trials: int = 1,
    seed: Optional[int] = None,
    trial_eps: Optional[float] = None
) -> EulerReport:
    """
    Euler characteristic of ``qc`` as the Euler characteristic of a reduced complex.

    The unperturbed reduction always runs. With ``trials > 1`` it is repeated
    on ``trials`` seeded re-perturbations of size ``trial_eps`` and every run
    must give the same value.

    Raises:
        CertificateFailure: when the trial values disagree
    """
    from src.builders.perturb import PerturbationSpec, perturb

    settings = get_settings()
    seed = settings.default_seed if seed is None else seed
    trial_eps = settings.euler_trial_eps if trial_eps is None else trial_eps

    base, certified = _reduced_chi(qc)
    chis = [base.chi]
    seeds: List[int] = []
    if trials > 1:
        seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(trials)]
        for trial_seed in seeds:
            perturbed = perturb(qc, PerturbationSpec(eps=trial_eps, seed=trial_seed))
            report, trial_certified = _reduced_chi(perturbed)
            chis.append(report.chi)
            certified = certified and trial_certified

    consistent = len(set(chis)) == 1
    if not consistent:
        raise CertificateFailure(f"Euler characteristic differs across trials: {chis}")

    return EulerReport(
        chi=base.chi,
        chis=chis,
        seeds=seeds,
        trial_eps=trial_eps,
        consistent=consistent,
        certified=certified,
        betti_reduced=base.betti,
    )


# =========================================================================
# LEFSCHETZ NUMBERS
# =========================================================================

@dataclass(frozen=True, eq=False)
class Endomorphism:
    """Maps ``E^i: V^i -> V^i`` with their commutation defects against ``A``."""
    maps: tuple
    commute_defect: tuple

    def to_dict(self) -> Dict[str, Any]:
        from src.utils.formatting import encode_matrix
        return {"maps": [encode_matrix(e.matrix) for e in self.maps]}


def endomorphism(c: QuasiComplex, maps: Sequence[Any]) -> Endomorphism:
    """
    Wrap per-step maps as an endomorphism of ``c``.

    Defects are relative: ``|E^{i+1}A^i - A^iE^i| / max(1, |A^i| max(|E^i|, |E^{i+1}|))``.

    Raises:
        ShapeMismatch: when the maps do not fit the spaces of ``c``
    """
    if len(maps) != c.N + 1:
        raise ShapeMismatch(f"Expected {c.N + 1} maps, got {len(maps)}")
    ops = []
    for i, m in enumerate(maps):
        matrix = m.matrix if isinstance(m, LinearOp) else m
        ops.append(LinearOp(c.spaces[i], c.spaces[i], matrix))

    defects = []
    for i in range(c.N):
        a = c.diffs[i]
        raw = op_norm(ops[i + 1] @ a - a @ ops[i])
        scale = max(1.0, op_norm(a) * max(op_norm(ops[i]), op_norm(ops[i + 1])))
        defects.append(raw / scale)
    return Endomorphism(maps=tuple(ops), commute_defect=tuple(defects))


@dataclass
class LefschetzResult:
    """Lefschetz number with per-step traces and the quotient-basis cross-check."""
    value: complex
    traces: List[complex]
    oracle_value: complex
    oracle_agrees: bool

    def to_dict(self) -> Dict[str, Any]:
        def encode(z: complex) -> Any:
            z = real_if_close(z)
            return z if isinstance(z, float) else {"re": z.real, "im": z.imag}

        return {
            "lefschetz": encode(self.value),
            "traces": [encode(t) for t in self.traces],
            "oracle": encode(self.oracle_value),
            "oracle_agrees": self.oracle_agrees,
        }


def _quotient_trace(c: QuasiComplex, e: LinearOp, i: int, rank_tol_rel: Optional[float]) -> complex:
    """Trace of the map induced on ``ker A^i / im A^{i-1}`` in an explicit quotient basis."""
    z = kernel_basis(c.diff(i), rank_tol_rel)
    b = image_basis(c.diff(i - 1), rank_tol_rel)
    if z.shape[1] == 0:
        return 0j

    # Coordinates of the image inside the kernel basis, and of E restricted to the kernel.
    y = np.linalg.lstsq(z, b, rcond=None)[0]
    m_e = np.linalg.lstsq(z, e.matrix @ z, rcond=None)[0]

    dim_z, dim_b = z.shape[1], y.shape[1]
    if dim_b:
        q, _ = np.linalg.qr(y)
        complement = np.eye(dim_z) - q @ q.conj().T
    else:
        complement = np.eye(dim_z)
    # Complement spanned by coordinate vectors, deliberately not orthogonal to the image.
    _, _, pivots = sla.qr(complement, pivoting=True)
    w = np.eye(dim_z)[:, pivots[:dim_z - dim_b]]

    basis = np.hstack([y, w])
    induced = np.linalg.solve(basis, m_e @ basis)
    return complex(np.trace(induced[dim_b:, dim_b:]))


def lefschetz_oracle(c: QuasiComplex, e: Endomorphism, rank_tol_rel: Optional[float] = None) -> complex:
    """Lefschetz number from explicit quotient bases ``ker A^i / im A^{i-1}``."""
    return sum((-1) ** i * _quotient_trace(c, e.maps[i], i, rank_tol_rel) for i in range(c.N + 1))


def lefschetz(
    c: QuasiComplex,
    e: Endomorphism,
    commute_tol: Optional[float] = None,
    rank_tol_rel: Optional[float] = None
) -> LefschetzResult:
    """
    Lefschetz number ``L(E) = sum (-1)^i tr(H^i E^i H^i)``.

    ``H^i`` is the harmonic projector; the compression is the trace of the
    map induced on cohomology because ``ker A^i`` splits orthogonally into
    harmonic and exact parts.

    Raises:
        NotAComplex: for quasicomplexes (Lefschetz numbers are not defined there)
        NotAnEndomorphism: when the commutation defect exceeds ``commute_tol``
    """
    settings = get_settings()
    commute_tol = settings.commute_tol if commute_tol is None else commute_tol
    _require_complex(c)
    worst = max(e.commute_defect, default=0.0)
    if worst > commute_tol:
        raise NotAnEndomorphism(f"Commutation defect {worst:.3e} exceeds {commute_tol:.1e}")

    traces = []
    for i in range(c.N + 1):
        h = spectral_split(c, i, 0.0, rank_tol_rel).harmonic
        traces.append(complex(np.trace((h @ e.maps[i] @ h).matrix)))
    value = sum((-1) ** i * t for i, t in enumerate(traces))

    oracle = lefschetz_oracle(c, e, rank_tol_rel)
    agrees = abs(value - oracle) <= settings.hodge_tol * max(1.0, abs(value))

    is_real = all(np.isrealobj(m.matrix) or not np.any(np.imag(m.matrix)) for m in e.maps + c.diffs)
    if is_real and abs(value.imag) > 1e-10:
        logger.warning("Lefschetz number of real data has imaginary part %.3e", value.imag)

    return LefschetzResult(value=value, traces=traces, oracle_value=oracle, oracle_agrees=agrees)
