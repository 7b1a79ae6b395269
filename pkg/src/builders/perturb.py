"""
Seeded Perturbations
====================
Perturb the differentials of a complex by small operators ``C^i``, the
finite-dimensional stand-in for compact (smoothing) perturbations.

Entries are complex Gaussian, drawn from numpy's ``PCG64`` bit generator
seeded through ``SeedSequence(seed).spawn(N)`` (one independent stream per
differential), then rescaled to metric operator norm exactly ``eps``.
Reports carry the seed and the generator name.
"""

from dataclasses import dataclass
from typing import List, Optional
import logging

import numpy as np

from src.core.linop import LinearOp, op_norm
from src.core.quasicomplex import QuasiComplex

logger = logging.getLogger(__name__)

RNG_NAME = "PCG64"


@dataclass(frozen=True)
class PerturbationSpec:
    """Target norm, optional rank limit and seed of a perturbation."""
    eps: float
    seed: int = 0
    rank_limit: Optional[int] = None

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError(f"eps must be non-negative, got {self.eps}")
        if self.rank_limit is not None and self.rank_limit < 1:
            raise ValueError(f"rank_limit must be positive, got {self.rank_limit}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "seed": int(self.seed),
            "rank_limit": self.rank_limit,
            "rng": RNG_NAME,
        }


def _rng(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(getattr(np.random, RNG_NAME)(seed_seq))


def perturbations(qc: QuasiComplex, spec: PerturbationSpec) -> List[LinearOp]:
    """The operators ``C^i`` with ``|C^i| = eps`` (zero operators for eps = 0 or empty matrices)."""
    children = np.random.SeedSequence(int(spec.seed)).spawn(qc.N)
    out = []
    for d, child in zip(qc.diffs, children):
        rows, cols = d.shape
        rng = _rng(child)
        if spec.rank_limit is not None and spec.rank_limit < min(rows, cols):
            r = spec.rank_limit
            left = rng.standard_normal((rows, r)) + 1j * rng.standard_normal((rows, r))
            right = rng.standard_normal((r, cols)) + 1j * rng.standard_normal((r, cols))
            matrix = left @ right
        else:
            matrix = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)

        c = LinearOp(d.domain, d.codomain, matrix)
        norm = op_norm(c)
        if spec.eps == 0 or norm == 0:
            out.append(LinearOp(d.domain, d.codomain, np.zeros((rows, cols), dtype=complex)))
        else:
            out.append(c * (spec.eps / norm))
    return out


def perturb(qc: QuasiComplex, spec: PerturbationSpec) -> QuasiComplex:
    """``diffs'[i] = diffs[i] + C^i``; orders are preserved. ``eps = 0`` returns ``qc`` itself."""
    if spec.eps == 0:
        return qc
    cs = perturbations(qc, spec)
    logger.debug("Perturbed %r with eps=%.1e seed=%d (%s)", qc, spec.eps, spec.seed, RNG_NAME)
    return qc.with_diffs([d + c for d, c in zip(qc.diffs, cs)])
