"""
Koszul Symbols
==============
The principal symbol of the exterior derivative, ``sigma(d)(x, xi) = xi ^ .``
on ``Lambda^k(R^n)``, in the lexicographic multi-index basis. Exact at
every ``xi != 0``; its symbol Laplacian is ``|xi|^2 Id``.
"""

from functools import lru_cache
from itertools import combinations, count
from math import comb
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.symbolcx import SymbolComplexSample
from src.errors import UnsupportedDimension

SUPPORTED_DIMENSIONS = (2, 3, 4)


@lru_cache(maxsize=None)
def _basis(n: int, k: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(combinations(range(n), k))


def wedge_matrices(xi: Sequence[float]) -> List[np.ndarray]:
    """Matrices of ``xi ^ . : Lambda^k -> Lambda^{k+1}`` for k = 0..n-1."""
    xi = np.asarray(xi, dtype=float)
    n = xi.size
    mats = []
    for k in range(n):
        source, target = _basis(n, k), _basis(n, k + 1)
        index = {multi: row for row, multi in enumerate(target)}
        m = np.zeros((comb(n, k + 1), comb(n, k)))
        for col, multi in enumerate(source):
            for j in range(n):
                if j in multi:
                    continue
                # e_j ^ e_I = (-1)^{#{i in I : i < j}} e_{I + j}
                sign = (-1) ** sum(1 for i in multi if i < j)
                m[index[tuple(sorted(multi + (j,)))], col] += sign * xi[j]
        mats.append(m)
    return mats


def _check_dimension(n: int) -> None:
    if n not in SUPPORTED_DIMENSIONS:
        raise UnsupportedDimension(f"Koszul generator supports n in {SUPPORTED_DIMENSIONS}, got {n}")


def koszul_sample(xi: Sequence[float], point_id: Optional[str] = None, orders: Optional[Sequence[float]] = None) -> SymbolComplexSample:
    """Koszul symbol complex at covector ``xi``."""
    xi = np.asarray(xi, dtype=float)
    _check_dimension(xi.size)
    mats = wedge_matrices(xi)
    return SymbolComplexSample(
        point_id=point_id or f"xi={np.round(xi, 6).tolist()}",
        xi_norm=float(np.linalg.norm(xi)),
        mats=tuple(mats),
        orders=tuple(orders) if orders is not None else (1.0,) * xi.size,
        fiber_dims=tuple(comb(xi.size, k) for k in range(xi.size + 1)),
    )


def koszul_sample_at(n: int, seed: int, index: int) -> SymbolComplexSample:
    """The ``index``-th sample of the seeded stream: a random unit covector."""
    _check_dimension(n)
    rng = np.random.Generator(np.random.PCG64([int(seed), int(index)]))
    xi = rng.standard_normal(n)
    xi /= np.linalg.norm(xi)
    return koszul_sample(xi, point_id=f"koszul{n}:{seed}:{index}")


def koszul_sampler(n: int) -> Callable[[int, int], SymbolComplexSample]:
    """Generator callable ``(seed, index) -> sample`` for sweeps."""
    _check_dimension(n)

    def generate(seed: int, index: int) -> SymbolComplexSample:
        return koszul_sample_at(n, seed, index)

    return generate


def koszul_generator(n: int, seed: int = 0) -> Iterator[SymbolComplexSample]:
    """Endless stream of Koszul samples at seeded random unit covectors."""
    _check_dimension(n)
    return (koszul_sample_at(n, seed, k) for k in count())


def degenerate_sample(n: int, point_id: str = "degenerate") -> SymbolComplexSample:
    """Koszul sample with ``sigma_0`` zeroed: not exact at step 0."""
    sample = koszul_sample(np.eye(n)[0], point_id=point_id)
    mats = (np.zeros_like(sample.mats[0]),) + sample.mats[1:]
    return SymbolComplexSample(point_id, sample.xi_norm, mats, sample.orders, sample.fiber_dims)
