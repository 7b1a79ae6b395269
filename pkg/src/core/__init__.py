# Core linear algebra and quasicomplex types
from .linop import InnerProductSpace, LinearOp, adjoint, op_norm, pinv, rank_profile
from .quasicomplex import QuasiComplex, CurvatureReport, validate, laplacians

__all__ = [
    'InnerProductSpace', 'LinearOp', 'adjoint', 'op_norm', 'pinv', 'rank_profile',
    'QuasiComplex', 'CurvatureReport', 'validate', 'laplacians',
]
