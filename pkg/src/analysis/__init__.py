# Analysis modules
from .hodge import hodge_decompose, parametrix, defect_scaling
from .reduction import reduce, ReductionResult
from .cohomology import betti, euler_quasi, endomorphism, lefschetz
from .symbolcx import SymbolComplexSample, symbol_exact, symbol_laplacian_check, sample_sweep
from .analyzer import ComplexAnalyzer, ComplexAnalysis

__all__ = [
    'hodge_decompose', 'parametrix', 'defect_scaling',
    'reduce', 'ReductionResult',
    'betti', 'euler_quasi', 'endomorphism', 'lefschetz',
    'SymbolComplexSample', 'symbol_exact', 'symbol_laplacian_check', 'sample_sweep',
    'ComplexAnalyzer', 'ComplexAnalysis',
]
