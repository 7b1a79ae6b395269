# Utility modules
from .formatting import encode_matrix, decode_matrix, ensure_finite, format_number
from .timing import Timings

__all__ = ['encode_matrix', 'decode_matrix', 'ensure_finite', 'format_number', 'Timings']
