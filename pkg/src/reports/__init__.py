# Report generation
from .report import Report, digest_bytes, print_summary, write_json

__all__ = ['Report', 'digest_bytes', 'print_summary', 'write_json']
