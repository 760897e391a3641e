"""
Utility modules for the cavity gate simulator
"""
from .console import (
    configure_logging,
    print_error,
    print_header,
    print_info,
    print_section,
    print_success,
    print_warning
)

__all__ = [
    'configure_logging',
    'print_error',
    'print_header',
    'print_info',
    'print_section',
    'print_success',
    'print_warning'
]
