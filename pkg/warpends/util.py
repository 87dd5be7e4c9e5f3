import math
import os.path
from typing import Any, Iterable, Tuple

import numpy as np


def expand(path: str) -> str:
    return os.path.abspath(os.path.expanduser(os.path.expandvars(path)))


def format_value(value: Any) -> str:
    """Report rendering: floats with 12 significant digits, sequences comma separated"""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return 'nan'
        return f'{float(value):.12g}'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (tuple, list, np.ndarray)):
        return '(' + ', '.join(format_value(item) for item in value) + ')'
    return str(value)


def format_report(lines: Iterable[Tuple[str, Any]]) -> str:
    return ''.join(f'{key}: {format_value(value)}\n' for key, value in lines)
