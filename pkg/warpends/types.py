from typing import Any, ChainMap, Dict, List, Sequence, Tuple, Union

import numpy as np


Config = Dict[str, ChainMap[str, Any]]

ArrayLike = Union[float, np.ndarray]

# Cross-section point: one entry per coordinate name of the cross-section
Point = Sequence[ArrayLike]

Report = List[Tuple[str, Any]]
