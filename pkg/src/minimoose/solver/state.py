from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TimeState:
    t: float = 0.0
    dt: float = 1.0
    step: int = 0
    u_old: np.ndarray | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
