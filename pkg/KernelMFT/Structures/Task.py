#  Copyright (C) 2026.
#
#  This program is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  This program is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with this program.  If not, see <http://www.gnu.org/licenses/>.
#

from typing import Dict, Optional

import numpy as np

from .TimeGrid import TimeGrid
from ..Exceptions import InvalidShape


class Task:
    """
    Inputs, labels and supervision of one training problem.
    """

    def __init__(self, grid: TimeGrid, x: np.ndarray, y: np.ndarray,
                 generator: str = "custom", params: Optional[Dict] = None,
                 seed: Optional[int] = None):
        """
        Init a new task.
        :param grid: time grid carrying the supervised set
        :param x: inputs indexed (input_time, pattern, input_dim)
        :param y: labels indexed (output_time, pattern); entries outside
                  the supervised set are only used for evaluation
        :param generator: name of the generating function (manifest)
        :param params: generator parameters (manifest)
        :param seed: generator seed, if any (manifest)

        :raises InvalidShape: inconsistent or non-finite tensors
        """
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        if x.ndim != 3 or x.shape[0] != grid.T_minus:
            raise InvalidShape(f"x has shape {x.shape}, expected "
                               f"({grid.T_minus}, P, D)!")
        if y.shape != x.shape[:2]:
            raise InvalidShape(f"y has shape {y.shape}, expected "
                               f"{x.shape[:2]}!")
        if not np.all(np.isfinite(x)):
            raise InvalidShape("x contains non-finite entries!")
        rows = [t - 2 for t in grid.supervised]
        if not np.all(np.isfinite(y[rows])):
            raise InvalidShape("y contains non-finite supervised entries!")

        x.setflags(write=False)
        y.setflags(write=False)
        self.grid = grid
        self.x = x
        self.y = y
        self.generator = generator
        self.params = dict(params or {})
        self.seed = seed

    @property
    def P(self) -> int:
        return self.x.shape[1]

    @property
    def D(self) -> int:
        return self.x.shape[2]

    @property
    def supervised(self):
        return self.grid.supervised

    def label(self, t: int) -> np.ndarray:
        """
        Labels of all patterns at output time t.
        """
        return np.array(self.y[t - 2])

    def __str__(self):
        return (f"Task: {self.generator}, T={self.grid.T_total}, P={self.P}, "
                f"D={self.D}, supervised={list(self.supervised)}")

    def dict(self) -> Dict:
        """
        Task manifest.
        """
        return {
            "generator": self.generator,
            "params": self.params,
            "seed": self.seed,
            "grid": self.grid.dict(),
            "P": self.P,
            "D": self.D
        }
