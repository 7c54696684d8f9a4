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

from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .TimeGrid import TimeGrid, TIME_RANGES
from ..Exceptions import InvalidParameter, InvalidShape


class Kernel:
    """
    Symmetric matrix over the joint (timestep, pattern) index space.

    Flattening is time-major, pattern-minor. The data is symmetrized on
    construction and stored read-only.
    """

    def __init__(self, grid: TimeGrid, P: int, data,
                 time_range: str = "hidden",
                 times: Optional[Iterable[int]] = None):
        """
        Init a new kernel.
        :param grid: the time grid
        :param P: pattern count
        :param data: square matrix of dimension len(times) * P
        :param time_range: "input", "hidden" or "output"
        :param times: explicit subset of the range (restricted kernels)

        :raises InvalidShape: data does not match the index space
        """
        if time_range not in TIME_RANGES:
            raise InvalidParameter(f"Unknown time range {time_range}!")
        if P < 1:
            raise InvalidParameter(f"P has to be >= 1, got {P}!")

        self.grid = grid
        self.P = int(P)
        self.time_range = time_range
        self.times: Tuple[int, ...] = tuple(
            grid.times(time_range) if times is None else times)

        data = np.array(data, dtype=float)
        dim = len(self.times) * self.P
        if data.shape != (dim, dim):
            raise InvalidShape(f"Kernel data has shape {data.shape}, "
                               f"expected {(dim, dim)}!")
        data = 0.5 * (data + data.T)
        data.setflags(write=False)
        self.data = data

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def index(self, t: int, p: int = 0) -> int:
        """
        Flatten a (time, pattern) pair.
        :raises InvalidShape: pair not in the kernel's index space
        """
        if t not in self.times or not 0 <= p < self.P:
            raise InvalidShape(f"({t}, {p}) is not an index of {self}!")
        return self.times.index(t) * self.P + p

    def unflatten(self, i: int) -> Tuple[int, int]:
        if not 0 <= i < self.dim:
            raise InvalidShape(f"Flat index {i} out of range!")
        return self.times[i // self.P], i % self.P

    def entry(self, t: int, t2: int, p: int = 0, p2: int = 0) -> float:
        return float(self.data[self.index(t, p), self.index(t2, p2)])

    def block(self, t: int, t2: int) -> np.ndarray:
        """
        The P x P block between two times.
        """
        i = self.index(t, 0)
        j = self.index(t2, 0)
        return np.array(self.data[i:i + self.P, j:j + self.P])

    def with_data(self, data) -> "Kernel":
        """
        Same index space, new values.
        """
        return Kernel(self.grid, self.P, data, self.time_range, self.times)

    def is_psd(self, rel_tol: float = 1e-10) -> bool:
        eig = np.linalg.eigvalsh(self.data)
        scale = max(float(np.max(np.abs(eig))), 1.0) if eig.size else 1.0
        return bool(eig.size == 0 or eig.min() >= -rel_tol * scale)

    def __str__(self):
        return (f"Kernel: range={self.time_range}, times={list(self.times)}, "
                f"P={self.P}, T={self.grid.T_total}")

    def dict(self) -> Dict:
        """
        Get a dict of the metadata for data backups.
        :return: Dict representing the object without its values.
        """
        return {
            "grid": self.grid.dict(),
            "P": self.P,
            "time_range": self.time_range,
            "times": list(self.times)
        }
