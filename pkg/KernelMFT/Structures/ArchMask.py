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

from enum import Enum

import numpy as np

from ..Exceptions import InvalidParameter


class ArchMask(Enum):
    """
    The masking operator M[.] on time indices.

    RNN: identity. DNN: keeps only the P x P blocks with t == t'.
    """
    RNN = "RNN"
    DNN = "DNN"

    @classmethod
    def from_name(cls, name: str) -> "ArchMask":
        try:
            return cls(str(name).upper())
        except ValueError:
            raise InvalidParameter(f"Unknown architecture {name}! "
                                   f"Use RNN or DNN.")

    def project(self, data: np.ndarray, P: int) -> np.ndarray:
        """
        Apply the mask to a raw joint (time, pattern) matrix.
        :param data: square matrix of dimension n_times * P
        :param P: pattern count
        :return: masked copy
        """
        if self is ArchMask.RNN:
            return np.array(data, dtype=float, copy=True)
        n_times = data.shape[0] // P
        block = np.kron(np.eye(n_times), np.ones((P, P)))
        return data * block

    def __str__(self):
        return self.value
