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

from typing import Dict

import numpy as np

from .ArchMask import ArchMask
from .Kernel import Kernel
from ..Exceptions import InvalidParameter, InvalidShape


class LandauPoint:
    """
    The hidden kernel of the T=4 scalar endpoint task,

        | a   b2  b3 |
        | b2  c   d  |
        | b3  d   e  |

    over hidden times 1, 2, 3.
    """

    def __init__(self, a: float, c: float, e: float, lam: float,
                 arch: ArchMask, b2: float = 0.0, b3: float = 0.0,
                 d: float = 0.0):
        """
        Init a new point.
        :param a: H^{11}
        :param c: H^{22}
        :param e: H^{33}
        :param lam: signal strength y^2 / (u w^2 v)
        :param arch: architecture
        :param b2: H^{21}
        :param b3: H^{31}
        :param d: H^{32}, the order parameter
        :raises InvalidParameter: non-positive diagonal
        """
        if not (a > 0 and c > 0 and e > 0):
            raise InvalidParameter(f"Diagonal entries have to be > 0, got "
                                   f"a={a}, c={c}, e={e}!")
        self.a = float(a)
        self.c = float(c)
        self.e = float(e)
        self.b2 = float(b2)
        self.b3 = float(b3)
        self.d = float(d)
        self.lam = float(lam)
        self.arch = arch

    @classmethod
    def from_kernel(cls, H: Kernel, lam: float, arch: ArchMask) \
            -> "LandauPoint":
        """
        Read the entries off a single-pattern T=4 hidden kernel.
        """
        if H.grid.T_total != 4 or H.P != 1 or H.time_range != "hidden":
            raise InvalidShape(f"{H} is not a T=4 single-pattern hidden "
                               f"kernel!")
        return cls(a=H.entry(1, 1), c=H.entry(2, 2), e=H.entry(3, 3),
                   lam=lam, arch=arch, b2=H.entry(2, 1), b3=H.entry(3, 1),
                   d=H.entry(3, 2))

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b2, self.b3],
                         [self.b2, self.c, self.d],
                         [self.b3, self.d, self.e]])

    def __str__(self):
        return (f"LandauPoint: lambda={self.lam}, arch={self.arch}, "
                f"a={self.a:.6g}, c={self.c:.6g}, e={self.e:.6g}, "
                f"b2={self.b2:.3g}, b3={self.b3:.3g}, d={self.d:.3g}")

    def dict(self) -> Dict:
        return {
            "lambda": self.lam,
            "arch": str(self.arch),
            "a": self.a,
            "b2": self.b2,
            "b3": self.b3,
            "c": self.c,
            "d": self.d,
            "e": self.e
        }
