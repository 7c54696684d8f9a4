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

from ..Exceptions import InvalidParameter


class HyperParams:
    """
    Intensive prior scales and regularizer plus the extensive sizes used by
    weight-space runs. Extensive variances are derived on access.
    """

    def __init__(self, u: float = 1.0, w: float = 1.0, v: float = 1.0,
                 kappa: float = 0.0, N: int = 256, D: int = 1):
        """
        Init the hyperparameters.
        :param u: input weight scale
        :param w: recurrent weight scale
        :param v: readout weight scale
        :param kappa: regularizer (label noise)
        :param N: hidden width
        :param D: input dimension
        :raises InvalidParameter: any value out of range
        """
        for name, value in (("u", u), ("w", w), ("v", v)):
            if not value > 0:
                raise InvalidParameter(f"{name} has to be > 0, got {value}!")
        if kappa < 0:
            raise InvalidParameter(f"kappa has to be >= 0, got {kappa}!")
        if N < 1 or D < 1:
            raise InvalidParameter(f"N and D have to be >= 1, "
                                   f"got N={N}, D={D}!")
        self.u = float(u)
        self.w = float(w)
        self.v = float(v)
        self.kappa = float(kappa)
        self.N = int(N)
        self.D = int(D)

    @property
    def G_U(self) -> float:
        return self.u / self.D

    @property
    def G_W(self) -> float:
        return self.w / self.N

    @property
    def G_V(self) -> float:
        return self.v / self.N ** 2

    @property
    def kappa_ext(self) -> float:
        """
        The extensive temperature kappa / N of the Langevin dynamics.
        """
        return self.kappa / self.N

    def replace(self, **changes) -> "HyperParams":
        values = self.dict()
        values.update(changes)
        return HyperParams(**values)

    def __str__(self):
        return (f"HyperParams: u={self.u}, w={self.w}, v={self.v}, "
                f"kappa={self.kappa}, N={self.N}, D={self.D}")

    def dict(self) -> Dict:
        return {
            "u": self.u,
            "w": self.w,
            "v": self.v,
            "kappa": self.kappa,
            "N": self.N,
            "D": self.D
        }
