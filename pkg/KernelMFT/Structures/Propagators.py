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

from .Kernel import Kernel


class Propagators:
    """
    Inverse kernels at the NNGP point.

    G_h = Sigma_h(H0)^-1 = H0^-1, G_h_plus = (w H0 + u X^+)^-1 and
    G_y = (v H0 + kappa)^-1 in the kappa_infinity limit.
    """

    def __init__(self, G_h: Kernel, G_h_plus: Kernel, G_y: Kernel):
        self.G_h = G_h
        self.G_h_plus = G_h_plus
        self.G_y = G_y

    def identity_error(self, H0: Kernel) -> float:
        """
        Sup-norm deviation of G_h H0 from the identity.
        """
        return float(np.max(np.abs(self.G_h.data @ H0.data
                                   - np.eye(H0.dim))))

    def __str__(self):
        return f"Propagators: {self.G_h}"

    def dict(self) -> Dict:
        return {
            "G_h": self.G_h.data.tolist(),
            "G_h_plus": self.G_h_plus.data.tolist(),
            "G_y": self.G_y.data.tolist()
        }
