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

import math
from typing import Dict

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import special

from ..Exceptions import InvalidParameter

# phi(h) = erf(ERF_SCALE * h) has unit slope at the origin
ERF_SCALE = math.sqrt(math.pi) / 2


class Activation:
    """
    Point-symmetric activation function phi.
    """
    VARIANTS = ("linear", "erf")

    def __init__(self, variant: str = "linear"):
        variant = str(variant).lower()
        if variant not in Activation.VARIANTS:
            raise InvalidParameter(f"Unknown activation {variant}! "
                                   f"Use one of {Activation.VARIANTS}.")
        self.variant = variant

    @property
    def is_linear(self) -> bool:
        return self.variant == "linear"

    @property
    def is_odd(self) -> bool:
        return True

    def __call__(self, h):
        if self.is_linear:
            return np.asarray(h, dtype=float)
        return special.erf(ERF_SCALE * np.asarray(h, dtype=float))

    def derivative(self, h):
        h = np.asarray(h, dtype=float)
        if self.is_linear:
            return np.ones_like(h)
        # d/dh erf(a h) = 2a / sqrt(pi) * exp(-(a h)^2) and 2a / sqrt(pi) = 1
        return np.exp(-(ERF_SCALE * h) ** 2)

    def gaussian_moment(self, cov: np.ndarray) -> np.ndarray:
        """
        <phi(h) phi(h)^T> for h ~ N(0, cov).

        Closed forms: the covariance itself (linear) and the arcsine form
        (2/pi) asin(2a^2 S_ij / sqrt((1 + 2a^2 S_ii)(1 + 2a^2 S_jj))) for
        erf(a h).
        :param cov: PSD covariance matrix
        :return: second moment matrix
        """
        cov = np.asarray(cov, dtype=float)
        if self.is_linear:
            return np.array(cov)
        k = 2 * ERF_SCALE ** 2
        norm = np.sqrt(1 + k * np.diag(cov))
        arg = np.clip(k * cov / np.outer(norm, norm), -1.0, 1.0)
        return (2 / math.pi) * np.arcsin(arg)

    def gaussian_moment_quadrature(self, cov: np.ndarray,
                                   order: int = 60) -> np.ndarray:
        """
        Same moment as gaussian_moment, entry by entry via a 2-D
        Gauss-Hermite rule. Works for any activation.
        :param cov: PSD covariance matrix
        :param order: nodes per dimension
        :return: second moment matrix
        """
        cov = np.asarray(cov, dtype=float)
        nodes, weights = hermegauss(order)
        weights = weights / math.sqrt(2 * math.pi)
        z1, z2 = np.meshgrid(nodes, nodes, indexing="ij")
        w2 = np.outer(weights, weights)

        n = cov.shape[0]
        out = np.zeros_like(cov)
        for i in range(n):
            for j in range(i, n):
                pair = np.array([[cov[i, i], cov[i, j]],
                                 [cov[j, i], cov[j, j]]])
                eig, vec = np.linalg.eigh(pair)
                root = vec * np.sqrt(np.clip(eig, 0.0, None))
                hi = root[0, 0] * z1 + root[0, 1] * z2
                hj = root[1, 0] * z1 + root[1, 1] * z2
                out[i, j] = out[j, i] = np.sum(w2 * self(hi) * self(hj))
        return out

    def __str__(self):
        return f"Activation: {self.variant}"

    def dict(self) -> Dict:
        return {"variant": self.variant}
