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

"""
Closed-form analytics of the T=4 endpoint task: diagonal first-order
conditions, curvature of the order parameter, critical signal strength and
the mean-field branch.
"""

import logging
import math
from typing import Tuple

from scipy import optimize

from .Exceptions import InvalidParameter, NoRoot
from .Structures.ArchMask import ArchMask
from .Structures.LandauPoint import LandauPoint

CRITICAL_LAMBDA = 8.0


def _diagonal_residual(c: float, u: float, w: float, y2_over_v: float) \
        -> float:
    # e-condition after a^2 = u c / w and e = c^2 / a
    return c * c / u - c ** 1.5 * math.sqrt(w / u) - y2_over_v


def diagonal_foc_solve(lam: float, u: float = 1.0, w: float = 1.0,
                       v: float = 1.0,
                       arch: ArchMask = ArchMask.RNN) -> LandauPoint:
    """
    Solve the diagonal first-order conditions at zero off-diagonals.

    With a^2 = (u/w) c and e = c^2 / a the e-condition is a scalar equation
    in c, bracketed on [u w, 100 u w] and polished by Newton.
    :param lam: signal strength y^2 / (u w^2 v)
    :param u: input scale
    :param w: recurrent scale
    :param v: readout scale
    :param arch: architecture stored on the point
    :return: the point with b2 = b3 = d = 0

    :raises InvalidParameter: lam < 0
    :raises NoRoot: no sign change found
    """
    if lam < 0:
        raise InvalidParameter(f"lambda has to be >= 0, got {lam}!")
    y2_over_v = lam * u * w * w
    c_nngp = u * w
    if lam == 0:
        c = c_nngp
    else:
        lower, upper = c_nngp, 100 * c_nngp
        for _ in range(20):
            if _diagonal_residual(upper, u, w, y2_over_v) > 0:
                break
            upper *= 10
        else:
            raise NoRoot(f"No bracket for the diagonal condition at "
                         f"lambda={lam}!")
        try:
            c = optimize.brentq(_diagonal_residual, lower, upper,
                                args=(u, w, y2_over_v), xtol=1e-14)
            c = optimize.newton(_diagonal_residual, c,
                                args=(u, w, y2_over_v), tol=1e-15,
                                maxiter=20)
        except (ValueError, RuntimeError) as e:
            raise NoRoot(f"Diagonal condition at lambda={lam}: {e}")

    a = math.sqrt(u * c / w)
    e = c * c / a
    point = LandauPoint(a=a, c=c, e=e, lam=lam, arch=arch)
    logging.debug(point)
    return point


def quadratic_coefficient(p: LandauPoint, w: float = 1.0) -> float:
    """
    Curvature of the order-parameter objective at d = 0.

    RNN: -1/(ce) + 1/(w(c^2 + ae)). DNN: -1/(ce).
    """
    coefficient = -1.0 / (p.c * p.e)
    if p.arch is ArchMask.RNN:
        coefficient += 1.0 / (w * (p.c * p.c + p.a * p.e))
    return coefficient


def critical_lambda() -> float:
    return CRITICAL_LAMBDA


def order_parameter(lam: float, u: float = 1.0, w: float = 1.0,
                    v: float = 1.0, arch: ArchMask = ArchMask.RNN) -> float:
    """
    Squared order parameter d*^2 = C2 c^2 e^2 with the diagonals frozen at
    their first-order values, zero below the transition.
    """
    point = diagonal_foc_solve(lam, u, w, v, arch)
    if arch is ArchMask.DNN or lam <= CRITICAL_LAMBDA:
        return 0.0
    c2 = quadratic_coefficient(point, w)
    return max(0.0, c2 * point.c ** 2 * point.e ** 2)


def slaving_coefficients(p: LandauPoint) -> Tuple[float, float]:
    """
    b2 = alpha d and b3 = (alpha / c) d^2 to leading order.
    :return: (alpha, b3 / d^2)
    """
    if p.arch is ArchMask.DNN:
        return 0.0, 0.0
    alpha = p.a * p.c / (p.c * p.c + p.a * p.e)
    return alpha, alpha / p.c


def landau_point(lam: float, u: float = 1.0, w: float = 1.0, v: float = 1.0,
                 arch: ArchMask = ArchMask.RNN) -> LandauPoint:
    """
    Full leading-order point: diagonals, d = +d*, and the slaved b2, b3.
    """
    point = diagonal_foc_solve(lam, u, w, v, arch)
    d = math.sqrt(order_parameter(lam, u, w, v, arch))
    alpha, b3_over_d2 = slaving_coefficients(point)
    return LandauPoint(a=point.a, c=point.c, e=point.e, lam=lam, arch=arch,
                       b2=alpha * d, b3=b3_over_d2 * d * d, d=d)
