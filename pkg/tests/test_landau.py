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

import numpy as np
import pytest
from numpy.testing import assert_allclose

from KernelMFT.Exceptions import InvalidParameter, InvalidShape
from KernelMFT.Landau import critical_lambda, diagonal_foc_solve, \
    landau_point, order_parameter, quadratic_coefficient, \
    slaving_coefficients
from KernelMFT.Structures.ArchMask import ArchMask
from KernelMFT.Structures.LandauPoint import LandauPoint

from conftest import hidden_kernel


@pytest.mark.parametrize("lam, u, expected", [
    (0.0, 1.0, (1.0, 1.0, 1.0)),
    (8.0, 1.0, (2.0, 4.0, 8.0)),
    (8.0, 2.0, (4.0, 8.0, 16.0)),
])
def test_diagonal_solution(lam, u, expected):
    point = diagonal_foc_solve(lam, u=u)
    assert_allclose((point.a, point.c, point.e), expected, rtol=1e-10)
    assert point.d == 0.0 and point.b2 == 0.0 and point.b3 == 0.0


def test_diagonal_solution_rejects_negative_lambda():
    with pytest.raises(InvalidParameter):
        diagonal_foc_solve(-1.0)


def test_quadratic_coefficient_at_transition():
    rnn = LandauPoint(2.0, 4.0, 8.0, 8.0, ArchMask.RNN)
    dnn = LandauPoint(2.0, 4.0, 8.0, 8.0, ArchMask.DNN)
    assert quadratic_coefficient(rnn) == pytest.approx(0.0, abs=1e-15)
    assert quadratic_coefficient(dnn) == pytest.approx(-1.0 / 32.0)


def test_quadratic_coefficient_changes_sign():
    below = diagonal_foc_solve(6.0)
    above = diagonal_foc_solve(10.0)
    assert quadratic_coefficient(below) < 0 < quadratic_coefficient(above)


def test_critical_lambda():
    assert critical_lambda() == 8.0


def test_order_parameter():
    assert order_parameter(4.0) == 0.0
    assert order_parameter(8.0) == 0.0
    d2 = order_parameter(9.0)
    assert d2 == pytest.approx(0.8626, rel=5e-3)
    assert abs(d2 - 0.8) <= 0.15 * 0.8
    assert order_parameter(9.0, arch=ArchMask.DNN) == 0.0


def test_order_parameter_grows_linearly_near_transition():
    slope_near = order_parameter(8.01) / 0.01
    slope_far = order_parameter(8.1) / 0.1
    assert slope_near == pytest.approx(slope_far, rel=0.05)


def test_slaving_coefficients():
    rnn = diagonal_foc_solve(8.0)
    alpha, b3_over_d2 = slaving_coefficients(rnn)
    assert alpha == pytest.approx(0.25)
    assert b3_over_d2 == pytest.approx(0.25 / 4.0)
    dnn = diagonal_foc_solve(8.0, arch=ArchMask.DNN)
    assert slaving_coefficients(dnn) == (0.0, 0.0)


def test_landau_point_above_transition():
    point = landau_point(9.0)
    assert point.d == pytest.approx(math.sqrt(order_parameter(9.0)))
    alpha, _ = slaving_coefficients(point)
    assert point.b2 == pytest.approx(alpha * point.d)
    assert np.all(np.linalg.eigvalsh(point.matrix()) > 0)


def test_point_from_kernel():
    data = [[1.0, 0.1, 0.2], [0.1, 2.0, 0.3], [0.2, 0.3, 3.0]]
    point = LandauPoint.from_kernel(hidden_kernel(4, data), 5.0, ArchMask.RNN)
    assert (point.b2, point.b3, point.d) == (0.1, 0.2, 0.3)
    assert_allclose(point.matrix(), data)
    with pytest.raises(InvalidShape):
        LandauPoint.from_kernel(hidden_kernel(5, np.eye(4)), 5.0,
                                ArchMask.RNN)


def test_critical_diagonals_for_random_scales(rng):
    for u, w, v in rng.uniform(0.5, 2.0, size=(5, 3)):
        point = diagonal_foc_solve(8.0, u, w, v)
        assert_allclose((point.a, point.c, point.e),
                        (2 * u, 4 * u * w, 8 * u * w * w), rtol=1e-8)
