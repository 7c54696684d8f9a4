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


import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from KernelMFT.Exceptions import EmptySupervision, InvalidShape, \
    SingularKernel
from KernelMFT.KernelSpace import KernelSeries, apply_mask, pd_inverse, \
    pd_logdet, psd_clip, restrict_supervised, shift_minus, shift_plus
from KernelMFT.Structures.ArchMask import ArchMask
from KernelMFT.Structures.Kernel import Kernel
from KernelMFT.Structures.TimeGrid import TimeGrid

from conftest import random_pd


def test_grid_ranges():
    grid = TimeGrid(5)
    assert list(grid.input_times) == [0, 1, 2, 3]
    assert list(grid.hidden_times) == [1, 2, 3, 4]
    assert list(grid.output_times) == [2, 3, 4, 5]
    assert grid.T_minus == 4
    assert grid.supervised == (2, 3, 4, 5)
    assert grid.unsupervised == ()


def test_grid_rejects_supervised_outside_outputs():
    with pytest.raises(InvalidShape):
        TimeGrid(4, supervised=[1])


def test_kernel_is_symmetrized_and_read_only():
    K = Kernel(TimeGrid(3), 1, [[1.0, 2.0], [0.0, 1.0]])
    assert_allclose(K.data, [[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        K.data[0, 0] = 5.0


def test_kernel_index_time_major():
    K = Kernel(TimeGrid(4), 2, np.arange(36.0).reshape(6, 6))
    assert K.index(1, 0) == 0
    assert K.index(2, 1) == 3
    assert K.unflatten(5) == (3, 1)
    with pytest.raises(InvalidShape):
        K.index(4, 0)


def test_kernel_rejects_wrong_shape():
    with pytest.raises(InvalidShape):
        Kernel(TimeGrid(4), 1, np.eye(2))


def test_shift_minus_of_single_time_is_zero():
    grid = TimeGrid(3, supervised=[2])
    K = Kernel(grid, 1, [[3.0]], "output", times=[2])
    assert_array_equal(shift_minus(K).data, [[0.0]])


def test_shift_minus_moves_diagonal():
    K = Kernel(TimeGrid(4), 1, np.diag([1.0, 2.0, 3.0]))
    assert_allclose(shift_minus(K).data, np.diag([0.0, 1.0, 2.0]))


def test_shift_plus_moves_diagonal_back():
    K = Kernel(TimeGrid(4), 1, np.diag([1.0, 2.0, 3.0]))
    assert_allclose(shift_plus(K).data, np.diag([2.0, 3.0, 0.0]))


def test_shift_minus_with_patterns(rng):
    data = random_pd(rng, 6)
    K = Kernel(TimeGrid(4), 2, data)
    shifted = shift_minus(K)
    assert_allclose(shifted.block(2, 3), K.block(1, 2))
    assert_allclose(shifted.block(1, 1), np.zeros((2, 2)))


def test_dnn_mask_drops_time_off_diagonal():
    K = Kernel(TimeGrid(3), 1, [[1.0, 0.5], [0.5, 2.0]])
    assert_allclose(apply_mask(ArchMask.DNN, K).data, [[1.0, 0.0],
                                                       [0.0, 2.0]])
    assert_allclose(apply_mask(ArchMask.RNN, K).data, K.data)


def test_dnn_mask_keeps_pattern_blocks(rng):
    K = Kernel(TimeGrid(3), 2, random_pd(rng, 4))
    masked = apply_mask(ArchMask.DNN, K)
    assert_allclose(masked.block(1, 1), K.block(1, 1))
    assert_allclose(masked.block(2, 1), np.zeros((2, 2)))


def test_mask_from_name():
    assert ArchMask.from_name("rnn") is ArchMask.RNN
    assert ArchMask.from_name("DNN") is ArchMask.DNN


def test_restrict_supervised_output_times():
    grid = TimeGrid(4, supervised=[2, 4])
    K = Kernel(grid, 1, np.diag([1.0, 2.0, 3.0]), "output")
    restricted = restrict_supervised(K, grid)
    assert_allclose(restricted.data, np.diag([1.0, 3.0]))
    assert restricted.times == (2, 4)


def test_restrict_supervised_hidden_times_align_with_outputs():
    grid = TimeGrid(4, supervised=[3])
    K = Kernel(grid, 1, np.diag([1.0, 2.0, 3.0]), "hidden")
    assert_allclose(restrict_supervised(K, grid).data, [[2.0]])


def test_restrict_supervised_empty():
    grid = TimeGrid(4, supervised=[])
    K = Kernel(grid, 1, np.eye(3), "output")
    with pytest.raises(EmptySupervision):
        restrict_supervised(K, grid)


def test_psd_clip_floors_negative_eigenvalues():
    assert_allclose(psd_clip(np.diag([1.0, -0.1]), 1e-9),
                    np.diag([1.0, 1e-9]), atol=1e-15)


def test_psd_clip_leaves_pd_matrix(rng):
    A = random_pd(rng, 4)
    assert_allclose(psd_clip(A, 1e-9), A)


def test_pd_inverse_and_logdet(rng):
    A = random_pd(rng, 5)
    assert_allclose(pd_inverse(A) @ A, np.eye(5), atol=1e-10)
    assert pd_logdet(A) == pytest.approx(np.linalg.slogdet(A)[1])


def test_pd_inverse_rejects_indefinite():
    with pytest.raises(SingularKernel):
        pd_inverse(np.diag([1.0, -1.0]))


def test_pd_logdet_floor():
    with pytest.raises(SingularKernel):
        pd_logdet(np.eye(2) * 1e-200, floor=1e-300)


def test_kernel_series_inverse_derivative(rng):
    A = random_pd(rng, 3)
    E = rng.standard_normal((3, 3))
    E = E + E.T
    series = KernelSeries([A, E]).inv()
    A_inv = np.linalg.inv(A)
    assert_allclose(series[0], A_inv, atol=1e-10)
    assert_allclose(series[1], -A_inv @ E @ A_inv, atol=1e-10)


def test_kernel_series_product_orders(rng):
    A, B = rng.standard_normal((2, 3, 3))
    C, D = rng.standard_normal((2, 3, 3))
    product = KernelSeries([A, B]) @ KernelSeries([C, D])
    assert_allclose(product[0], A @ C)
    assert_allclose(product[1], A @ D + B @ C)
