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
from numpy.testing import assert_allclose

from KernelMFT.Exceptions import DegenerateInput, InvalidShape, \
    SingularKernel
from KernelMFT.Inference import autocorrelation, cka, endpoint_predictor, \
    sequence_predictor
from KernelMFT.Structures.HyperParams import HyperParams
from KernelMFT.Tasks import teacher_kernel, teacher_rotation_task

from conftest import hidden_kernel, random_pd


def test_endpoint_predictor_shrinks_towards_zero():
    H = hidden_kernel(4, np.diag([1.0, 2.0, 8.0]))
    f = endpoint_predictor(H, [1.0], HyperParams(kappa=2.0))
    assert f[0] == pytest.approx(0.8)


def test_endpoint_predictor_interpolates_without_regularizer():
    H = hidden_kernel(4, np.diag([1.0, 2.0, 8.0]))
    assert endpoint_predictor(H, [1.0], HyperParams())[0] == \
        pytest.approx(1.0)


def test_endpoint_predictor_singular_block():
    H = hidden_kernel(3, np.zeros((4, 4)), P=2)
    with pytest.raises(SingularKernel):
        endpoint_predictor(H, [1.0, -1.0], HyperParams())


def test_endpoint_predictor_label_shape():
    H = hidden_kernel(3, np.eye(4), P=2)
    with pytest.raises(InvalidShape):
        endpoint_predictor(H, [1.0], HyperParams())


def test_time_diagonal_kernel_cannot_generalize():
    task = teacher_rotation_task(5, 0.5, 0.3, [2, 4])
    H = hidden_kernel(5, np.diag([1.0, 2.0, 3.0, 4.0]), supervised=[2, 4])
    result = sequence_predictor(H, task, HyperParams())
    for t in task.grid.unsupervised:
        assert result.f[t - 2, 0] == 0.0
    for t in task.supervised:
        assert result.f[t - 2, 0] == pytest.approx(task.label(t)[0])
    assert result.loss_on(task.supervised) == pytest.approx(0.0, abs=1e-20)


def test_teacher_kernel_generalizes_perfectly():
    task = teacher_rotation_task(6, 0.4, 0.2, [2, 3])
    result = sequence_predictor(teacher_kernel(task), task, HyperParams())
    assert_allclose(result.f, task.y, atol=1e-8)
    assert result.unsupervised_loss == pytest.approx(0.0, abs=1e-15)


def test_predictor_rows():
    task = teacher_rotation_task(4, 0.4, 0.2, [4])
    H = hidden_kernel(4, np.eye(3), supervised=[4])
    rows = sequence_predictor(H, task, HyperParams()).rows()
    assert [r["time"] for r in rows] == [2, 3, 4]
    assert [r["supervised"] for r in rows] == [False, False, True]


@pytest.mark.parametrize("centering", ["mean", "double"])
def test_cka_is_invariant_to_scale_and_offset(centering, rng):
    A = random_pd(rng, 5)
    assert cka(A, A, centering) == pytest.approx(1.0)
    assert cka(A, 3 * A + 5, centering) == pytest.approx(1.0)


def test_cka_of_kernels(rng):
    A = hidden_kernel(4, random_pd(rng, 3))
    B = hidden_kernel(4, random_pd(rng, 3))
    value = cka(A, B)
    assert -1.0 <= value <= 1.0
    assert value == pytest.approx(cka(B, A))


def test_cka_rejects_constant_matrix(rng):
    with pytest.raises(DegenerateInput):
        cka(np.ones((3, 3)), random_pd(rng, 3))


def test_cka_rejects_shape_mismatch():
    with pytest.raises(InvalidShape):
        cka(np.eye(3), np.eye(4))


def test_autocorrelation_of_banded_kernel():
    b = 0.3
    data = np.eye(5) + b * (np.eye(5, k=1) + np.eye(5, k=-1))
    lags = autocorrelation(hidden_kernel(6, data))
    assert_allclose(lags, [1.0, b, 0.0, 0.0, 0.0])


def test_autocorrelation_of_time_diagonal_kernel():
    lags = autocorrelation(hidden_kernel(5, np.diag([1.0, 2.0, 3.0, 4.0])))
    assert lags[0] == pytest.approx(2.5)
    assert_allclose(lags[1:], 0.0)
