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

from KernelMFT.LinearMFT import LinearObjective
from KernelMFT.NNGP import nngp_kernel
from KernelMFT.Perturbation import delta1, delta2, expansion_error, \
    perturbative_kernel, propagators
from KernelMFT.Structures.Activation import Activation
from KernelMFT.Structures.ArchMask import ArchMask
from KernelMFT.Structures.HyperParams import HyperParams
from KernelMFT.Tasks import teacher_rotation_task


def prior_setup(mask, supervised=(2, 3), T=4):
    task = teacher_rotation_task(T, 0.5, 0.0, supervised)
    hyper = HyperParams()
    H0, _ = nngp_kernel(task, hyper, Activation("linear"), mask)
    obj = LinearObjective.from_task(task, hyper, mask)
    return task, hyper, H0, obj


def test_propagators_invert_prior():
    _, hyper, H0, obj = prior_setup(ArchMask.RNN)
    G = propagators(H0, obj.X, hyper)
    assert G.identity_error(H0) <= 1e-10
    # unsupervised hidden time 3 drops out of the label propagator
    assert G.G_y.entry(3, 3) == 0.0
    assert G.G_y.entry(1, 1) == pytest.approx(1.0 / H0.entry(1, 1))


@pytest.mark.parametrize("mask", list(ArchMask), ids=str)
def test_delta1_vanishes_without_labels(mask):
    _, hyper, H0, obj = prior_setup(mask)
    Y = obj.Y.with_data(np.zeros_like(obj.Y.data))
    assert_allclose(delta1(H0, Y, hyper, mask, obj.X).data, 0.0, atol=1e-14)


@pytest.mark.parametrize("mask", list(ArchMask), ids=str)
def test_delta1_is_linear_in_labels(mask):
    _, hyper, H0, obj = prior_setup(mask)
    D1 = delta1(H0, obj.Y, hyper, mask, obj.X)
    D1_scaled = delta1(H0, obj.Y.with_data(2.5 * obj.Y.data), hyper, mask,
                       obj.X)
    assert_allclose(D1_scaled.data, 2.5 * D1.data, atol=1e-12)
    assert np.max(np.abs(D1.data)) > 1e-6


def test_delta2_reaches_unsupervised_times_only_through_recurrence():
    values = {}
    for mask in ArchMask:
        _, hyper, H0, obj = prior_setup(mask)
        D1 = delta1(H0, obj.Y, hyper, mask, obj.X)
        D2 = delta2(H0, D1, hyper, mask, obj.Y, obj.X)
        values[mask] = D2.entry(3, 1)
    assert abs(values[ArchMask.DNN]) <= 1e-12
    assert abs(values[ArchMask.RNN]) > 1e-8


def test_perturbative_kernel_sums_orders():
    _, hyper, H0, obj = prior_setup(ArchMask.RNN)
    D1 = delta1(H0, obj.Y, hyper, ArchMask.RNN, obj.X)
    D2 = delta2(H0, D1, hyper, ArchMask.RNN, obj.Y, obj.X)
    H = perturbative_kernel(H0, obj.Y, hyper, ArchMask.RNN, obj.X)
    assert_allclose(H.data, H0.data + D1.data + D2.data)


@pytest.mark.slow
@pytest.mark.parametrize("mask", list(ArchMask), ids=str)
def test_expansion_error_is_third_order(mask):
    task, hyper, _, _ = prior_setup(mask)
    rows = expansion_error(task, hyper, mask, (0.2, 0.1, 0.05))
    assert [r["scale"] for r in rows] == [0.2, 0.1, 0.05]
    assert rows[0]["ratio"] is None
    assert 6.0 <= rows[-1]["ratio"] <= 10.0
    for row in rows:
        assert row["err_order2"] < row["err_order1"]
