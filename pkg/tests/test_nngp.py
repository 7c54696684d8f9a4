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

from KernelMFT.Exceptions import DivergentPrior, InvalidParameter
from KernelMFT.NNGP import nngp_kernel, nngp_residual
from KernelMFT.Structures.Activation import Activation
from KernelMFT.Structures.ArchMask import ArchMask
from KernelMFT.Structures.HyperParams import HyperParams
from KernelMFT.Tasks import endpoint_classification, endpoint_scalar_task, \
    sinusoid_task

LINEAR = Activation("linear")
ERF = Activation("erf")


def test_linear_prior_of_endpoint_input_is_identity():
    task = endpoint_classification(2, 2, T=4)
    H0, C0 = nngp_kernel(task, HyperParams(), LINEAR, ArchMask.RNN)
    assert_allclose(H0.data, np.eye(6), atol=1e-14)
    assert_allclose(C0.data, H0.data)


def test_linear_prior_scales_with_input_weight():
    task = endpoint_scalar_task(5, 1.0)
    H0, _ = nngp_kernel(task, HyperParams(u=2.0), LINEAR, ArchMask.RNN)
    assert_allclose(H0.data, 2.0 * np.eye(4), atol=1e-14)


def test_linear_prior_grows_geometrically_with_recurrent_weight():
    task = endpoint_scalar_task(5, 1.0)
    H0, _ = nngp_kernel(task, HyperParams(w=2.0), LINEAR, ArchMask.RNN)
    assert_allclose(np.diag(H0.data), [1.0, 2.0, 4.0, 8.0])


@pytest.mark.parametrize("act", [LINEAR, ERF], ids=str)
@pytest.mark.parametrize("mask", list(ArchMask), ids=str)
def test_prior_is_a_fixed_point(act, mask):
    task = sinusoid_task(7)
    hyper = HyperParams(u=1.3, w=0.8)
    H0, C0 = nngp_kernel(task, hyper, act, mask)
    assert nngp_residual(H0, C0, task, hyper, mask) <= 1e-12
    assert H0.is_psd() and C0.is_psd()


def test_mask_does_not_change_prior_of_single_impulse():
    task = sinusoid_task(8)
    for act in (LINEAR, ERF):
        rnn, _ = nngp_kernel(task, HyperParams(), act, ArchMask.RNN)
        dnn, _ = nngp_kernel(task, HyperParams(), act, ArchMask.DNN)
        assert_allclose(rnn.data, dnn.data, atol=1e-14)


def test_erf_moment_matches_monte_carlo(rng):
    task = sinusoid_task(4)
    H0, C0 = nngp_kernel(task, HyperParams(u=1.5, w=1.2), ERF, ArchMask.RNN)
    n_samples = 200000
    h = rng.multivariate_normal(np.zeros(H0.dim), H0.data, size=n_samples)
    phi = ERF(h)
    outer = np.einsum("si,sj->sij", phi, phi)
    mean = outer.mean(axis=0)
    se = outer.std(axis=0, ddof=1) / np.sqrt(n_samples)
    assert np.all(np.abs(mean - C0.data) <= 4 * se + 1e-12)


def test_erf_closed_form_matches_quadrature():
    cov = np.array([[1.0, 0.4, 0.1], [0.4, 2.0, -0.3], [0.1, -0.3, 0.5]])
    assert_allclose(ERF.gaussian_moment(cov),
                    ERF.gaussian_moment_quadrature(cov), atol=1e-8)


def test_erf_has_unit_slope_at_origin():
    assert ERF.derivative(0.0) == pytest.approx(1.0)
    assert ERF(1e-6) == pytest.approx(1e-6, rel=1e-6)


def test_divergent_prior():
    task = endpoint_scalar_task(12, 1.0)
    with pytest.raises(DivergentPrior):
        nngp_kernel(task, HyperParams(w=100.0), LINEAR, ArchMask.RNN,
                    overflow_bound=1e12)


def test_unknown_activation():
    with pytest.raises(InvalidParameter):
        Activation("relu")
