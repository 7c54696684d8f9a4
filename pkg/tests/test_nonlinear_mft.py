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

from KernelMFT.Exceptions import DegenerateTilt, InvalidParameter, \
    NonDecreasingResidual
from KernelMFT.LinearMFT import LinearObjective, solve_map, symmetry_broken
from KernelMFT.NNGP import nngp_kernel
from KernelMFT.NonlinearMFT import SaddleProblem, extragradient_step, \
    initial_state, saddle_gradients, single_site_moments, solve_saddle
from KernelMFT.Structures.Activation import Activation
from KernelMFT.Structures.ArchMask import ArchMask
from KernelMFT.Structures.HyperParams import HyperParams
from KernelMFT.Structures.Saddle import MomentEstimate, SaddleOptions, \
    SaddleState, SamplerConfig
from KernelMFT.Tasks import endpoint_scalar_task, sinusoid_task

LINEAR = Activation("linear")


def sinusoid_problem(act=LINEAR, mask=ArchMask.RNN):
    return SaddleProblem(sinusoid_task(4), HyperParams(u=1.0, w=0.8), act,
                         mask)


def test_untilted_moments_reproduce_base_covariance():
    problem = sinusoid_problem()
    state = initial_state(problem)
    sampler = SamplerConfig(method="importance", n_samples=40000, seed=3)
    moments = single_site_moments(state, problem, sampler)
    Sigma = problem.sigma(state.C.data)
    H_eql, C_eql = moments
    assert np.all(np.abs(H_eql.data - Sigma) <= 4 * moments.H_se + 1e-12)
    assert_allclose(C_eql.data, H_eql.data)
    assert moments.method == "importance"


def test_analytic_moments_of_linear_activation(rng):
    problem = sinusoid_problem()
    state = initial_state(problem)
    C_tilde = 0.05 * np.eye(problem.n) + 0.01
    state = SaddleState(state.C, C_tilde)
    moments = single_site_moments(state, problem,
                                  SamplerConfig(method="analytic"))
    Sigma = problem.sigma(state.C.data)
    expected = np.linalg.inv(np.linalg.inv(Sigma) - 2 * state.C_tilde)
    assert_allclose(moments.H.data, expected, atol=1e-10)
    assert moments.max_se == 0.0


def test_importance_sampling_matches_analytic_tilt():
    problem = sinusoid_problem()
    state = SaddleState(initial_state(problem).C,
                        0.05 * np.eye(problem.n))
    exact = single_site_moments(state, problem,
                                SamplerConfig(method="analytic"))
    sampled = single_site_moments(state, problem, SamplerConfig(
        method="importance", n_samples=80000, seed=11))
    assert np.all(np.abs(sampled.H.data - exact.H.data)
                  <= 4 * sampled.H_se + 1e-3)


def test_analytic_moments_reject_nonlinear_activation():
    problem = sinusoid_problem(Activation("erf"))
    with pytest.raises(InvalidParameter):
        single_site_moments(initial_state(problem), problem,
                            SamplerConfig(method="analytic"))


def test_overly_strong_tilt_is_degenerate():
    problem = sinusoid_problem()
    state = initial_state(problem)
    Sigma = problem.sigma(state.C.data)
    state = SaddleState(state.C, np.linalg.inv(Sigma))
    with pytest.raises(DegenerateTilt):
        single_site_moments(state, problem, SamplerConfig(method="analytic"))


def test_dual_gradient_is_primal_mismatch():
    problem = sinusoid_problem()
    state = SaddleState(initial_state(problem).C, 0.02 * np.eye(problem.n))
    gC, gCt = saddle_gradients(state, problem,
                               SamplerConfig(method="analytic"))
    assert_allclose(gCt, state.C.data - state.C_eql.data)
    assert gC.shape == gCt.shape


def test_initial_state_is_broken_prior():
    problem = sinusoid_problem()
    state = initial_state(problem, eps=1e-2)
    _, C0 = nngp_kernel(problem.task, problem.hyper, LINEAR, problem.mask)
    assert state.C.entry(2, 1) == pytest.approx(C0.entry(2, 1) + 1e-2)
    assert_allclose(state.C_tilde, 0.0)


def test_extragradient_solves_bilinear_saddle():
    # min_x max_y x y, plain gradient descent-ascent spirals outwards
    def gradients(x, y):
        return y, x

    x, y = np.array([1.0]), np.array([1.0])
    for _ in range(3000):
        x, y = extragradient_step(gradients, x, y, 0.1)
    assert abs(x[0]) < 1e-4 and abs(y[0]) < 1e-4

    x, y = np.array([1.0]), np.array([1.0])
    for _ in range(100):
        gx, gy = gradients(x, y)
        x, y = x - 0.1 * gx, y + 0.1 * gy
    assert math.hypot(x[0], y[0]) > math.sqrt(2)


def test_extragradient_applies_projection():
    def gradients(x, y):
        return np.ones_like(x), np.zeros_like(y)

    x, _ = extragradient_step(gradients, np.array([0.05]), np.array([0.0]),
                              1.0, project=lambda a: np.maximum(a, 0.0))
    assert x[0] == 0.0


@pytest.mark.slow
def test_linear_saddle_agrees_with_map_kernel():
    task = endpoint_scalar_task(4, 2.0)
    hyper = HyperParams()
    problem = SaddleProblem(task, hyper, LINEAR, ArchMask.RNN)
    state = solve_saddle(problem, initial_state(problem),
                         SaddleOptions(tol=1e-6, max_iter=20000,
                                       stall_window=500),
                         SamplerConfig(method="analytic"))
    assert state.converged

    H0, _ = nngp_kernel(task, hyper, LINEAR, ArchMask.RNN)
    obj = LinearObjective.from_task(task, hyper, ArchMask.RNN)
    H_star = solve_map(obj, symmetry_broken(H0, 1e-3)).H_star
    assert_allclose(state.H_eql.data, H_star.data, atol=1e-3)


def test_flat_noisy_residual_stalls(monkeypatch):
    problem = sinusoid_problem()
    noise = np.random.default_rng(7)
    calls = []

    def fake_evaluate(problem, C, C_tilde, sampler):
        # never below the first residual, never a 50% jump
        residual = 1.0 if not calls else 1.0 + 0.3 * noise.random()
        calls.append(residual)
        K = problem.kernel(C)
        zeros = np.zeros_like(C)
        moments = MomentEstimate(K, K, zeros, zeros, "analytic", math.inf)
        return zeros, residual * np.ones_like(C), moments

    monkeypatch.setattr("KernelMFT.NonlinearMFT._evaluate", fake_evaluate)
    opts = SaddleOptions(stall_window=50, max_iter=2000)
    with pytest.raises(NonDecreasingResidual) as info:
        solve_saddle(problem, initial_state(problem), opts,
                     SamplerConfig(method="analytic"))
    assert info.value.state is not None
    assert info.value.state.iteration <= opts.stall_window
    assert info.value.state.eta > opts.eta


@pytest.mark.parametrize("method, rel", [("importance", 5e-3),
                                         ("langevin", 3e-2)])
def test_unlabelled_erf_saddle_is_nngp_kernel(method, rel):
    task = endpoint_scalar_task(4, 0.0)
    hyper = HyperParams()
    erf = Activation("erf")
    problem = SaddleProblem(task, hyper, erf, ArchMask.RNN)
    state = solve_saddle(problem, initial_state(problem), SaddleOptions(),
                         SamplerConfig(method=method, n_samples=20000,
                                       seed=5))
    assert state.converged
    H0, _ = nngp_kernel(task, hyper, erf, ArchMask.RNN)
    gap = np.max(np.abs(state.H_eql.data - H0.data))
    assert gap <= 5 * state.standard_error + rel * np.max(np.abs(H0.data))


@pytest.mark.slow
def test_erf_off_diagonal_grows_with_signal_strength():
    hyper = HyperParams()
    erf = Activation("erf")
    d, se = [], []
    for lam in (2.0, 6.0, 12.0):
        task = endpoint_scalar_task(4, math.sqrt(lam))
        problem = SaddleProblem(task, hyper, erf, ArchMask.RNN)
        state = solve_saddle(problem, initial_state(problem),
                             SaddleOptions(max_iter=4000, stall_window=200),
                             SamplerConfig(method="auto", n_samples=20000,
                                           seed=11))
        assert state.converged, f"lambda={lam}"
        d.append(abs(state.H_eql.entry(3, 2)))
        se.append(state.standard_error)
    for i in range(len(d) - 1):
        assert d[i + 1] >= d[i] - 3 * (se[i] + se[i + 1])
    assert d[-1] > d[0]
