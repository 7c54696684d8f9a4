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

from KernelMFT.Exceptions import InvalidParameter, InvalidShape, \
    LineSearchFailure, MaxIterations
from KernelMFT.Inference import sequence_predictor
from KernelMFT.Landau import diagonal_foc_solve, slaving_coefficients
from KernelMFT.LinearMFT import LinearObjective, closed_form_residual, \
    curvature_check, grad_neg_log_p, memory_schedule, neg_log_p, \
    partial_supervision_projector, solve_map, symmetry_broken
from KernelMFT.NNGP import nngp_kernel
from KernelMFT.Structures.Activation import Activation
from KernelMFT.Structures.ArchMask import ArchMask
from KernelMFT.Structures.HyperParams import HyperParams
from KernelMFT.Structures.Kernel import Kernel
from KernelMFT.Structures.Reports import SolverOptions
from KernelMFT.Structures.TimeGrid import TimeGrid
from KernelMFT.Tasks import endpoint_classification, endpoint_scalar_task, \
    input_kernel, label_kernel, spread_supervision, teacher_rotation_task

from conftest import hidden_kernel, random_pd


def endpoint_objective(lam: float, mask: ArchMask = ArchMask.RNN):
    task = endpoint_scalar_task(4, math.sqrt(lam))
    return task, LinearObjective.from_task(task, HyperParams(), mask)


def prior(task, mask=ArchMask.RNN):
    return nngp_kernel(task, HyperParams(), Activation("linear"), mask)[0]


def test_value_at_prior_without_labels(endpoint4, hyper):
    obj = LinearObjective.from_task(endpoint4, hyper, ArchMask.RNN)
    obj = obj.with_label_scale(0.0)
    H0 = prior(endpoint4)
    assert neg_log_p(H0, obj) == pytest.approx(0.5 * obj.n)
    assert_allclose(grad_neg_log_p(H0, obj).data, 0.0, atol=1e-12)


def test_label_term(endpoint4, hyper):
    obj = LinearObjective.from_task(endpoint4, hyper, ArchMask.RNN)
    H = np.diag([2.0, 4.0, 8.0])
    label_term = obj.value(H) - obj.with_label_scale(0.0).value(H)
    assert label_term == pytest.approx(0.5, rel=1e-9)


@pytest.mark.parametrize("mask", list(ArchMask), ids=str)
def test_gradient_matches_finite_differences(mask, rng):
    task = endpoint_classification(2, 2, T=4)
    obj = LinearObjective.from_task(task, HyperParams(u=1.2, w=0.9, v=1.1,
                                                      kappa=0.1), mask)
    H = random_pd(rng, obj.n)
    G = obj.gradient(H)
    for _ in range(3):
        E = rng.standard_normal((obj.n, obj.n))
        E = 0.5 * (E + E.T)
        eps = 1e-6
        numeric = (obj.value(H + eps * E) - obj.value(H - eps * E)) / (2 * eps)
        analytic = float(np.sum(G * E))
        assert abs(numeric - analytic) <= 1e-5 * max(abs(analytic), 1.0)


def test_hvp_matches_finite_differences(rng):
    task, obj = endpoint_objective(6.0)
    H = random_pd(rng, obj.n)
    E = rng.standard_normal((obj.n, obj.n))
    E = 0.5 * (E + E.T)
    eps = 1e-6
    numeric = (obj.gradient(H + eps * E) - obj.gradient(H - eps * E)) \
        / (2 * eps)
    assert_allclose(obj.hvp(H, E), numeric, atol=1e-6)


def test_objective_rejects_mismatched_kernels():
    task = endpoint_scalar_task(4, 1.0)
    other = endpoint_scalar_task(5, 1.0)
    with pytest.raises(InvalidShape):
        LinearObjective(label_kernel(task), input_kernel(other),
                        HyperParams(), ArchMask.RNN, task.grid)


def test_partial_supervision_projector_identity():
    grid = TimeGrid(4, supervised=[2, 4])
    A = Kernel(grid, 1, np.eye(3), "output")
    assert_allclose(partial_supervision_projector(grid, A).data,
                    np.diag([1.0, 0.0, 1.0]))


def test_partial_supervision_projector_is_large_ridge_limit(rng):
    grid = TimeGrid(5, supervised=[2, 5])
    A = Kernel(grid, 2, random_pd(rng, 8), "output")
    U = np.zeros((8, 4))
    for i, t in enumerate(grid.unsupervised):
        for p in range(2):
            U[A.index(t, p), 2 * i + p] = 1.0
    explicit = np.linalg.inv(A.data + 1e8 * U @ U.T)
    assert_allclose(partial_supervision_projector(grid, A).data, explicit,
                    atol=1e-6)


def test_symmetry_broken_band():
    H = symmetry_broken(hidden_kernel(4, np.eye(3)), 0.1)
    assert H.entry(2, 1) == pytest.approx(0.1)
    assert H.entry(3, 2) == pytest.approx(0.1)
    assert H.entry(3, 1) == 0.0


@pytest.mark.parametrize("lam", [4.0, 6.0, 7.5])
@pytest.mark.parametrize("mask", list(ArchMask), ids=str)
def test_solve_below_transition_stays_diagonal(mask, lam):
    task, obj = endpoint_objective(lam, mask)
    report = solve_map(obj, symmetry_broken(prior(task, mask), 1e-3))
    assert report.converged
    assert abs(report.H_star.entry(3, 2)) <= 1e-6
    assert closed_form_residual(report.H_star, obj) <= 1e-6
    point = diagonal_foc_solve(lam)
    assert_allclose(np.diag(report.H_star.data), [point.a, point.c, point.e],
                    rtol=1e-6)


def test_solve_below_transition_rnn_equals_dnn():
    task, rnn = endpoint_objective(4.0, ArchMask.RNN)
    _, dnn = endpoint_objective(4.0, ArchMask.DNN)
    H_rnn = solve_map(rnn, symmetry_broken(prior(task), 1e-3)).H_star
    H_dnn = solve_map(dnn, symmetry_broken(prior(task), 1e-3)).H_star
    assert_allclose(H_rnn.data, H_dnn.data, atol=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("lam", [8.5, 9.0])
def test_solve_above_transition_breaks_symmetry_for_rnn_only(lam):
    task, rnn = endpoint_objective(lam, ArchMask.RNN)
    report = solve_map(rnn, symmetry_broken(prior(task), 1e-3))
    d2 = report.H_star.entry(3, 2) ** 2
    assert d2 == pytest.approx(0.8 * (lam - 8.0), rel=0.15)
    assert report.H_star.entry(3, 2) > 0

    _, dnn = endpoint_objective(lam, ArchMask.DNN)
    H_dnn = solve_map(dnn, symmetry_broken(prior(task), 1e-3)).H_star
    off = H_dnn.data - np.diag(np.diag(H_dnn.data))
    assert np.max(np.abs(off)) <= 1e-6


@pytest.mark.slow
def test_solve_keeps_sign_of_initial_band():
    task, rnn = endpoint_objective(9.0, ArchMask.RNN)
    report = solve_map(rnn, symmetry_broken(prior(task), -1e-3))
    assert report.H_star.entry(3, 2) < 0


def test_symmetric_point_is_unstable_above_transition():
    _, obj = endpoint_objective(9.0)
    H = diagonal_foc_solve(9.0).matrix()
    curvature, _ = curvature_check(obj, H)
    assert curvature < 0


def test_budget_exhaustion_attaches_report():
    task, obj = endpoint_objective(8.0)
    with pytest.raises((MaxIterations, LineSearchFailure)) as info:
        solve_map(obj, symmetry_broken(prior(task), 1e-3),
                  SolverOptions(max_iter=1))
    assert info.value.report is not None
    assert not info.value.report.converged


@pytest.mark.slow
def test_order_parameter_has_square_root_onset():
    lams = np.array([8.05, 8.1, 8.2, 8.3, 8.5])
    d = []
    for lam in lams:
        task, rnn = endpoint_objective(lam)
        report = solve_map(rnn, symmetry_broken(prior(task), 1e-3))
        assert report.converged
        d.append(abs(report.H_star.entry(3, 2)))
    slope, _ = np.polyfit(np.log(lams - 8.0), np.log(d), 1)
    assert slope == pytest.approx(0.5, abs=0.05)


def test_dnn_stays_diagonal_at_any_signal_strength():
    for lam in np.linspace(0.0, 100.0, 20):
        task, dnn = endpoint_objective(lam, ArchMask.DNN)
        H = solve_map(dnn, symmetry_broken(prior(task, ArchMask.DNN),
                                           1e-3)).H_star
        off = H.data - np.diag(np.diag(H.data))
        assert np.max(np.abs(off)) <= 1e-6, f"lambda={lam}"


@pytest.mark.slow
def test_first_band_is_slaved_to_order_parameter():
    lam = 8.1
    task, rnn = endpoint_objective(lam)
    H = solve_map(rnn, symmetry_broken(prior(task), 1e-3)).H_star
    alpha, _ = slaving_coefficients(diagonal_foc_solve(lam))
    assert H.entry(3, 2) > 0
    assert H.entry(2, 1) / H.entry(3, 2) == pytest.approx(alpha, rel=0.1)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_rnn_generalizes_to_unsupervised_times_better_than_dnn(k):
    T = 6
    task = teacher_rotation_task(T, 0.5, 0.0, spread_supervision(T, k))
    hyper = HyperParams()
    assert task.grid.unsupervised
    results = {}
    for mask in ArchMask:
        obj = LinearObjective.from_task(task, hyper, mask)
        H = solve_map(obj, symmetry_broken(prior(task, mask), 1e-3)).H_star
        results[mask] = sequence_predictor(H, task, hyper)
    dnn = results[ArchMask.DNN]
    unsup = [t - 2 for t in task.grid.unsupervised]
    assert np.max(np.abs(dnn.f[unsup])) <= 1e-8
    assert dnn.unsupervised_loss == pytest.approx(
        0.5 * np.mean(task.y[unsup] ** 2), abs=1e-8)
    assert results[ArchMask.RNN].loss < dnn.loss


def test_memory_gradient_matches_finite_differences(rng):
    _, obj = endpoint_objective(9.0)
    obj = obj.with_memory(0.3)
    H = random_pd(rng, obj.n)
    G = obj.gradient(H)
    for _ in range(3):
        E = rng.standard_normal((obj.n, obj.n))
        E = 0.5 * (E + E.T)
        eps = 1e-6
        numeric = (obj.value(H + eps * E) - obj.value(H - eps * E)) / (2 * eps)
        assert numeric == pytest.approx(float(np.sum(G * E)), rel=1e-5,
                                        abs=1e-5)


def test_memory_penalizes_alternating_band():
    _, obj = endpoint_objective(9.0)
    coherent = diagonal_foc_solve(9.0).matrix()
    coherent[1, 2] = coherent[2, 1] = 0.5
    alternating = coherent.copy()
    alternating[1, 2] = alternating[2, 1] = -0.5
    plain = obj.value(coherent) - obj.value(alternating)
    assert plain == pytest.approx(0.0, abs=1e-12)
    damped = obj.with_memory(0.2)
    assert damped.value(coherent) < damped.value(alternating)


def test_memory_outside_unit_interval_is_rejected():
    _, obj = endpoint_objective(4.0)
    with pytest.raises(InvalidParameter):
        obj.with_memory(1.0)


def test_memory_schedule_halves():
    assert memory_schedule(SolverOptions()) == []
    assert memory_schedule(SolverOptions(memory_alpha=0.4,
                                         memory_steps=3)) == [0.4, 0.2, 0.1]


@pytest.mark.slow
def test_annealed_memory_selects_coherent_branch():
    task, rnn = endpoint_objective(9.0)
    plain = solve_map(rnn, symmetry_broken(prior(task), 1e-3)).H_star
    report = solve_map(rnn, symmetry_broken(prior(task), -1e-3),
                       SolverOptions(memory_alpha=0.2))
    assert report.converged
    assert report.H_star.entry(3, 2) > 0
    assert_allclose(report.H_star.data, plain.data, atol=1e-6)
