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
Saddle point of the kernel action for nonlinear activations.

The primal kernel C is descended and the conjugate kernel C_tilde ascended
with an extragradient scheme. Single-site moments are expectations under
the tilted Gaussian P(h) ~ N(h; 0, Sigma_h(C)) exp(phi(h)^T C_tilde phi(h)).
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .Exceptions import (DegenerateTilt, InvalidParameter, MaxIterations,
                         NonDecreasingResidual, NumericOverflow,
                         SingularKernel)
from .KernelSpace import pd_inverse, psd_clip, shift_matrix, \
    supervised_indices
from .LinearMFT import band_indices, symmetry_broken
from .NNGP import nngp_kernel, prior_forward
from .Persistence import save_saddle_checkpoint
from .Structures.Activation import Activation
from .Structures.ArchMask import ArchMask
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Saddle import (MomentEstimate, SaddleOptions, SaddleState,
                                SamplerConfig)
from .Structures.Task import Task
from .Tasks import input_kernel, label_kernel


class SaddleProblem:
    """
    Everything the saddle equations need from task, prior and architecture.
    """

    def __init__(self, task: Task, hyper: HyperParams, act: Activation,
                 mask: ArchMask, label_floor: float = 1e-12):
        self.task = task
        self.hyper = hyper
        self.act = act
        self.mask = mask
        self.grid = task.grid
        self.P = task.P
        self.X = input_kernel(task)
        self.Y = label_kernel(task)
        self.n = self.X.dim
        self.label_floor = label_floor
        self._S = shift_matrix(self.grid.T_minus, self.P)
        self._sup = (supervised_indices(self.Y, self.grid)
                     if self.grid.supervised else np.zeros(0, dtype=int))

    def kernel(self, data: np.ndarray) -> Kernel:
        return Kernel(self.grid, self.P, data, "hidden")

    def sigma(self, C: np.ndarray) -> np.ndarray:
        return prior_forward(C, self.X.data, self.hyper, self.mask, self.P)

    def dual_target(self, C: np.ndarray, H_eql: np.ndarray,
                    Sigma: np.ndarray) -> np.ndarray:
        """
        C_tilde_eql = 1/2 v A^-1 Y A^-1 + 1/2 w [Sigma^-1 (H - Sigma)
        Sigma^-1]^+ with A = v C + kappa on the supervised times.
        """
        Sigma_inv = pd_inverse(Sigma, "Sigma_h(C)")
        tilt = Sigma_inv @ (H_eql - Sigma) @ Sigma_inv
        target = 0.5 * self.hyper.w * (
            self._S.T @ self.mask.project(tilt, self.P) @ self._S)
        if len(self._sup):
            ix = np.ix_(self._sup, self._sup)
            ridge = (self.hyper.kappa if self.hyper.kappa > 0
                     else self.label_floor)
            A_inv = pd_inverse(self.hyper.v * C[ix]
                               + ridge * np.eye(len(self._sup)),
                               "label Gram")
            label = np.zeros_like(C)
            label[ix] = A_inv @ self.Y.data[ix] @ A_inv
            target = target + 0.5 * self.hyper.v * label
        return 0.5 * (target + target.T)

    def __str__(self):
        return (f"SaddleProblem: {self.task}, {self.act}, mask={self.mask}, "
                f"{self.hyper}")


def _weighted_moments(samples: np.ndarray, weights: np.ndarray) \
        -> Tuple[np.ndarray, np.ndarray]:
    """
    Self-normalized mean of the outer products and its delta-method
    standard error.
    """
    outer = np.einsum("si,sj->sij", samples, samples)
    mean = np.einsum("s,sij->ij", weights, outer)
    se = np.sqrt(np.einsum("s,sij->ij", weights ** 2, (outer - mean) ** 2))
    return 0.5 * (mean + mean.T), se


def _importance(Sigma: np.ndarray, C_tilde: np.ndarray, act: Activation,
                sampler: SamplerConfig):
    L = np.linalg.cholesky(Sigma)
    batches = np.random.SeedSequence(sampler.seed).spawn(sampler.n_batches)
    sizes = np.full(sampler.n_batches, sampler.n_samples // sampler.n_batches)
    sizes[:sampler.n_samples % sampler.n_batches] += 1

    h_parts = []
    for child, size in zip(batches, sizes):
        rng = np.random.default_rng(child)
        h_parts.append(rng.standard_normal((size, Sigma.shape[0])) @ L.T)
    h = np.concatenate(h_parts)
    phi = act(h)

    log_w = np.einsum("si,ij,sj->s", phi, C_tilde, phi)
    weights = np.exp(log_w - np.max(log_w))
    weights /= np.sum(weights)
    ess = 1.0 / float(np.sum(weights ** 2))
    if ess < sampler.min_ess_fraction * len(weights):
        raise DegenerateTilt(f"Importance weights degenerate: ESS={ess:.1f} "
                             f"of {len(weights)} samples!")

    H, H_se = _weighted_moments(h, weights)
    C, C_se = _weighted_moments(phi, weights)
    return H, C, H_se, C_se, ess


def _langevin(Sigma: np.ndarray, C_tilde: np.ndarray, act: Activation,
              sampler: SamplerConfig, bound: float = 1e6):
    L = np.linalg.cholesky(Sigma)
    rng = np.random.default_rng(np.random.SeedSequence(sampler.seed))
    n = Sigma.shape[0]
    chains = sampler.n_chains
    keep = int(math.ceil(sampler.n_samples / chains))
    step = sampler.step
    noise = math.sqrt(2 * step)

    h = rng.standard_normal((chains, n)) @ L.T
    sum_H = np.zeros((chains, n, n))
    sum_C = np.zeros((chains, n, n))
    for s in range(sampler.burn_in + keep):
        phi = act(h)
        force = 2 * act.derivative(h) * (phi @ C_tilde)
        # drift preconditioned by Sigma: -h + Sigma grad(phi^T C_tilde phi)
        h = (h + step * (force @ Sigma - h)
             + noise * rng.standard_normal((chains, n)) @ L.T)
        if not np.all(np.isfinite(h)) or np.max(np.abs(h)) > bound:
            raise NumericOverflow(f"Langevin chain left the bound {bound:.1e} "
                                  f"at step {s}!")
        if s >= sampler.burn_in:
            phi = act(h)
            sum_H += np.einsum("ci,cj->cij", h, h)
            sum_C += np.einsum("ci,cj->cij", phi, phi)

    chain_H = sum_H / keep
    chain_C = sum_C / keep
    H = chain_H.mean(axis=0)
    C = chain_C.mean(axis=0)
    H_se = chain_H.std(axis=0, ddof=1) / math.sqrt(chains)
    C_se = chain_C.std(axis=0, ddof=1) / math.sqrt(chains)
    return (0.5 * (H + H.T), 0.5 * (C + C.T), H_se, C_se,
            float(chains * keep))


def _analytic(Sigma: np.ndarray, C_tilde: np.ndarray, act: Activation):
    if not act.is_linear:
        raise InvalidParameter("Analytic moments need a linear activation!")
    precision = pd_inverse(Sigma, "Sigma_h(C)") - 2 * C_tilde
    try:
        H = pd_inverse(precision, "tilted precision")
    except SingularKernel:
        raise DegenerateTilt("Tilted precision is not positive definite!")
    zero = np.zeros_like(H)
    return H, np.array(H), zero, zero, float("inf")


def single_site_moments(state: SaddleState, problem: SaddleProblem,
                        sampler: SamplerConfig) -> MomentEstimate:
    """
    <h h^T> and <phi phi^T> under the measure tilted by C_tilde, with
    entrywise standard errors.
    :param state: current (C, C_tilde)
    :param problem: task, prior and architecture
    :param sampler: estimator settings
    :return: the estimate, unpacking to (H_eql, C_eql)

    :raises SingularKernel: base covariance not PD
    :raises DegenerateTilt: importance weights collapsed (method importance)
    """
    Sigma = problem.sigma(state.C.data)
    pd_inverse(Sigma, "Sigma_h(C)")
    method = sampler.method
    if method == "analytic":
        result = _analytic(Sigma, state.C_tilde, problem.act)
    elif method == "langevin":
        result = _langevin(Sigma, state.C_tilde, problem.act, sampler)
    elif method == "importance":
        result = _importance(Sigma, state.C_tilde, problem.act, sampler)
    else:
        try:
            result = _importance(Sigma, state.C_tilde, problem.act, sampler)
            method = "importance"
        except DegenerateTilt as e:
            logging.warning("%s Falling back to Langevin sampling.", e.msg)
            result = _langevin(Sigma, state.C_tilde, problem.act, sampler)
            method = "langevin"

    H, C, H_se, C_se, ess = result
    return MomentEstimate(problem.kernel(H), problem.kernel(C), H_se, C_se,
                          method, ess)


def _evaluate(problem: SaddleProblem, C: np.ndarray, C_tilde: np.ndarray,
              sampler: SamplerConfig):
    state = SaddleState(problem.kernel(C), C_tilde)
    moments = single_site_moments(state, problem, sampler)
    Sigma = problem.sigma(C)
    target = problem.dual_target(C, moments.H.data, Sigma)
    return C_tilde - target, C - moments.C.data, moments


def saddle_gradients(state: SaddleState, problem: SaddleProblem,
                     sampler: SamplerConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradients of the action: (C_tilde - C_tilde_eql, C - C_eql). The
    evaluated moments are stored on the state.
    """
    gC, gCt, moments = _evaluate(problem, state.C.data, state.C_tilde,
                                 sampler)
    state.H_eql = moments.H
    state.C_eql = moments.C
    state.standard_error = moments.max_se
    return gC, gCt


def extragradient_step(gradients: Callable, x: np.ndarray, y: np.ndarray,
                       eta: float,
                       project: Callable = lambda a: a) \
        -> Tuple[np.ndarray, np.ndarray]:
    """
    One extragradient step of min_x max_y: gradients are evaluated at the
    half step and applied at the full step.
    :param gradients: (x, y) -> (grad_x, grad_y)
    :param x: minimized variable
    :param y: maximized variable
    :param eta: step size
    :param project: projection applied to x after each move
    :return: the new (x, y)
    """
    gx, gy = gradients(x, y)
    x_half = project(x - eta * gx)
    y_half = y + eta * gy
    gx, gy = gradients(x_half, y_half)
    return project(x - eta * gx), y + eta * gy


def initial_state(problem: SaddleProblem, eps: float = 1e-3) -> SaddleState:
    """
    NNGP kernel plus eps on the first off-diagonal band, zero tilt.
    """
    _, C0 = nngp_kernel(problem.task, problem.hyper, problem.act,
                        problem.mask)
    return SaddleState(symmetry_broken(C0, eps), np.zeros_like(C0.data))


def _band(data: np.ndarray, problem: SaddleProblem) -> np.ndarray:
    rows, cols = band_indices(problem.grid, problem.P)
    return data[rows, cols]


def solve_saddle(problem: SaddleProblem, init: SaddleState,
                 opts: Optional[SaddleOptions] = None,
                 sampler: Optional[SamplerConfig] = None) -> SaddleState:
    """
    Extragradient iteration to the saddle point.

    The step grows geometrically while the residual behaves and halves on
    jumps. Once the residual reaches max(tol, 3 SE) the off-diagonal band is
    kicked; if the kick grows over kick_steps the point is unstable and
    the iteration continues from the kicked state.
    :param problem: task, prior and architecture
    :param init: start, usually initial_state(problem)
    :param opts: step control and stopping
    :param sampler: moment estimator
    :return: converged state with H_eql and C_eql

    :raises MaxIterations: no convergence (last state attached)
    :raises NonDecreasingResidual: no new best residual for stall_window
        iterations
    """
    opts = opts or SaddleOptions()
    sampler = sampler or SamplerConfig()

    def project(C):
        return psd_clip(C, 1e-10)

    def gradients(C, C_tilde):
        gC, gCt, _ = _evaluate(problem, C, C_tilde, sampler)
        return gC, gCt

    C, C_tilde = project(init.C.data), np.array(init.C_tilde)
    eta = init.eta if init.iteration else opts.eta
    gC, gCt, moments = _evaluate(problem, C, C_tilde, sampler)
    residual = max(np.max(np.abs(gC)), np.max(np.abs(gCt)))
    best, best_iteration = residual, init.iteration
    kicks = 0

    def snapshot(iteration, converged=False):
        return SaddleState(problem.kernel(C), C_tilde, moments.H, moments.C,
                           iteration=iteration, eta=eta, residual=residual,
                           standard_error=moments.max_se,
                           seed=sampler.seed, converged=converged)

    for iteration in range(init.iteration, opts.max_iter):
        if residual <= max(opts.tol, 3 * moments.max_se):
            stable, kicked = _stability_kick(problem, C, C_tilde, eta,
                                             opts, gradients, project)
            if stable or kicks >= opts.max_kicks:
                state = snapshot(iteration, converged=True)
                logging.info(state)
                return state
            kicks += 1
            logging.warning("Saddle point unstable against the off-diagonal "
                            "kick (%s/%s), continuing.", kicks,
                            opts.max_kicks)
            C, C_tilde = kicked

        C, C_tilde = extragradient_step(gradients, C, C_tilde, eta, project)
        gC, gCt, moments = _evaluate(problem, C, C_tilde, sampler)
        previous = residual
        residual = max(np.max(np.abs(gC)), np.max(np.abs(gCt)))
        if residual > 1.5 * previous:
            eta = max(eta / 2, opts.eta_min)
            logging.debug("Residual jumped to %.3e, eta=%.3g", residual, eta)
        else:
            eta = min(eta * opts.growth, opts.eta_max)

        if residual < best:
            best, best_iteration = residual, iteration
        elif iteration - best_iteration >= opts.stall_window:
            raise NonDecreasingResidual(
                f"Residual stuck at {best:.3e} for {opts.stall_window} "
                f"iterations!", state=snapshot(iteration))

        logging.debug("Saddle iteration %s: residual=%.3e, eta=%.3g",
                      iteration, residual, eta)
        if (opts.checkpoint_dir and opts.checkpoint_every
                and (iteration + 1) % opts.checkpoint_every == 0):
            save_saddle_checkpoint(snapshot(iteration + 1),
                                   opts.checkpoint_dir)

    raise MaxIterations(f"Saddle solve did not converge in "
                        f"{opts.max_iter} iterations!",
                        state=snapshot(opts.max_iter))


def _stability_kick(problem: SaddleProblem, C: np.ndarray,
                    C_tilde: np.ndarray, eta: float, opts: SaddleOptions,
                    gradients, project):
    band = _band(C, problem)
    sign = -1.0 if np.sum(band) < 0 else 1.0
    kicked = symmetry_broken(problem.kernel(C),
                             sign * opts.symmetry_breaking).data
    x, y = kicked, C_tilde
    for _ in range(opts.kick_steps):
        x, y = extragradient_step(gradients, x, y, eta, project)
    before = np.max(np.abs(_band(kicked, problem) - band))
    after = np.max(np.abs(_band(x, problem) - band))
    logging.debug("Stability kick: %.3e -> %.3e", before, after)
    return after <= before, (x, y)
