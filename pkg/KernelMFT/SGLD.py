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
Weight-space networks trained with stochastic gradient Langevin dynamics.

The networks are h^t = W^(t-1) phi(h^(t-1)) + U x^(t-1) with h^0 = 0 and
f^(t+1) = V phi(h^t). Weights have the prior variances G_U = u/D,
G_W = w/N and G_V = v/N^2; the stationary law of the dynamics is the
posterior at temperature kappa/N.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from .Exceptions import InvalidParameter, NumericOverflow
from .Structures.Activation import Activation
from .Structures.ArchMask import ArchMask
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Task import Task
from .Structures.Weights import Measurement, SGLDConfig, WeightState


def init_weights(task: Task, hyper: HyperParams, arch: ArchMask,
                 seed: int = 0) -> WeightState:
    """
    Draw all weights from their priors. The same generator then drives the
    Langevin noise.
    """
    rng = np.random.default_rng(seed)
    N, D = hyper.N, task.D
    U = rng.standard_normal((N, D)) * math.sqrt(hyper.u / D)
    n_layers = 1 if arch is ArchMask.RNN else max(task.grid.T_minus - 1, 0)
    W = [rng.standard_normal((N, N)) * math.sqrt(hyper.G_W)
         for _ in range(n_layers)]
    V = rng.standard_normal((1, N)) * math.sqrt(hyper.G_V)
    return WeightState(U, W, V, arch, rng_seed=seed, rng=rng)


def forward(state: WeightState, task: Task, act: Activation,
            overflow_bound: float = 1e6) -> Tuple[np.ndarray, np.ndarray]:
    """
    Unroll the network.
    :param state: weights
    :param task: inputs (input_time, pattern, D)
    :param act: activation
    :param overflow_bound: largest admissible |h|
    :return: h (hidden_time, pattern, N) and f (output_time, pattern)

    :raises NumericOverflow: |h| beyond the bound
    """
    T_minus = task.grid.T_minus
    h = np.zeros((T_minus, task.P, state.N))
    h[0] = task.x[0] @ state.U.T
    for i in range(1, T_minus):
        h[i] = act(h[i - 1]) @ state.layer(i - 1).T + task.x[i] @ state.U.T
    if not np.all(np.isfinite(h)) or np.max(np.abs(h)) > overflow_bound:
        raise NumericOverflow(f"Hidden state exceeds {overflow_bound:.1e}! "
                              f"Prior scales too large for this T?")
    f = (act(h) @ state.V.T)[..., 0]
    return h, f


def _residuals(f: np.ndarray, task: Task) -> np.ndarray:
    # dE/df with E = 1/2 sum over supervised (y - f)^2
    df = np.zeros_like(f)
    rows = [t - 2 for t in task.supervised]
    df[rows] = f[rows] - task.y[rows]
    return df


def energy_gradients(state: WeightState, task: Task, act: Activation,
                     overflow_bound: float = 1e6) \
        -> Tuple[float, Dict, np.ndarray]:
    """
    E = 1/2 sum_{t supervised, p} (y - f)^2 and its gradients by reverse
    accumulation.
    :return: (E, {"U": ..., "W": [per layer], "V": ...}, h)
    """
    h, f = forward(state, task, act, overflow_bound)
    df = _residuals(f, task)
    energy = 0.5 * float(np.sum(df ** 2))

    phi = act(h)
    dphi = act.derivative(h)
    T_minus = task.grid.T_minus
    gU = np.zeros_like(state.U)
    gW = [None] * (T_minus - 1)
    gV = np.einsum("ip,ipn->n", df, phi)[None, :]

    dh_next = None
    for i in reversed(range(T_minus)):
        grad_phi = df[i][:, None] * state.V
        if dh_next is not None:
            grad_phi = grad_phi + dh_next @ state.layer(i)
            gW[i] = dh_next.T @ phi[i]
        dh = grad_phi * dphi[i]
        gU += dh.T @ task.x[i]
        dh_next = dh

    return energy, {"U": gU, "W": gW, "V": gV}, h


def loss_and_gradients(state: WeightState, task: Task, act: Activation) \
        -> Tuple[float, Dict]:
    """
    Training loss L = E / (P |T|) and its gradients, with the recurrent
    gradient reduced to the stored matrices.
    """
    energy, grads, _ = energy_gradients(state, task, act)
    scale = 1.0 / (task.P * max(len(task.supervised), 1))
    W = _reduce_layers(grads["W"], state, tie=False)
    return scale * energy, {"U": scale * grads["U"],
                            "W": [scale * g for g in W],
                            "V": scale * grads["V"]}


def _reduce_layers(per_layer: List[np.ndarray], state: WeightState,
                   tie: bool) -> List[np.ndarray]:
    arch = state.arch
    if not per_layer:
        # single hidden step, the recurrent weights see no data
        return [np.zeros_like(Wt) for Wt in state.W]
    if arch is ArchMask.RNN or tie:
        total = per_layer[0]
        for g in per_layer[1:]:
            total = total + g
        return [total] if arch is ArchMask.RNN else [total] * len(per_layer)
    return per_layer


def sgld_step(state: WeightState, task: Task, hyper: HyperParams,
              act: Activation, cfg: SGLDConfig) -> WeightState:
    """
    theta <- theta - ((G/K) grad E + theta) ds + sqrt(2 G ds) xi

    per parameter block with prior variance G and temperature K = kappa/N.
    This is the plain update theta <- theta - (grad E/K + theta/G) ds' +
    sqrt(2 ds') xi with the block-wise time step ds' = G ds, so both have
    the posterior as stationary law. Each block relaxes at unit rate in the
    absence of data.
    :raises InvalidParameter: kappa = 0 (zero temperature)
    :raises NumericOverflow: hidden state beyond the bound
    """
    if not hyper.kappa > 0:
        raise InvalidParameter("SGLD needs kappa > 0!")
    _, grads, _ = energy_gradients(state, task, act, cfg.overflow_bound)
    K = hyper.kappa_ext
    ds = cfg.ds
    rng = state.rng
    tie = cfg.tie_layers and state.arch is ArchMask.DNN

    def update(theta, grad, G, noise):
        return theta - (G / K * grad + theta) * ds \
            + math.sqrt(2 * G * ds) * noise

    U = update(state.U, grads["U"], hyper.u / task.D,
               rng.standard_normal(state.U.shape))
    W_grads = _reduce_layers(grads["W"], state, tie)
    if tie:
        noise = rng.standard_normal(state.W[0].shape)
        W = [update(Wt, g, hyper.G_W, noise)
             for Wt, g in zip(state.W, W_grads)]
    else:
        W = [update(Wt, g, hyper.G_W, rng.standard_normal(Wt.shape))
             for Wt, g in zip(state.W, W_grads)]
    V = update(state.V, grads["V"], hyper.G_V,
               rng.standard_normal(state.V.shape))
    return WeightState(U, W, V, state.arch, state.rng_seed, rng)


def _flat_kernel(a: np.ndarray) -> np.ndarray:
    flat = a.reshape(-1, a.shape[-1])
    return flat @ flat.T / a.shape[-1]


def train_and_measure(task: Task, hyper: HyperParams, act: Activation,
                      arch: ArchMask, cfg: Optional[SGLDConfig] = None,
                      init: Optional[WeightState] = None) -> Measurement:
    """
    Run the dynamics and average the kernels over thinned post-burn-in
    samples.
    :param task: the task
    :param hyper: priors, temperature and width
    :param act: activation
    :param arch: RNN or DNN
    :param cfg: step size, length, thinning, seed
    :param init: start weights, prior draw if None
    :return: C_exp, H_exp, predictor samples and the loss trace
    """
    cfg = cfg or SGLDConfig()
    state = init or init_weights(task, hyper, arch, cfg.seed)
    scale = 1.0 / (task.P * max(len(task.supervised), 1))

    n = task.grid.T_minus * task.P
    sum_C = np.zeros((n, n))
    sum_H = np.zeros((n, n))
    f_samples = []
    losses = []
    sq = {"U": 0.0, "W": 0.0, "V": 0.0}
    n_recorded = 0

    for step in range(cfg.n_steps):
        state = sgld_step(state, task, hyper, act, cfg)
        h, f = forward(state, task, act, cfg.overflow_bound)
        losses.append(scale * 0.5 * float(np.sum(_residuals(f, task) ** 2)))
        if step < cfg.burn_in or (step - cfg.burn_in) % cfg.thin:
            continue
        sum_C += _flat_kernel(act(h))
        sum_H += _flat_kernel(h)
        f_samples.append(f)
        sq["U"] += float(np.mean(state.U ** 2))
        sq["W"] += float(np.mean([np.mean(Wt ** 2) for Wt in state.W])) \
            if state.W else 0.0
        sq["V"] += float(np.mean(state.V ** 2))
        n_recorded += 1

    losses = np.array(losses)
    post = losses[cfg.burn_in:]
    half = len(post) // 2
    first, second = float(np.mean(post[:half])), float(np.mean(post[half:]))
    spread = abs(first - second) / max(abs(first), abs(second), 1e-12)
    stationary = spread <= cfg.stationarity_threshold
    if not stationary:
        logging.warning("SGLD loss not stationary: window means %.4g vs "
                        "%.4g!", first, second)

    measurement = Measurement(
        C_exp=Kernel(task.grid, task.P, sum_C / n_recorded, "hidden"),
        H_exp=Kernel(task.grid, task.P, sum_H / n_recorded, "hidden"),
        f_samples=np.array(f_samples),
        losses=losses,
        weight_variances={k: v / n_recorded for k, v in sq.items()},
        stationary=stationary,
        seed=cfg.seed
    )
    logging.info(measurement)
    return measurement
