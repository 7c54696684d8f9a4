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
from typing import Iterable, List, Tuple

import numpy as np

from .Exceptions import EmptySupervision, InvalidParameter, InvalidShape
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Task import Task
from .Structures.TimeGrid import TimeGrid


def sinusoid_task(T: int) -> Task:
    """
    Single impulse at t=0, target y^t = cos(2 pi t / T) at every output time.
    :param T: number of timesteps (>= 3)
    :return: the task
    """
    if T < 3:
        raise InvalidParameter(f"sinusoid_task needs T >= 3, got {T}!")
    grid = TimeGrid(T)
    x = np.zeros((grid.T_minus, 1, 1))
    x[0, 0, 0] = 1.0
    y = np.array([[math.cos(2 * math.pi * t / T)] for t in grid.output_times])
    return Task(grid, x, y, generator="sinusoid", params={"T": T})


def endpoint_classification(P: int, D: int, T: int = 8) -> Task:
    """
    P orthogonal inputs at t=0 with balanced labels +-1, supervised at t=T.

    Inputs are x^0_p = sqrt(D) e_p so that X^{00} is the identity. Labels at
    unsupervised output times are zero.
    :param P: pattern count (even, <= D)
    :param D: input dimension
    :param T: number of timesteps
    :return: the task
    :raises InvalidShape: P > D
    """
    if P > D:
        raise InvalidShape(f"Cannot place {P} orthogonal inputs in D={D}!")
    if P < 2 or P % 2:
        raise InvalidParameter(f"P has to be even and >= 2, got {P}!")
    grid = TimeGrid(T, supervised=[T])
    x = np.zeros((grid.T_minus, P, D))
    x[0, :, :P] = math.sqrt(D) * np.eye(P)
    y = np.zeros((grid.T_minus, P))
    y[-1] = np.concatenate([np.ones(P // 2), -np.ones(P // 2)])
    return Task(grid, x, y, generator="endpoint_classification",
                params={"P": P, "D": D, "T": T})


def endpoint_scalar_task(T: int, label: float) -> Task:
    """
    The single-pattern endpoint setting: x^0 = 1, one label at t=T.
    """
    grid = TimeGrid(T, supervised=[T])
    x = np.zeros((grid.T_minus, 1, 1))
    x[0, 0, 0] = 1.0
    y = np.zeros((grid.T_minus, 1))
    y[-1, 0] = label
    return Task(grid, x, y, generator="endpoint_scalar",
                params={"T": T, "label": float(label)})


def label_for_lambda(lam: float, T: int, hyper: HyperParams) -> float:
    """
    Endpoint label with signal strength lambda = y^2 / (u w^(T-2) v).
    """
    if lam < 0:
        raise InvalidParameter(f"lambda has to be >= 0, got {lam}!")
    return math.sqrt(lam * hyper.u * hyper.w ** (T - 2) * hyper.v)


def scale_labels(task: Task, factor: float) -> Task:
    """
    Same task with all labels multiplied by factor.
    """
    params = dict(task.params)
    params["label_factor"] = params.get("label_factor", 1.0) * factor
    return Task(task.grid, task.x, factor * task.y, generator=task.generator,
                params=params, seed=task.seed)


def teacher_weights(dphi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Teacher network (U*, W*, V*): identity read-in, rotation by dphi,
    read-out of the first component.
    """
    W = np.array([[math.cos(dphi), -math.sin(dphi)],
                  [math.sin(dphi), math.cos(dphi)]])
    return np.eye(2), W, np.array([[1.0, 0.0]])


def teacher_sequence(t: int, dphi: float, phi0: float) -> float:
    """
    y^t = V* (W*)^t U* x0 with x0 = (cos phi0, sin phi0).
    """
    U, W, V = teacher_weights(dphi)
    x0 = np.array([math.cos(phi0), math.sin(phi0)])
    return float((V @ np.linalg.matrix_power(W, t) @ U @ x0)[0])


def teacher_rotation_task(T: int, dphi: float, phi0: float,
                          supervised: Iterable[int]) -> Task:
    """
    Linear teacher rotating a 2-D input; labels exist at every output time
    but only the given set is supervised.
    :param T: number of timesteps (>= 3)
    :param dphi: rotation angle per step
    :param phi0: angle of the input vector
    :param supervised: supervised output times
    :return: the task
    :raises EmptySupervision: empty supervised set
    """
    if T < 3:
        raise InvalidParameter(f"teacher_rotation_task needs T >= 3, "
                               f"got {T}!")
    supervised = sorted(set(supervised))
    if not supervised:
        raise EmptySupervision()
    grid = TimeGrid(T, supervised=supervised)
    x = np.zeros((grid.T_minus, 1, 2))
    x[0, 0] = (math.cos(phi0), math.sin(phi0))
    y = np.array([[teacher_sequence(t, dphi, phi0)]
                  for t in grid.output_times])
    return Task(grid, x, y, generator="teacher_rotation",
                params={"T": T, "dphi": dphi, "phi0": phi0,
                        "supervised": supervised})


def teacher_kernel(task: Task) -> Kernel:
    """
    Hidden kernel of the teacher network itself, h*^q = (W*)^(q+1) U* x0,
    so that V* h*^q equals the label at output time q+1.
    """
    if task.generator != "teacher_rotation":
        raise InvalidParameter("teacher_kernel needs a teacher_rotation task!")
    U, W, _ = teacher_weights(task.params["dphi"])
    x0 = task.x[0, 0]
    states = np.array([np.linalg.matrix_power(W, q + 1) @ U @ x0
                       for q in task.grid.hidden_times])
    return Kernel(task.grid, 1, states @ states.T, "hidden")


def spread_supervision(T: int, k: int) -> List[int]:
    """
    k supervised output times spread evenly over 2..T.
    """
    if not 1 <= k <= T - 1:
        raise InvalidParameter(f"k has to be in 1..{T - 1}, got {k}!")
    return sorted({int(round(t)) for t in np.linspace(2, T, k)})


def input_kernel(task: Task) -> Kernel:
    """
    X^{tt'}_{pp'} = (1/D) sum_i x^t_{p,i} x^{t'}_{p',i} on the input range.
    """
    flat = task.x.reshape(-1, task.D)
    return Kernel(task.grid, task.P, flat @ flat.T / task.D, "input")


def label_kernel(task: Task) -> Kernel:
    """
    Y^{tt'}_{pp'} = y^t_p y^{t'}_{p'} on the output range, zero outside the
    supervised times.
    """
    y = np.zeros_like(task.y)
    rows = [t - 2 for t in task.grid.supervised]
    y[rows] = task.y[rows]
    flat = y.reshape(-1)
    return Kernel(task.grid, task.P, np.outer(flat, flat), "output")
