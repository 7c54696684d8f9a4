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

import logging
from typing import Tuple

import numpy as np

from .Exceptions import DivergentPrior
from .KernelSpace import shift_matrix
from .Structures.Activation import Activation
from .Structures.ArchMask import ArchMask
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Task import Task
from .Tasks import input_kernel


def prior_forward(C: np.ndarray, X: np.ndarray, hyper: HyperParams,
                  mask: ArchMask, P: int) -> np.ndarray:
    """
    Sigma_h(C) = w M[C^-] + u X^- on the hidden range.

    X is the input kernel as stored on the input range; input time t sits
    at hidden index t+1, so its matrix already is X^- in hidden coordinates.
    """
    S = shift_matrix(C.shape[0] // P, P)
    return hyper.w * mask.project(S @ C @ S.T, P) + hyper.u * X


def nngp_kernel(task: Task, hyper: HyperParams, act: Activation,
                mask: ArchMask, overflow_bound: float = 1e12) \
        -> Tuple[Kernel, Kernel]:
    """
    Prior kernels of the untrained network.

    Iterates H0 = w M[C0^-] + u X^- and C0 = <phi phi^T>_{N(0, H0)}. The
    shift is nilpotent, so T-1 sweeps reach the fixed point exactly.
    :param task: the task (only its inputs are used)
    :param hyper: prior scales
    :param act: activation
    :param mask: architecture
    :param overflow_bound: largest admissible diagonal entry
    :return: (H0, C0) on the hidden range

    :raises DivergentPrior: diagonal exceeds the overflow bound
    """
    X = input_kernel(task).data
    P = task.P
    C = np.zeros_like(X)
    H = np.zeros_like(X)
    for _ in range(task.grid.T_minus):
        H = prior_forward(C, X, hyper, mask, P)
        diag = np.diag(H)
        if not np.all(np.isfinite(H)) or diag.max() > overflow_bound:
            raise DivergentPrior(f"Prior diagonal {diag.max():.3e} exceeds "
                                 f"the bound {overflow_bound:.3e}!")
        C = act.gaussian_moment(H)

    logging.debug("NNGP prior: diag(H0)=%s", np.round(np.diag(H), 6))
    return (Kernel(task.grid, P, H, "hidden"),
            Kernel(task.grid, P, C, "hidden"))


def nngp_residual(H0: Kernel, C0: Kernel, task: Task, hyper: HyperParams,
                  mask: ArchMask) -> float:
    """
    Sup-norm residual of the prior fixed-point relation.
    """
    X = input_kernel(task).data
    target = prior_forward(C0.data, X, hyper, mask, task.P)
    return float(np.max(np.abs(H0.data - target)))
