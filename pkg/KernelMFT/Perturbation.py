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
Expansion of the linear-network kernel around the NNGP point in the label
scale s (Y -> s Y): H = H0 + s D1 + s^2 D2 + O(s^3).

Both orders are the Taylor coefficients of the stationarity condition of
LinearMFT, each a linear system J vec(D) = -source over the symmetric
kernel entries.
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from .Exceptions import SingularSystem
from .KernelSpace import KernelSeries, pd_inverse, shift_matrix
from .LinearMFT import LinearObjective, partial_supervision_projector, \
    solve_map
from .NNGP import nngp_kernel
from .Structures.Activation import Activation
from .Structures.ArchMask import ArchMask
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Propagators import Propagators
from .Structures.Reports import SolverOptions
from .Structures.Task import Task

MAX_CONDITION = 1e14


def _objective(Y: Kernel, X: Kernel, hyper: HyperParams,
               mask: ArchMask) -> LinearObjective:
    return LinearObjective(Y, X, hyper, mask, Y.grid)


def propagators(H0: Kernel, X: Kernel, hyper: HyperParams) -> Propagators:
    """
    Build the NNGP propagators.
    :param H0: NNGP kernel on the hidden range
    :param X: input kernel on the input range
    :param hyper: prior scales
    :return: the propagators
    """
    S = shift_matrix(H0.grid.T_minus, H0.P)
    advanced = hyper.w * H0.data + hyper.u * (S.T @ X.data @ S)
    label_gram = H0.with_data(hyper.v * H0.data
                              + hyper.kappa * np.eye(H0.dim))
    return Propagators(
        G_h=H0.with_data(pd_inverse(H0.data, "H0")),
        G_h_plus=H0.with_data(pd_inverse(advanced, "w H0 + u X^+")),
        G_y=partial_supervision_projector(H0.grid, label_gram)
    )


def _basis(n: int):
    rows, cols = np.triu_indices(n)
    for i, j in zip(rows, cols):
        E = np.zeros((n, n))
        E[i, j] = E[j, i] = 1.0
        yield E


def _vech(A: np.ndarray) -> np.ndarray:
    return A[np.triu_indices(A.shape[0])]


def _unvech(x: np.ndarray, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    A[np.triu_indices(n)] = x
    return A + np.triu(A, 1).T


def _jacobian(obj: LinearObjective, H0: np.ndarray) -> np.ndarray:
    zero_label = KernelSeries([np.zeros_like(obj._Y_sup)] * 2)
    columns = [
        _vech(obj.gradient(KernelSeries([H0, E]), Y_sup=zero_label)[1])
        for E in _basis(obj.n)
    ]
    return np.array(columns).T


def _solve(J: np.ndarray, source: np.ndarray, n: int) -> np.ndarray:
    condition = np.linalg.cond(J)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularSystem(f"Perturbative system has condition "
                             f"{condition:.3e}!")
    try:
        x = linalg.solve(J, -_vech(source))
    except (linalg.LinAlgError, ValueError) as e:
        raise SingularSystem(f"Perturbative system: {e}")
    return _unvech(x, n)


def _taylor_source(obj: LinearObjective, H_coefs: List[np.ndarray],
                   order: int) -> np.ndarray:
    """
    Coefficient s^order of the gradient along H0 + s D1 + ... with label
    s Y, the unknown highest correction set to zero.
    """
    zero = np.zeros_like(H_coefs[0])
    coefs = list(H_coefs) + [zero] * (order + 1 - len(H_coefs))
    label = [np.zeros_like(obj._Y_sup), obj._Y_sup] \
        + [np.zeros_like(obj._Y_sup)] * (order - 1)
    G = obj.gradient(KernelSeries(coefs), Y_sup=KernelSeries(label))
    return G[order]


def delta1(H0: Kernel, Y: Kernel, hyper: HyperParams, mask: ArchMask,
           X: Kernel) -> Kernel:
    """
    First-order kernel correction, linear in Y.
    :param H0: NNGP kernel
    :param Y: label kernel on the output range
    :param hyper: prior scales
    :param mask: architecture
    :param X: input kernel
    :return: D1 on the hidden range

    :raises SingularSystem: singular first-order system
    """
    obj = _objective(Y, X, hyper, mask)
    source = _taylor_source(obj, [H0.data], 1)
    D1 = _solve(_jacobian(obj, H0.data), source, obj.n)
    return H0.with_data(D1)


def delta2(H0: Kernel, D1: Kernel, hyper: HyperParams, mask: ArchMask,
           Y: Kernel, X: Kernel) -> Kernel:
    """
    Second-order kernel correction. The source collects the (D1)^2 terms
    and the label-D1 cross terms.

    :raises SingularSystem: singular second-order system
    """
    obj = _objective(Y, X, hyper, mask)
    source = _taylor_source(obj, [H0.data, D1.data], 2)
    D2 = _solve(_jacobian(obj, H0.data), source, obj.n)
    return H0.with_data(D2)


def perturbative_kernel(H0: Kernel, Y: Kernel, hyper: HyperParams,
                        mask: ArchMask, X: Kernel) -> Kernel:
    D1 = delta1(H0, Y, hyper, mask, X)
    D2 = delta2(H0, D1, hyper, mask, Y, X)
    return H0.with_data(H0.data + D1.data + D2.data)


def expansion_error(task: Task, hyper: HyperParams, mask: ArchMask,
                    scales: Sequence[float],
                    opts: Optional[SolverOptions] = None) -> List[Dict]:
    """
    Compare the full solver with the expansion at several label scales.

    The ratio column divides the second-order error of the previous scale
    by the current one; for halving scales it tends to 8.
    :param task: the task
    :param hyper: prior scales
    :param mask: architecture
    :param scales: label scales, usually halving
    :param opts: solver options
    :return: rows (scale, arch, err_order1, err_order2, ratio)
    """
    opts = opts or SolverOptions()
    H0, _ = nngp_kernel(task, hyper, Activation("linear"), mask)
    base = LinearObjective.from_task(task, hyper, mask, opts)
    D1 = delta1(H0, base.Y, hyper, mask, base.X)
    D2 = delta2(H0, D1, hyper, mask, base.Y, base.X)

    rows = []
    previous = None
    for s in scales:
        first = H0.data + s * D1.data
        second = first + s * s * D2.data
        obj = base.with_label_scale(s)
        report = solve_map(obj, H0.with_data(second), opts)
        H_star = report.H_star.data
        err1 = float(np.max(np.abs(H_star - first)))
        err2 = float(np.max(np.abs(H_star - second)))
        ratio = previous / err2 if previous is not None and err2 > 0 \
            else None
        rows.append({"scale": s, "arch": str(mask), "err_order1": err1,
                     "err_order2": err2, "ratio": ratio})
        logging.info("Expansion at scale %s (%s): err1=%.3e, err2=%.3e, "
                     "ratio=%s", s, mask, err1, err2, ratio)
        previous = err2
    return rows
