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

import numpy as np
from scipy import linalg

from .Exceptions import DegenerateInput, InvalidParameter, InvalidShape, \
    SingularKernel
from .KernelSpace import supervised_indices
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.PredictorResult import PredictorResult
from .Structures.Task import Task


def _solve_gram(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = linalg.cho_factor(gram, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        raise SingularKernel("Label Gram is singular!")
    return linalg.cho_solve(factor, rhs)


def endpoint_predictor(H: Kernel, y_endpoint, hyper: HyperParams) \
        -> np.ndarray:
    """
    f^T = v H^{T-T-} (v H^{T-T-} + kappa)^-1 y^T for all patterns.
    :param H: hidden kernel
    :param y_endpoint: labels at the last output time (P,)
    :param hyper: readout scale and regularizer
    :return: predictions (P,)

    :raises SingularKernel: singular block at kappa = 0
    """
    last = H.grid.hidden_times[-1]
    block = hyper.v * H.block(last, last)
    y = np.asarray(y_endpoint, dtype=float).reshape(-1)
    if y.shape != (H.P,):
        raise InvalidShape(f"Need {H.P} endpoint labels, got {y.shape}!")
    return block @ _solve_gram(block + hyper.kappa * np.eye(H.P), y)


def sequence_predictor(H: Kernel, task: Task, hyper: HyperParams) \
        -> PredictorResult:
    """
    Kernel regression from the supervised times to every output time,

        f = v H[q, T] (v H[T, T] + kappa)^-1 y_T,

    the Gram restricted to the supervised times.
    :param H: hidden kernel
    :param task: labels and supervision
    :param hyper: readout scale and regularizer
    :return: predictions and losses over all output times

    :raises EmptySupervision: no supervised times
    :raises SingularKernel: singular supervised Gram
    """
    sup = supervised_indices(H, task.grid)
    gram = hyper.v * H.data[np.ix_(sup, sup)] + hyper.kappa * np.eye(len(sup))
    y_flat = task.y.reshape(-1)
    # label rows share the flat position of hidden time t-1
    alpha = _solve_gram(gram, y_flat[sup])
    f = (hyper.v * H.data[:, sup] @ alpha).reshape(task.y.shape)

    per_time_loss = 0.5 * np.mean((task.y - f) ** 2, axis=1)
    result = PredictorResult(task.grid, task.y, f, per_time_loss)
    logging.debug(result)
    return result


def _center(K: np.ndarray, centering: str) -> np.ndarray:
    if centering == "mean":
        return K - np.mean(K)
    if centering == "double":
        n = K.shape[0]
        J = np.eye(n) - np.ones((n, n)) / n
        return J @ K @ J
    raise InvalidParameter(f"Unknown centering {centering}! Use mean or "
                           f"double.")


def cka(A: Kernel, B: Kernel, centering: str = "mean") -> float:
    """
    Cosine similarity of the centered, vectorized kernels.
    :param centering: "mean" subtracts the mean entry, "double" uses
                      J K J with J the centering matrix
    :raises InvalidShape: different shapes
    :raises DegenerateInput: a centered matrix vanishes
    """
    a = np.asarray(getattr(A, "data", A), dtype=float)
    b = np.asarray(getattr(B, "data", B), dtype=float)
    if a.shape != b.shape:
        raise InvalidShape(f"CKA of shapes {a.shape} and {b.shape}!")
    a = _center(a, centering)
    b = _center(b, centering)
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        raise DegenerateInput("Centered kernel has zero norm!")
    value = float(np.sum(a * b) / (norm_a * norm_b))
    return min(1.0, max(-1.0, value))


def autocorrelation(C: Kernel) -> np.ndarray:
    """
    Mean of C^{t, t-tau} over valid t for every lag tau >= 0.
    """
    if C.P != 1:
        raise InvalidShape("autocorrelation needs a single-pattern kernel!")
    n = C.dim
    return np.array([np.mean(np.diagonal(C.data, offset=-tau))
                     for tau in range(n)])
