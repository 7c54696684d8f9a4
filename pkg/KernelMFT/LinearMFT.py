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
Kernel theory of linear networks: the negative log-probability over
preactivation kernels, its gradient and the MAP solver.
"""

import logging
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import linalg, optimize

from .Exceptions import (InvalidParameter, InvalidShape, LineSearchFailure,
                         MaxIterations, SingularKernel)
from .KernelSpace import (KernelSeries, pd_inverse, pd_logdet, psd_clip,
                          shift_matrix, supervised_indices, symmetrize)
from .NNGP import prior_forward
from .Structures.ArchMask import ArchMask
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Reports import SolveReport, SolverOptions
from .Structures.Task import Task
from .Structures.TimeGrid import TimeGrid
from .Tasks import input_kernel, label_kernel

Matrix = Union[np.ndarray, KernelSeries]


def _inv(A: Matrix, what: str) -> Matrix:
    if isinstance(A, KernelSeries):
        return A.inv(lambda a: pd_inverse(a, what))
    return pd_inverse(A, what)


def _lin(func, A: Matrix) -> Matrix:
    if isinstance(A, KernelSeries):
        return A.map(func)
    return func(A)


class LinearObjective:
    """
    -ln P(H | y, x) / N for linear activations:

        1/2 tr[Y_T (v H_T + kappa)^-1] + 1/2 tr[H Sigma^-1]
        - 1/2 ln(det H / det Sigma),   Sigma = w M[H^-] + u X^-

    Unsupervised timesteps enter through the kappa_infinity limit, i.e. the
    label Gram is restricted to the supervised times.
    """

    def __init__(self, Y: Kernel, X: Kernel, hyper: HyperParams,
                 mask: ArchMask, grid: TimeGrid, label_floor: float = 1e-12,
                 det_floor: float = 1e-300, memory: float = 0.0):
        """
        Init the objective.
        :param Y: label kernel on the output range
        :param X: input kernel on the input range
        :param hyper: prior scales and regularizer
        :param mask: architecture
        :param grid: time grid with the supervised set
        :param label_floor: diagonal floor of the label Gram if kappa = 0
        :param det_floor: smallest admissible determinant
        :param memory: weight of the residual pathway, in [0, 1)

        :raises InvalidShape: kernels do not share grid and P
        :raises InvalidParameter: memory outside [0, 1)
        """
        if Y.time_range != "output" or X.time_range != "input":
            raise InvalidShape("LinearObjective needs Y on the output range "
                               "and X on the input range!")
        if (Y.P != X.P or Y.grid.T_total != grid.T_total
                or X.grid.T_total != grid.T_total):
            raise InvalidShape("Y, X and grid do not share T and P!")
        if not 0.0 <= memory < 1.0:
            raise InvalidParameter(f"memory has to be in [0, 1), got "
                                   f"{memory}!")

        self.Y = Y
        self.X = X
        self.hyper = hyper
        self.mask = mask
        self.grid = grid
        self.P = X.P
        self.n = grid.T_minus * self.P
        self.label_floor = label_floor
        self.det_floor = det_floor
        self.kappa_infty_handling = ("label Gram restricted to supervised "
                                     "times (kappa_infinity limit)")

        self._S = shift_matrix(grid.T_minus, self.P)
        self.memory = float(memory)
        self._R = np.eye(self.n) - self.memory * self._S
        # output time t and hidden time t-1 share the flat position
        self._sup = (supervised_indices(Y, grid) if grid.supervised
                     else np.zeros(0, dtype=int))
        self._Y_sup = Y.data[np.ix_(self._sup, self._sup)]

    @classmethod
    def from_task(cls, task: Task, hyper: HyperParams, mask: ArchMask,
                  opts: Optional[SolverOptions] = None,
                  label_scale: float = 1.0) -> "LinearObjective":
        opts = opts or SolverOptions()
        Y = label_kernel(task)
        if label_scale != 1.0:
            Y = Y.with_data(label_scale * Y.data)
        return cls(Y, input_kernel(task), hyper, mask, task.grid,
                   label_floor=opts.label_floor, det_floor=opts.det_floor)

    def with_label_scale(self, scale: float) -> "LinearObjective":
        return LinearObjective(self.Y.with_data(scale * self.Y.data), self.X,
                               self.hyper, self.mask, self.grid,
                               self.label_floor, self.det_floor, self.memory)

    def with_memory(self, memory: float) -> "LinearObjective":
        return LinearObjective(self.Y, self.X, self.hyper, self.mask,
                               self.grid, self.label_floor, self.det_floor,
                               memory)

    # linear building blocks
    def _masked_shift(self, A: np.ndarray) -> np.ndarray:
        return self.mask.project(self._S @ A @ self._S.T, self.P)

    def _masked_shift_adjoint(self, B: np.ndarray) -> np.ndarray:
        return self._S.T @ self.mask.project(B, self.P) @ self._S

    def _restrict(self, A: np.ndarray) -> np.ndarray:
        return A[np.ix_(self._sup, self._sup)]

    def _residual(self, A: np.ndarray) -> np.ndarray:
        return self._R @ A @ self._R.T

    def _residual_adjoint(self, B: np.ndarray) -> np.ndarray:
        return self._R.T @ B @ self._R

    def _embed(self, B: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[np.ix_(self._sup, self._sup)] = B
        return out

    def sigma(self, H: Matrix) -> Matrix:
        """
        Sigma_h(H) = w M[H^-] + u X^-.
        """
        if isinstance(H, KernelSeries):
            return (self.hyper.w * H.map(self._masked_shift)
                    + self.hyper.u * self.X.data)
        return prior_forward(H, self.X.data, self.hyper, self.mask, self.P)

    def _label_gram(self, H: Matrix) -> Matrix:
        ridge = self.hyper.kappa if self.hyper.kappa > 0 else self.label_floor
        return (self.hyper.v * _lin(self._restrict, H)
                + ridge * np.eye(len(self._sup)))

    def label_inverse(self, H: np.ndarray) -> np.ndarray:
        """
        kappa_infinity limit of (vH + kappa)^-1, zero on unsupervised times.
        """
        if not len(self._sup):
            return np.zeros((self.n, self.n))
        return self._embed(pd_inverse(self._label_gram(H), "label Gram"))

    def value(self, H: np.ndarray) -> float:
        Sigma = self.sigma(H)
        kl = 0.5 * (np.trace(pd_inverse(Sigma, "Sigma_h(H)")
                             @ self._residual(H))
                    - pd_logdet(H, "H", self.det_floor)
                    + pd_logdet(Sigma, "Sigma_h(H)", self.det_floor))
        if not len(self._sup):
            return float(kl)
        A_inv = pd_inverse(self._label_gram(H), "label Gram")
        return float(0.5 * np.trace(self._Y_sup @ A_inv) + kl)

    def gradient(self, H: Matrix, Y_sup: Optional[Matrix] = None) -> Matrix:
        """
        Symmetric gradient G with dF = tr(G dH).

        Works on plain matrices and on KernelSeries; the series form gives
        directional derivatives and perturbative orders.
        :param H: kernel (or series of kernels) on the hidden range
        :param Y_sup: supervised label block, defaults to the objective's
        """
        w, v = self.hyper.w, self.hyper.v
        Sigma_inv = _inv(self.sigma(H), "Sigma_h(H)")
        H_inv = _inv(H, "H")
        if self.memory:
            H_res = _lin(self._residual, H)
            Sigma_res = _lin(self._residual_adjoint, Sigma_inv)
        else:
            H_res, Sigma_res = H, Sigma_inv
        tilt = Sigma_inv @ H_res @ Sigma_inv - Sigma_inv
        G = (0.5 * Sigma_res - 0.5 * H_inv
             - 0.5 * w * _lin(self._masked_shift_adjoint, tilt))
        if not len(self._sup):
            return G
        Y_sup = self._Y_sup if Y_sup is None else Y_sup
        A_inv = _inv(self._label_gram(H), "label Gram")
        return G - 0.5 * v * _lin(self._embed, A_inv @ Y_sup @ A_inv)

    def hvp(self, H: np.ndarray, E: np.ndarray) -> np.ndarray:
        """
        Directional derivative of the gradient at H along E.
        """
        return self.gradient(KernelSeries([H, E]))[1]

    def __str__(self):
        return (f"LinearObjective: {self.grid}, P={self.P}, "
                f"mask={self.mask}, memory={self.memory}, {self.hyper}")


def neg_log_p(H: Kernel, obj: LinearObjective) -> float:
    return obj.value(H.data)


def grad_neg_log_p(H: Kernel, obj: LinearObjective) -> Kernel:
    return H.with_data(obj.gradient(H.data))


def closed_form_residual(H: Kernel, obj: LinearObjective) -> float:
    """
    Sup-norm mismatch of the closed-form relation

        Sigma^-1 - H^-1 = w [Sigma^-1 (H - Sigma) Sigma^-1]^+
                          + v (vH + kappa)^-1 Y^+ (vH + kappa)^-1

    where [.]^+ advances by one step and vanishes at the last hidden time.
    With a memory term Sigma^-1 becomes R^T Sigma^-1 R on the left and H
    becomes R H R^T on the right.
    """
    w, v = obj.hyper.w, obj.hyper.v
    Sigma = obj.sigma(H.data)
    Sigma_inv = pd_inverse(Sigma, "Sigma_h(H)")
    lhs = obj._residual_adjoint(Sigma_inv) - pd_inverse(H.data, "H")
    rhs = w * obj._masked_shift_adjoint(
        Sigma_inv @ (obj._residual(H.data) - Sigma) @ Sigma_inv)
    if len(obj._sup):
        A_inv = obj.label_inverse(H.data)
        rhs = rhs + v * A_inv @ obj.Y.data @ A_inv
    return float(np.max(np.abs(lhs - rhs)))


def partial_supervision_projector(grid: TimeGrid, A: Kernel) -> Kernel:
    """
    The kappa_infinity -> infinity limit of (A + kappa_infinity U U^T)^-1,
    U spanning the unsupervised times.

    By block inversion the Woodbury limit A^-1 - A^-1 U (U^T A^-1 U)^-1
    U^T A^-1 equals the inverse of the supervised block embedded with zeros.
    :param grid: grid with the supervised set
    :param A: PSD kernel on the output (or hidden) range
    :return: the limiting inverse
    :raises SingularKernel: supervised block singular
    """
    idx = supervised_indices(A, grid)
    block = A.data[np.ix_(idx, idx)]
    try:
        inverse = linalg.inv(block, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        raise SingularKernel("Supervised block of the Gram is singular!")
    if np.linalg.cond(block) > 1e14:
        raise SingularKernel("Supervised block of the Gram is singular!")
    out = np.zeros_like(A.data)
    out[np.ix_(idx, idx)] = symmetrize(inverse)
    return A.with_data(out)


def band_indices(grid: TimeGrid, P: int):
    """
    Flat (row, col) pairs of the first time-off-diagonal band, matching
    patterns only.
    """
    rows, cols = [], []
    for q in range(grid.T_minus - 1):
        for p in range(P):
            rows.append((q + 1) * P + p)
            cols.append(q * P + p)
    return np.array(rows, dtype=int), np.array(cols, dtype=int)


def symmetry_broken(H0: Kernel, eps: float) -> Kernel:
    """
    H0 plus eps on the first time-off-diagonal band.
    """
    data = np.array(H0.data)
    rows, cols = band_indices(H0.grid, H0.P)
    data[rows, cols] += eps
    data[cols, rows] += eps
    return H0.with_data(data)


class _CholeskyProblem:
    """
    The objective in the lower-triangular factor L with H = L L^T.
    """

    def __init__(self, obj: LinearObjective):
        self.obj = obj
        self.idx = np.tril_indices(obj.n)
        self._key = None
        self._cache: Tuple = ()

    def unpack(self, x: np.ndarray) -> np.ndarray:
        L = np.zeros((self.obj.n, self.obj.n))
        L[self.idx] = x
        return L

    def pack(self, L: np.ndarray) -> np.ndarray:
        return L[self.idx].copy()

    def _state(self, x: np.ndarray):
        key = x.tobytes()
        if key != self._key:
            L = self.unpack(x)
            H = L @ L.T
            self._cache = (L, H, self.obj.gradient(H))
            self._key = key
        return self._cache

    def fun(self, x: np.ndarray) -> float:
        L = self.unpack(x)
        try:
            return self.obj.value(L @ L.T)
        except SingularKernel:
            return np.inf

    def jac(self, x: np.ndarray) -> np.ndarray:
        L, _, G = self._state(x)
        return 2.0 * (G @ L)[self.idx]

    def hessp(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        L, H, G = self._state(x)
        K = self.unpack(p)
        dG = self.obj.hvp(H, K @ L.T + L @ K.T)
        return 2.0 * (dG @ L + G @ K)[self.idx]


def _symmetric_basis(n: int):
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            yield E


def curvature_check(obj: LinearObjective, H: np.ndarray) \
        -> Tuple[float, np.ndarray]:
    """
    Smallest Hessian eigenvalue at H over symmetric directions and the
    corresponding direction (sup-norm 1).
    """
    basis = list(_symmetric_basis(obj.n))
    hessian = np.array([[np.sum(Ek * obj.hvp(H, El)) for El in basis]
                        for Ek in basis])
    eig, vec = np.linalg.eigh(symmetrize(hessian))
    direction = sum(c * E for c, E in zip(vec[:, 0], basis))
    scale = max(float(np.max(np.abs(eig))), 1.0)
    return float(eig[0]) / scale, direction / np.max(np.abs(direction))


def _band_sign(data: np.ndarray, grid: TimeGrid, P: int) -> float:
    rows, cols = band_indices(grid, P)
    total = float(np.sum(data[rows, cols]))
    return -1.0 if total < 0 else 1.0


def _minimize(obj: LinearObjective, H: np.ndarray, opts: SolverOptions):
    # trust-ncg plus negative-curvature restarts from a PSD start
    problem = _CholeskyProblem(obj)
    sign = _band_sign(H, obj.grid, obj.P)
    H = psd_clip(H, 1e-12)
    iterations = 0
    restarts = 0
    while True:
        x0 = problem.pack(np.linalg.cholesky(H))
        result = optimize.minimize(
            problem.fun, x0, method="trust-ncg", jac=problem.jac,
            hessp=problem.hessp,
            options={"gtol": 1e-2 * opts.gtol, "maxiter": opts.max_iter}
        )
        iterations += int(result.nit)
        L = problem.unpack(result.x)
        H = symmetrize(L @ L.T)
        grad_norm = float(np.max(np.abs(obj.gradient(H))))
        logging.debug("trust-ncg: nit=%s, |grad|=%.3e, %s", result.nit,
                      grad_norm, result.message)

        if grad_norm > opts.gtol or restarts >= opts.max_restarts:
            break
        curvature, direction = curvature_check(obj, H)
        if curvature >= -opts.curvature_tol:
            break

        rows, cols = band_indices(obj.grid, obj.P)
        if np.sum(direction[rows, cols]) * sign < 0:
            direction = -direction
        kick = 10 * opts.symmetry_breaking
        while True:
            try:
                np.linalg.cholesky(H + kick * direction)
                break
            except np.linalg.LinAlgError:
                kick /= 2
        restarts += 1
        logging.warning("Converged to a saddle (curvature %.3e)! Restarting "
                        "along the unstable direction (%s/%s).", curvature,
                        restarts, opts.max_restarts)
        H = H + kick * direction
    return H, grad_norm, iterations, restarts, result


def memory_schedule(opts: SolverOptions) -> List[float]:
    """
    Memory weights of the warm-up stages: memory_alpha halved
    memory_steps times. Empty without a memory term.
    """
    if not opts.memory_alpha > 0:
        return []
    return [opts.memory_alpha * 0.5 ** k for k in range(opts.memory_steps)]


def solve_map(obj: LinearObjective, init: Kernel,
              opts: Optional[SolverOptions] = None) -> SolveReport:
    """
    Local minimizer of neg_log_p via trust-region Newton-CG in the Cholesky
    factor, with exact Hessian-vector products.

    A converged point with negative curvature (the symmetric branch above
    the transition) is left along the most negative direction, keeping
    the sign of the initial off-diagonal band. With opts.memory_alpha > 0
    the solve first runs through memory_schedule(opts) with a residual
    pathway, each stage starting from the last, which removes the
    sign-alternating branch; the final stage uses obj itself.
    :param obj: the objective
    :param init: PSD start, usually symmetry_broken(H0, eps)
    :param opts: solver options
    :return: the report of the stable branch

    :raises MaxIterations: iteration budget exhausted (report attached)
    :raises LineSearchFailure: optimizer stopped early (report attached)
    """
    opts = opts or SolverOptions()
    H = init.data
    iterations = 0
    for memory in memory_schedule(opts):
        H, grad_norm, nit, _, _ = _minimize(obj.with_memory(memory), H, opts)
        iterations += nit
        logging.debug("Memory stage %.3g: |grad|=%.3e", memory, grad_norm)

    H, grad_norm, nit, restarts, result = _minimize(obj, H, opts)
    iterations += nit
    message = str(result.message)
    H_star = Kernel(obj.grid, obj.P, H, "hidden")
    residual = closed_form_residual(H_star, obj)
    converged = grad_norm <= opts.gtol and residual <= opts.residual_tol
    report = SolveReport(H_star=H_star,
                         objective_value=obj.value(H),
                         gradient_norm=grad_norm,
                         iterations=iterations,
                         closed_form_residual=residual,
                         converged=converged,
                         restarts=restarts,
                         message=message)
    if not converged:
        if result.status == 1:
            raise MaxIterations(f"MAP solve did not converge in "
                                f"{iterations} iterations!", report=report)
        raise LineSearchFailure(f"MAP solve stopped early: {message}",
                                report=report)
    logging.info(report)
    return report
