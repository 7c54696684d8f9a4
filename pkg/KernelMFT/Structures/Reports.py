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

from typing import Dict, Optional

from .Kernel import Kernel


class SolverOptions:
    """
    Options of the linear MAP solver.
    """

    def __init__(self, gtol: float = 1e-9, max_iter: int = 2000,
                 symmetry_breaking: float = 1e-3, label_floor: float = 1e-12,
                 residual_tol: float = 1e-6, max_restarts: int = 3,
                 det_floor: float = 1e-300, curvature_tol: float = 1e-10,
                 memory_alpha: float = 0.0, memory_steps: int = 4):
        """
        :param gtol: sup-norm gradient tolerance in kernel space
        :param max_iter: iteration budget per optimizer run
        :param symmetry_breaking: size of the off-diagonal seed
        :param label_floor: diagonal floor of the label Gram when kappa = 0
        :param residual_tol: tolerance of the closed-form relation
        :param max_restarts: restarts along negative-curvature directions
        :param det_floor: smallest admissible determinant
        :param curvature_tol: relative tolerance for negative curvature
        :param memory_alpha: starting weight of the annealed residual
            pathway, 0 disables the warm-up stages
        :param memory_steps: number of warm-up stages, the weight halves
            from one to the next
        """
        self.gtol = gtol
        self.max_iter = max_iter
        self.symmetry_breaking = symmetry_breaking
        self.label_floor = label_floor
        self.residual_tol = residual_tol
        self.max_restarts = max_restarts
        self.det_floor = det_floor
        self.curvature_tol = curvature_tol
        self.memory_alpha = float(memory_alpha)
        self.memory_steps = int(memory_steps)

    def dict(self) -> Dict:
        return dict(vars(self))


class SolveReport:
    """
    Result of a linear MAP solve.
    """

    def __init__(self, H_star: Kernel, objective_value: float,
                 gradient_norm: float, iterations: int,
                 closed_form_residual: float, converged: bool,
                 restarts: int = 0, message: str = ""):
        self.H_star = H_star
        self.objective_value = objective_value
        self.gradient_norm = gradient_norm
        self.iterations = iterations
        self.closed_form_residual = closed_form_residual
        self.converged = converged
        self.restarts = restarts
        self.message = message
        self.kernel_path: Optional[str] = None

    def __str__(self):
        return (f"SolveReport: converged={self.converged}, "
                f"objective={self.objective_value:.12g}, "
                f"|grad|={self.gradient_norm:.3e}, "
                f"residual={self.closed_form_residual:.3e}, "
                f"iterations={self.iterations}, restarts={self.restarts}")

    def dict(self) -> Dict:
        """
        Get a dict for data backups. The kernel itself is referenced by path.
        :return: Dict representing the object.
        """
        return {
            "objective_value": self.objective_value,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "closed_form_residual": self.closed_form_residual,
            "converged": self.converged,
            "restarts": self.restarts,
            "message": self.message,
            "kernel": self.H_star.dict(),
            "kernel_path": self.kernel_path
        }
