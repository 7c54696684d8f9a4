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

import numpy as np

from .Kernel import Kernel
from ..Exceptions import InvalidParameter, InvalidShape

SAMPLER_METHODS = ("importance", "langevin", "auto", "analytic")


class SaddleState:
    """
    Primal/dual kernel pair (C, C_tilde) of the nonlinear saddle point plus
    the moments last evaluated at it.
    """

    def __init__(self, C: Kernel, C_tilde: np.ndarray,
                 H_eql: Optional[Kernel] = None,
                 C_eql: Optional[Kernel] = None, iteration: int = 0,
                 eta: float = 0.05, residual: float = float("inf"),
                 standard_error: float = 0.0, seed: Optional[int] = None,
                 converged: bool = False):
        C_tilde = np.array(C_tilde, dtype=float)
        if C_tilde.shape != C.data.shape:
            raise InvalidShape(f"C_tilde has shape {C_tilde.shape}, "
                               f"expected {C.data.shape}!")
        self.C = C
        self.C_tilde = 0.5 * (C_tilde + C_tilde.T)
        self.H_eql = H_eql
        self.C_eql = C_eql
        self.iteration = int(iteration)
        self.eta = float(eta)
        self.residual = float(residual)
        self.standard_error = float(standard_error)
        self.seed = seed
        self.converged = converged

    def __str__(self):
        return (f"SaddleState: iteration={self.iteration}, "
                f"residual={self.residual:.3e}, "
                f"se={self.standard_error:.3e}, eta={self.eta:.3g}, "
                f"converged={self.converged}")

    def dict(self) -> Dict:
        """
        Get a dict for checkpoints. Kernels are stored separately.
        :return: Dict representing the object.
        """
        return {
            "iteration": self.iteration,
            "eta": self.eta,
            "residual": self.residual,
            "standard_error": self.standard_error,
            "seed": self.seed,
            "converged": self.converged,
            "kernel": self.C.dict()
        }


class SamplerConfig:
    """
    How the tilted single-site expectations are estimated.
    """

    def __init__(self, method: str = "auto", n_samples: int = 10000,
                 n_batches: int = 4, step: float = 0.01, burn_in: int = 500,
                 n_chains: int = 100, seed: int = 0,
                 min_ess_fraction: float = 0.01):
        """
        :param method: importance, langevin, auto or analytic
        :param n_samples: samples per evaluation
        :param n_batches: independently seeded batches (importance)
        :param step: Langevin step size in units of the base covariance
        :param burn_in: Langevin burn-in steps per chain
        :param n_chains: parallel Langevin chains
        :param seed: master seed of all batches and chains
        :param min_ess_fraction: effective sample size floor of the weights
        :raises InvalidParameter: values out of range
        """
        method = str(method).lower()
        if method not in SAMPLER_METHODS:
            raise InvalidParameter(f"Unknown sampler method {method}! Use "
                                   f"one of {SAMPLER_METHODS}.")
        if n_samples < 1 or n_batches < 1 or n_chains < 1:
            raise InvalidParameter("Sample, batch and chain counts have to "
                                   "be >= 1!")
        if not step > 0 or burn_in < 0:
            raise InvalidParameter(f"Invalid Langevin settings step={step}, "
                                   f"burn_in={burn_in}!")
        self.method = method
        self.n_samples = int(n_samples)
        self.n_batches = int(n_batches)
        self.step = float(step)
        self.burn_in = int(burn_in)
        self.n_chains = int(n_chains)
        self.seed = int(seed)
        self.min_ess_fraction = float(min_ess_fraction)

    def replace(self, **changes) -> "SamplerConfig":
        values = self.dict()
        values.update(changes)
        return SamplerConfig(**values)

    def __str__(self):
        return (f"SamplerConfig: {self.method}, n_samples={self.n_samples}, "
                f"seed={self.seed}")

    def dict(self) -> Dict:
        return dict(vars(self))


class SaddleOptions:
    """
    Extragradient step control and stopping rule.
    """

    def __init__(self, eta: float = 0.05, eta_max: float = 0.5,
                 eta_min: float = 1e-4, tol: float = 1e-3,
                 max_iter: int = 2000, stall_window: int = 50,
                 kick_steps: int = 20, max_kicks: int = 3,
                 symmetry_breaking: float = 1e-3, growth: float = 1.02,
                 checkpoint_dir: Optional[str] = None,
                 checkpoint_every: int = 0):
        if not 0 < eta_min <= eta <= eta_max:
            raise InvalidParameter(f"Need 0 < eta_min <= eta <= eta_max, got "
                                   f"{eta_min}, {eta}, {eta_max}!")
        self.eta = float(eta)
        self.eta_max = float(eta_max)
        self.eta_min = float(eta_min)
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.stall_window = int(stall_window)
        self.kick_steps = int(kick_steps)
        self.max_kicks = int(max_kicks)
        self.symmetry_breaking = float(symmetry_breaking)
        self.growth = float(growth)
        self.checkpoint_dir = checkpoint_dir
        self.checkpoint_every = int(checkpoint_every)

    def replace(self, **changes) -> "SaddleOptions":
        values = self.dict()
        values.update(changes)
        return SaddleOptions(**values)

    def dict(self) -> Dict:
        return dict(vars(self))


class MomentEstimate:
    """
    Tilted-measure moments with entrywise standard errors. Unpacks to
    (H_eql, C_eql).
    """

    def __init__(self, H: Kernel, C: Kernel, H_se: np.ndarray,
                 C_se: np.ndarray, method: str, ess: float):
        self.H = H
        self.C = C
        self.H_se = H_se
        self.C_se = C_se
        self.method = method
        self.ess = ess

    @property
    def max_se(self) -> float:
        return float(max(np.max(self.H_se), np.max(self.C_se)))

    def __iter__(self):
        return iter((self.H, self.C))

    def __str__(self):
        return (f"MomentEstimate: {self.method}, ess={self.ess:.1f}, "
                f"max_se={self.max_se:.3e}")
