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

from typing import Dict, List, Optional

import numpy as np

from .ArchMask import ArchMask
from .Kernel import Kernel
from ..Exceptions import InvalidParameter, InvalidShape


class WeightState:
    """
    Read-in U (N x D), recurrent matrices W and readout V (1 x N).

    The RNN holds a single W, the DNN one W^(t) per hidden transition. The
    generator driving the Langevin noise travels with the weights.
    """

    def __init__(self, U: np.ndarray, W: List[np.ndarray], V: np.ndarray,
                 arch: ArchMask, rng_seed: int = 0,
                 rng: Optional[np.random.Generator] = None):
        N = U.shape[0]
        if V.shape != (1, N) or any(Wt.shape != (N, N) for Wt in W):
            raise InvalidShape(f"Inconsistent weight shapes for N={N}!")
        if arch is ArchMask.RNN and len(W) != 1:
            raise InvalidShape(f"An RNN holds one recurrent matrix, "
                               f"got {len(W)}!")
        self.U = U
        self.W = list(W)
        self.V = V
        self.arch = arch
        self.rng_seed = rng_seed
        self.rng = rng if rng is not None else np.random.default_rng(rng_seed)

    @property
    def N(self) -> int:
        return self.U.shape[0]

    def layer(self, i: int) -> np.ndarray:
        """
        Matrix mapping hidden index i to i+1.
        """
        return self.W[0] if self.arch is ArchMask.RNN else self.W[i]

    def __str__(self):
        return (f"WeightState: {self.arch}, N={self.N}, D={self.U.shape[1]}, "
                f"layers={len(self.W)}")


class SGLDConfig:
    """
    Euler-Maruyama discretization of the Langevin dynamics.
    """

    def __init__(self, ds: float = 1e-3, n_steps: int = 20000,
                 burn_in: Optional[int] = None,
                 burn_in_fraction: float = 0.5, thin: int = 10,
                 seed: int = 0, tie_layers: bool = False,
                 overflow_bound: float = 1e6,
                 stationarity_threshold: float = 0.05):
        """
        :param ds: step size in intensive time
        :param n_steps: total steps
        :param burn_in: discarded steps, burn_in_fraction * n_steps if None
        :param burn_in_fraction: default burn-in share
        :param thin: stride between recorded samples
        :param seed: seed of initialization and noise
        :param tie_layers: DNN only, sum layer gradients and share noise
        :param overflow_bound: largest admissible |h|
        :param stationarity_threshold: relative two-window loss difference
        :raises InvalidParameter: values out of range
        """
        if not ds > 0:
            raise InvalidParameter(f"ds has to be > 0, got {ds}!")
        if n_steps < 1 or thin < 1:
            raise InvalidParameter(f"n_steps and thin have to be >= 1, got "
                                   f"{n_steps}, {thin}!")
        if burn_in is None:
            burn_in = int(burn_in_fraction * n_steps)
        if not 0 <= burn_in < n_steps:
            raise InvalidParameter(f"burn_in has to be in [0, {n_steps}), "
                                   f"got {burn_in}!")
        self.ds = float(ds)
        self.n_steps = int(n_steps)
        self.burn_in = int(burn_in)
        self.thin = int(thin)
        self.seed = int(seed)
        self.tie_layers = bool(tie_layers)
        self.overflow_bound = float(overflow_bound)
        self.stationarity_threshold = float(stationarity_threshold)

    def replace(self, **changes) -> "SGLDConfig":
        values = self.dict()
        values.update(changes)
        return SGLDConfig(**values)

    def __str__(self):
        return (f"SGLDConfig: ds={self.ds}, n_steps={self.n_steps}, "
                f"burn_in={self.burn_in}, thin={self.thin}, seed={self.seed}")

    def dict(self) -> Dict:
        return dict(vars(self))


class Measurement:
    """
    Posterior averages of a weight-space run.
    """

    def __init__(self, C_exp: Kernel, H_exp: Kernel, f_samples: np.ndarray,
                 losses: np.ndarray, weight_variances: Dict[str, float],
                 stationary: bool, seed: int):
        self.C_exp = C_exp
        self.H_exp = H_exp
        self.f_samples = f_samples
        self.losses = losses
        self.weight_variances = weight_variances
        self.stationary = stationary
        self.seed = seed

    @property
    def n_samples(self) -> int:
        return self.f_samples.shape[0]

    @property
    def f_mean(self) -> np.ndarray:
        return self.f_samples.mean(axis=0)

    def __str__(self):
        return (f"Measurement: samples={self.n_samples}, "
                f"final loss={self.losses[-1]:.4g}, "
                f"stationary={self.stationary}")

    def dict(self) -> Dict:
        return {
            "seed": self.seed,
            "n_samples": self.n_samples,
            "stationary": self.stationary,
            "weight_variances": self.weight_variances,
            "final_loss": float(self.losses[-1])
        }
