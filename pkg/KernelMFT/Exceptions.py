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

class KernelMFTError(Exception):
    """
    Simple exception for the kernel toolkit.

    Solver errors may carry the best-so-far result in ``report`` (linear
    solver) or ``state`` (saddle solver).
    """
    def __init__(self, msg, report=None, state=None):
        super().__init__(msg)
        self.msg = msg
        self.report = report
        self.state = state

    def __str__(self):
        return f"KernelMFT: {self.msg}"


class EmptySupervision(KernelMFTError):
    """
    Used when an operation needs at least one supervised timestep.
    """
    def __init__(self, msg="No supervised timesteps!"):
        super().__init__(msg)


class InvalidShape(KernelMFTError):
    """
    Used when tensors, kernels or grids do not fit together.
    """


class InvalidParameter(KernelMFTError):
    """
    Used for out-of-range scalar parameters.
    """


class SingularKernel(KernelMFTError):
    """
    Used when a kernel that has to be inverted is (numerically) singular.
    """


class DivergentPrior(KernelMFTError):
    """
    Used when the prior recursion exceeds the overflow bound.
    """


class MaxIterations(KernelMFTError):
    """
    Used when a solver runs out of iterations.
    """


class LineSearchFailure(KernelMFTError):
    """
    Used when the optimizer stops without reaching the tolerance.
    """


class NoRoot(KernelMFTError):
    """
    Used when a root bracket cannot be established.
    """


class SingularSystem(KernelMFTError):
    """
    Used when a perturbative linear system is singular.
    """


class DegenerateTilt(KernelMFTError):
    """
    Used when importance weights collapse or the tilted measure is not
    normalizable.
    """


class NonDecreasingResidual(KernelMFTError):
    """
    Used when the saddle residual stalls.
    """


class NumericOverflow(KernelMFTError):
    """
    Used when weight-space activity blows up.
    """


class DegenerateInput(KernelMFTError):
    """
    Used when a metric is undefined for its input.
    """


class ConfigError(KernelMFTError):
    """
    Used for invalid or unknown configuration entries.
    """
