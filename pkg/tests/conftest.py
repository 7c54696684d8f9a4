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


import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.absolute()))

from KernelMFT.Structures.HyperParams import HyperParams  # noqa: E402
from KernelMFT.Structures.Kernel import Kernel  # noqa: E402
from KernelMFT.Structures.TimeGrid import TimeGrid  # noqa: E402
from KernelMFT.Tasks import endpoint_scalar_task  # noqa: E402


@pytest.fixture
def hyper():
    return HyperParams()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def endpoint4():
    """
    T=4 single-pattern endpoint task with y^2 = 8 (lambda = 8 at unit
    scales).
    """
    return endpoint_scalar_task(4, np.sqrt(8.0))


def random_pd(rng, n: int, shift: float = 1.0) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return A @ A.T / n + shift * np.eye(n)


def hidden_kernel(T: int, data, P: int = 1, supervised=None) -> Kernel:
    return Kernel(TimeGrid(T, supervised), P, data, "hidden")
