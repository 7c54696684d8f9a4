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
Kernel algebra on the joint (time, pattern) index space: time shifts,
architecture masking, supervised restriction and PSD projection.
"""

from typing import Callable, List, Sequence

import numpy as np
from scipy import linalg

from .Exceptions import EmptySupervision, InvalidShape, SingularKernel
from .Structures.ArchMask import ArchMask
from .Structures.Kernel import Kernel
from .Structures.TimeGrid import TimeGrid


def symmetrize(data: np.ndarray) -> np.ndarray:
    return 0.5 * (data + data.T)


def shift_matrix(n_times: int, P: int) -> np.ndarray:
    """
    S with (S A S^T)^{tt'} = A^{t-1,t'-1} on a contiguous range, zero-filled
    at the first time.
    """
    return np.kron(np.eye(n_times, k=-1), np.eye(P))


def _time_map(times: Sequence[int], P: int, offset: int) -> np.ndarray:
    # row (t, p) picks column (t + offset, p) if that time exists
    n = len(times)
    S = np.zeros((n, n))
    for i, t in enumerate(times):
        if t + offset in times:
            S[i, times.index(t + offset)] = 1.0
    return np.kron(S, np.eye(P))


def shift_minus(K: Kernel) -> Kernel:
    """
    Re-index K so that entry (t, t') reads K^{t-1,t'-1}. Entries that would
    read before the first time of K are zero.
    :param K: kernel on any time range
    :return: shifted kernel on the same times
    """
    S = _time_map(list(K.times), K.P, -1)
    return K.with_data(S @ K.data @ S.T)


def shift_plus(K: Kernel) -> Kernel:
    """
    Re-index K so that entry (t, t') reads K^{t+1,t'+1}, zero past the end.
    """
    S = _time_map(list(K.times), K.P, +1)
    return K.with_data(S @ K.data @ S.T)


def apply_mask(mask: ArchMask, K: Kernel) -> Kernel:
    return K.with_data(mask.project(K.data, K.P))


def supervised_indices(K: Kernel, grid: TimeGrid) -> np.ndarray:
    """
    Flat indices of K that belong to supervised timesteps. On the hidden
    range the supervised output time t maps to hidden time t-1.
    :raises EmptySupervision: no supervised times
    :raises InvalidShape: K lives on the input range
    """
    if not grid.supervised:
        raise EmptySupervision()
    if K.time_range == "output":
        times = grid.supervised
    elif K.time_range == "hidden":
        times = grid.supervised_hidden
    else:
        raise InvalidShape("Input-range kernels have no supervised times!")
    return np.array([K.index(t, p) for t in times for p in range(K.P)],
                    dtype=int)


def restrict_supervised(K: Kernel, grid: TimeGrid) -> Kernel:
    """
    Principal submatrix of K on the supervised timesteps.
    :param K: kernel on the output or hidden range
    :param grid: grid carrying the supervised set
    :return: restricted kernel
    :raises EmptySupervision: supervised set empty
    """
    idx = supervised_indices(K, grid)
    times = sorted({K.unflatten(i)[0] for i in idx[::K.P]})
    return Kernel(K.grid, K.P, K.data[np.ix_(idx, idx)], K.time_range, times)


def psd_clip(data: np.ndarray, floor: float) -> np.ndarray:
    """
    Clip the eigenvalues of a symmetric matrix from below.
    """
    eig, vec = np.linalg.eigh(symmetrize(np.asarray(data, dtype=float)))
    if eig.size and eig.min() >= floor:
        return symmetrize(np.asarray(data, dtype=float))
    eig = np.maximum(eig, floor)
    return symmetrize((vec * eig) @ vec.T)


def project_psd(K: Kernel, floor: float = 1e-10) -> Kernel:
    return K.with_data(psd_clip(K.data, floor))


def pd_inverse(data: np.ndarray, what: str = "kernel") -> np.ndarray:
    """
    Inverse of a symmetric positive definite matrix via Cholesky.
    :raises SingularKernel: matrix not numerically PD
    """
    try:
        factor = linalg.cho_factor(data, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        raise SingularKernel(f"{what} is not positive definite!")
    return symmetrize(linalg.cho_solve(factor, np.eye(data.shape[0])))


def pd_logdet(data: np.ndarray, what: str = "kernel",
              floor: float = 1e-300) -> float:
    """
    log det of a symmetric positive definite matrix.
    :raises SingularKernel: not PD or determinant below the floor
    """
    try:
        chol = linalg.cholesky(data, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        raise SingularKernel(f"{what} is not positive definite!")
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    if logdet < np.log(floor):
        raise SingularKernel(f"det({what}) = exp({logdet:.1f}) is below the "
                             f"floor {floor:.1e}!")
    return logdet


class KernelSeries:
    """
    Truncated power series A_0 + A_1 s + ... + A_K s^K of square matrices.

    Supports the operations the stationarity conditions are built from, so
    one formula yields values, directional derivatives and perturbative
    orders alike. Plain arrays act as constants.
    """
    __array_ufunc__ = None

    def __init__(self, coefs: Sequence[np.ndarray]):
        self.coefs: List[np.ndarray] = [np.asarray(c, dtype=float)
                                        for c in coefs]

    @property
    def order(self) -> int:
        return len(self.coefs) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        return self.coefs[k]

    def _zero(self) -> np.ndarray:
        return np.zeros_like(self.coefs[0])

    def _lift(self, other) -> "KernelSeries":
        if isinstance(other, KernelSeries):
            return other
        const = self._zero() + other
        return KernelSeries([const] + [self._zero()] * self.order)

    def __add__(self, other):
        other = self._lift(other)
        return KernelSeries([a + b for a, b in zip(self.coefs, other.coefs)])

    __radd__ = __add__

    def __neg__(self):
        return KernelSeries([-c for c in self.coefs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, scalar):
        if isinstance(scalar, (KernelSeries, np.ndarray)):
            return NotImplemented
        return KernelSeries([scalar * c for c in self.coefs])

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, KernelSeries):
            return KernelSeries([c @ other for c in self.coefs])
        out = []
        for k in range(self.order + 1):
            out.append(sum(self.coefs[j] @ other.coefs[k - j]
                           for j in range(k + 1)))
        return KernelSeries(out)

    def __rmatmul__(self, other):
        return KernelSeries([other @ c for c in self.coefs])

    @property
    def T(self) -> "KernelSeries":
        return KernelSeries([c.T for c in self.coefs])

    def map(self, func: Callable[[np.ndarray], np.ndarray]) -> "KernelSeries":
        """
        Apply a linear map coefficient by coefficient.
        """
        return KernelSeries([func(c) for c in self.coefs])

    def inv(self, inverse: Callable[[np.ndarray], np.ndarray] = pd_inverse) \
            -> "KernelSeries":
        """
        Series inverse: B_0 = A_0^-1, B_k = -B_0 sum_{j=1..k} A_j B_{k-j}.
        """
        b0 = inverse(self.coefs[0])
        out = [b0]
        for k in range(1, self.order + 1):
            acc = sum(self.coefs[j] @ out[k - j] for j in range(1, k + 1))
            out.append(-b0 @ acc)
        return KernelSeries(out)
