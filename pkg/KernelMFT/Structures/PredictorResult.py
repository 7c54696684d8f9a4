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

from typing import Dict, List

import numpy as np

from .TimeGrid import TimeGrid


class PredictorResult:
    """
    Mean predictor over all output times and patterns with its loss.
    """

    def __init__(self, grid: TimeGrid, y: np.ndarray, f: np.ndarray,
                 per_time_loss: np.ndarray):
        """
        :param grid: time grid with the supervised set
        :param y: labels (output_time, pattern)
        :param f: predictions (output_time, pattern)
        :param per_time_loss: 1/2 mean_p (y - f)^2 per output time
        """
        self.grid = grid
        self.y = np.asarray(y, dtype=float)
        self.f = np.asarray(f, dtype=float)
        self.per_time_loss = np.asarray(per_time_loss, dtype=float)
        self.loss = float(np.mean(self.per_time_loss))

    def loss_on(self, times) -> float:
        """
        Mean loss over a subset of output times (nan if empty).
        """
        rows = [t - 2 for t in times]
        if not rows:
            return float("nan")
        return float(np.mean(self.per_time_loss[rows]))

    @property
    def unsupervised_loss(self) -> float:
        return self.loss_on(self.grid.unsupervised)

    def rows(self) -> List[Dict]:
        """
        One row per (time, pattern) for the CSV backup.
        """
        out = []
        for i, t in enumerate(self.grid.output_times):
            for p in range(self.f.shape[1]):
                out.append({
                    "time": t,
                    "pattern": p,
                    "y": float(self.y[i, p]),
                    "f": float(self.f[i, p]),
                    "supervised": t in self.grid.supervised,
                    "squared_error": float((self.y[i, p] - self.f[i, p]) ** 2)
                })
        return out

    def __str__(self):
        return (f"PredictorResult: loss={self.loss:.6g}, "
                f"unsupervised={self.unsupervised_loss:.6g}")

    def dict(self) -> Dict:
        return {
            "loss": self.loss,
            "per_time_loss": self.per_time_loss.tolist(),
            "f": self.f.tolist()
        }
