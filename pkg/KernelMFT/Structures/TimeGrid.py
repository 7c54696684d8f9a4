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

from typing import Dict, Iterable, Optional, Tuple

from ..Exceptions import InvalidParameter, InvalidShape

TIME_RANGES = ("input", "hidden", "output")


class TimeGrid:
    """
    The unrolled time axis of a network with T timesteps.

    Inputs live on 0..T-2, hidden states on 1..T-1 and outputs on 2..T.
    All three ranges have T-1 entries.
    """

    def __init__(self, T_total: int,
                 supervised: Optional[Iterable[int]] = None):
        """
        Init a new grid.
        :param T_total: number of timesteps T (>= 2)
        :param supervised: supervised output times, all output times if None
        :raises InvalidParameter: T_total < 2
        :raises InvalidShape: supervised time outside the output range
        """
        if int(T_total) != T_total or T_total < 2:
            raise InvalidParameter(f"T_total has to be an integer >= 2, "
                                   f"got {T_total}!")
        self.T_total = int(T_total)

        if supervised is None:
            supervised = self.output_times
        supervised = tuple(sorted({int(t) for t in supervised}))
        outside = [t for t in supervised if t not in self.output_times]
        if outside:
            raise InvalidShape(f"Supervised times {outside} are not output "
                               f"times of a T={self.T_total} grid!")
        self.supervised: Tuple[int, ...] = supervised

    @property
    def T_minus(self) -> int:
        return self.T_total - 1

    @property
    def hidden_times(self) -> range:
        return range(1, self.T_total)

    @property
    def output_times(self) -> range:
        return range(2, self.T_total + 1)

    @property
    def input_times(self) -> range:
        return range(0, self.T_total - 1)

    @property
    def unsupervised(self) -> Tuple[int, ...]:
        return tuple(t for t in self.output_times if t not in self.supervised)

    @property
    def supervised_hidden(self) -> Tuple[int, ...]:
        """
        Hidden times whose readout is supervised (output time t reads h^{t-1}).
        """
        return tuple(t - 1 for t in self.supervised)

    def times(self, time_range: str) -> range:
        """
        Get the time indices of one of the three ranges.
        :param time_range: "input", "hidden" or "output"
        :return: the range
        """
        if time_range == "hidden":
            return self.hidden_times
        if time_range == "output":
            return self.output_times
        if time_range == "input":
            return self.input_times
        raise InvalidParameter(f"Unknown time range {time_range}!")

    def with_supervised(self, supervised: Iterable[int]) -> "TimeGrid":
        return TimeGrid(self.T_total, supervised)

    def __eq__(self, other):
        if not isinstance(other, TimeGrid):
            return NotImplemented
        return (self.T_total == other.T_total
                and self.supervised == other.supervised)

    def __hash__(self):
        return hash((self.T_total, self.supervised))

    def __str__(self):
        return (f"TimeGrid: T={self.T_total}, "
                f"supervised={list(self.supervised)}")

    def dict(self) -> Dict:
        """
        Get a dict for data backups.
        :return: Dict representing the object.
        """
        return {
            "T_total": self.T_total,
            "supervised": list(self.supervised)
        }
