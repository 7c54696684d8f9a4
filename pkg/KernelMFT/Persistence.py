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
CSV and JSON backups of kernels, reports, checkpoints and tables. Every
file is written to a temporary sibling first and renamed into place.
"""

import csv
import hashlib
import logging
import os
import tempfile
from contextlib import contextmanager
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import simplejson as json

from .Exceptions import InvalidShape
from .Structures.Kernel import Kernel
from .Structures.PredictorResult import PredictorResult
from .Structures.Reports import SolveReport
from .Structures.Saddle import SaddleState
from .Structures.Task import Task
from .Structures.TimeGrid import TimeGrid


@contextmanager
def atomic_open(path: str, mode: str = "w"):
    """
    Open a temporary file next to path and move it over path on success.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_",
                                    suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode, newline="" if "b" not in mode else None) \
                as fp:
            yield fp
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def save_json(data, path: str):
    with atomic_open(path) as fp:
        json.dump(data, fp, indent=2, ignore_nan=True)
    logging.debug("Successfully saved %s", path)


def load_json(path: str):
    with open(path, "r") as fp:
        return json.load(fp)


def canonical_hash(data) -> str:
    """
    SHA-256 of the canonical JSON encoding (sorted keys, no whitespace).
    """
    text = json.dumps(data, sort_keys=True, separators=(",", ":"),
                      ignore_nan=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def save_rows(rows: Sequence[Dict], path: str,
              fieldnames: Optional[List[str]] = None):
    """
    Write dict rows as CSV. Columns default to the keys of the first row.
    """
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    with atomic_open(path) as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames,
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    logging.debug("Successfully saved %d rows to %s", len(rows), path)


def load_rows(path: str) -> List[Dict]:
    with open(path, "r", newline="") as f:
        return list(csv.DictReader(f))


def _sidecar(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def save_kernel(K: Kernel, path: str, provenance: Optional[Dict] = None) \
        -> str:
    """
    Kernel CSV with a one-line header plus a JSON sidecar holding the index
    space and provenance.
    :param K: the kernel
    :param path: target .csv path
    :param provenance: extra metadata for the sidecar
    :return: the path
    """
    with atomic_open(path) as f:
        f.write(f"# time_range={K.time_range},T={K.grid.T_total},P={K.P}\n")
        writer = csv.writer(f)
        for row in K.data:
            writer.writerow([repr(float(x)) for x in row])

    meta = K.dict()
    meta["provenance"] = dict(provenance or {})
    save_json(meta, _sidecar(path))
    return path


def save_matrix(data: np.ndarray, like: Kernel, path: str) -> str:
    """
    A symmetric matrix on the index space of a kernel (e.g. C_tilde).
    """
    return save_kernel(like.with_data(data), path)


def load_kernel(path: str) -> Kernel:
    """
    Load a kernel written by save_kernel.
    :raises InvalidShape: malformed header or data
    """
    with open(path, "r", newline="") as f:
        header = f.readline().strip()
        if not header.startswith("#"):
            raise InvalidShape(f"{path} has no kernel header!")
        fields = dict(item.split("=", 1)
                      for item in header.lstrip("# ").split(","))
        data = np.array([[float(x) for x in row] for row in csv.reader(f)
                         if row])

    meta = {}
    if os.path.exists(_sidecar(path)):
        meta = load_json(_sidecar(path))
    supervised = meta.get("grid", {}).get("supervised")
    grid = TimeGrid(int(fields["T"]), supervised)
    return Kernel(grid, int(fields["P"]), data, fields["time_range"],
                  meta.get("times"))


def save_task_manifest(task: Task, path: str):
    save_json(task.dict(), path)


def save_solve_report(report: SolveReport, directory: str,
                      name: str = "H_star") -> str:
    """
    The report JSON plus the kernel CSV it points to.
    :return: path of the JSON
    """
    report.kernel_path = save_kernel(report.H_star,
                                     os.path.join(directory, f"{name}.csv"),
                                     {"objective": report.objective_value})
    path = os.path.join(directory, f"{name}_report.json")
    save_json(report.dict(), path)
    return path


def save_saddle_checkpoint(state: SaddleState, directory: str):
    """
    C, C_tilde and the scalar state for resuming solve_saddle.
    """
    os.makedirs(directory, exist_ok=True)
    save_kernel(state.C, os.path.join(directory, "C.csv"))
    save_matrix(state.C_tilde, state.C, os.path.join(directory,
                                                     "C_tilde.csv"))
    save_json(state.dict(), os.path.join(directory, "checkpoint.json"))
    logging.debug("Saddle checkpoint at iteration %s saved to %s",
                  state.iteration, directory)


def load_saddle_checkpoint(directory: str) -> SaddleState:
    meta = load_json(os.path.join(directory, "checkpoint.json"))
    C = load_kernel(os.path.join(directory, "C.csv"))
    C_tilde = load_kernel(os.path.join(directory, "C_tilde.csv")).data
    return SaddleState(C, C_tilde, iteration=meta["iteration"],
                       eta=meta["eta"], residual=meta["residual"],
                       standard_error=meta["standard_error"],
                       seed=meta["seed"], converged=meta["converged"])


def save_training_log(losses: Iterable[float], path: str,
                      snapshots: Optional[Dict[int, str]] = None,
                      every: int = 1):
    """
    CSV (step, loss, snapshot_id); snapshot ids map steps to kernel files.
    """
    snapshots = snapshots or {}
    rows = [{"step": i * every, "loss": loss,
             "snapshot_id": snapshots.get(i * every, "")}
            for i, loss in enumerate(losses)]
    save_rows(rows, path, ["step", "loss", "snapshot_id"])


def save_predictor(result: PredictorResult, path: str):
    save_rows(result.rows(), path, ["time", "pattern", "y", "f",
                                    "supervised", "squared_error"])
