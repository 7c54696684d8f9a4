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

import asyncio
import logging
import os
import sys
import time
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .Exceptions import ConfigError
from .Persistence import canonical_hash, load_rows, save_json, save_rows

# shorthand parameter names of the command line
ALIASES = {
    "lambda": lambda v: [f"landau.lambdas=[{v}]"],
    "N": lambda v: [f"hyper.N={v}"],
    "kappa": lambda v: [f"hyper.kappa={v}"],
    "T": lambda v: [f"task.T={v}"],
}


def overrides_for(param: str, value) -> List[str]:
    """
    The --set overrides of one sweep point.
    :param param: alias or dotted settings key
    :param value: the value
    """
    if param in ALIASES:
        return ALIASES[param](value)
    if "." not in param:
        raise ConfigError(f"Unknown sweep parameter {param}! Use one of "
                          f"{sorted(ALIASES)} or a dotted key.")
    return [f"{param}={value}"]


def _sort_key(result):
    try:
        return 0, float(result[0]), ""
    except ValueError:
        return 1, 0.0, str(result[0])


class Sweep:
    """
    Run one experiment per parameter value in separate processes and merge
    their metrics.
    """

    def __init__(self, runner: Path, config: str, param: str,
                 values: Sequence, out_dir: Path, extra_sets=(),
                 parallel: int = 1, timeout: float = 3600.0):
        """
        :param runner: path of the run script
        :param config: settings file of every run
        :param param: swept parameter
        :param values: its values
        :param out_dir: sweep directory, one subdirectory per value
        :param extra_sets: overrides shared by all runs
        :param parallel: concurrent processes
        :param timeout: seconds per run before it is killed

        :raises ConfigError: no values or unknown parameter
        """
        if not values:
            raise ConfigError("Sweep without values!")
        if parallel < 1:
            raise ConfigError(f"parallel has to be >= 1, got {parallel}!")
        # fail early on unknown parameters
        overrides_for(param, values[0])
        self.runner = runner
        self.config = config
        self.param = param
        self.values = list(values)
        self.out_dir = out_dir
        self.extra_sets = list(extra_sets)
        self.parallel = parallel
        self.timeout = timeout

    def run_dir(self, value) -> Path:
        return self.out_dir / f"{self.param}_{value}"

    def command(self, value) -> List[str]:
        # children log to stdout only, the sweep captures it
        args = [sys.executable, str(self.runner), "--disable-log-file",
                "run", self.config]
        for entry in self.extra_sets + overrides_for(self.param, value):
            args += ["--set", entry]
        return args + ["--out", str(self.run_dir(value))]

    async def _run_one(self, value, semaphore: asyncio.Semaphore) \
            -> Tuple[object, int]:
        async with semaphore:
            logging.info("Starting sweep run %s=%s", self.param, value)
            proc = await asyncio.create_subprocess_exec(
                *self.command(value),
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.STDOUT
            )
            deadline = time.monotonic() + self.timeout
            while True:
                try:
                    line = await asyncio.wait_for(
                        proc.stdout.readline(),
                        max(deadline - time.monotonic(), 0.0))
                except asyncio.TimeoutError:
                    proc.kill()
                    await proc.wait()
                    logging.error("Sweep run %s=%s timed out after %ss!",
                                  self.param, value, self.timeout)
                    return value, -1
                if not line:
                    break
                logging.debug("[%s=%s] %s", self.param, value,
                              line.decode().rstrip())
            returncode = await proc.wait()
            if returncode:
                logging.warning("Sweep run %s=%s exited with %s", self.param,
                                value, returncode)
            return value, returncode

    async def _run_all(self) -> List[Tuple[object, int]]:
        semaphore = asyncio.Semaphore(self.parallel)
        return await asyncio.gather(*(self._run_one(v, semaphore)
                                      for v in self.values))

    def merge(self, results: List[Tuple[object, int]]) -> List[Dict]:
        """
        Collect the metrics of all runs sorted by the swept value.
        """
        rows = []
        for value, _ in sorted(results, key=_sort_key):
            path = self.run_dir(value) / "metrics.csv"
            if not os.path.exists(path):
                continue
            for row in load_rows(str(path)):
                row[self.param] = value
                rows.append(row)
        return rows

    def run(self) -> int:
        """
        :return: 0 if every run succeeded, 1 otherwise
        """
        os.makedirs(self.out_dir, exist_ok=True)
        start = time.time()
        loop = asyncio.get_event_loop()
        results = loop.run_until_complete(self._run_all())

        rows = self.merge(results)
        if rows:
            save_rows(rows, str(self.out_dir / "sweep.csv"),
                      [self.param] + [k for k in rows[0] if k != self.param])
        runs = [{"value": value, "dir": str(self.run_dir(value)),
                 "returncode": code} for value, code in results]
        manifest = {"param": self.param, "values": self.values,
                    "config": self.config, "sets": self.extra_sets}
        manifest["sha256"] = canonical_hash(manifest)
        manifest.update({"runs": runs, "wall_time": time.time() - start})
        save_json(manifest, str(self.out_dir / "sweep_manifest.json"))

        failed = [r["value"] for r in runs if r["returncode"] != 0]
        if failed:
            logging.error("Sweep runs failed for %s in %s", self.param, failed)
            return 1
        logging.info("Sweep over %s finished: %s runs", self.param, len(runs))
        return 0
