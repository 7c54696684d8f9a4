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

import hashlib
import logging
import math
import os
import platform
import time
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from dynaconf import Dynaconf

from .Exceptions import ConfigError, KernelMFTError
from .Inference import autocorrelation, cka, endpoint_predictor, \
    sequence_predictor
from .Landau import critical_lambda, diagonal_foc_solve, order_parameter, \
    quadratic_coefficient
from .LinearMFT import LinearObjective, solve_map, symmetry_broken
from .NNGP import nngp_kernel, nngp_residual
from .NonlinearMFT import SaddleProblem, initial_state, solve_saddle
from .Perturbation import delta1, delta2, expansion_error, propagators
from .Persistence import canonical_hash, save_json, save_kernel, \
    save_predictor, save_rows, save_solve_report, save_task_manifest, \
    save_training_log
from .SGLD import train_and_measure
from .Structures.Activation import Activation
from .Structures.ArchMask import ArchMask
from .Structures.HyperParams import HyperParams
from .Structures.Kernel import Kernel
from .Structures.Reports import SolverOptions
from .Structures.Saddle import SaddleOptions, SamplerConfig
from .Structures.Task import Task
from .Structures.Weights import SGLDConfig
from .Tasks import endpoint_classification, endpoint_scalar_task, \
    label_for_lambda, scale_labels, sinusoid_task, spread_supervision, \
    teacher_kernel, teacher_rotation_task

SECTIONS = ("general", "task", "model", "hyper", "solver", "saddle",
            "sampler", "sgld", "landau", "perturbation")

METRIC_FIELDS = ["experiment", "metric", "arch", "param", "value", "status"]


def lower_keys(data):
    """
    Recursively lowercase the keys of a (dynaconf) mapping.
    """
    if isinstance(data, dict):
        return {str(k).lower(): lower_keys(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [lower_keys(v) for v in data]
    return data


class KernelMFT:
    """
    The main class of the KernelMFT project.
    Runs one configured experiment and writes its artifacts.
    """
    EXPERIMENTS = ("fig2_sinusoid", "fig3_endpoint", "fig4_sequence",
                   "landau_sweep", "perturbation_check", "nngp_check")

    def __init__(self, settings: Dynaconf, project_dir: Path,
                 out_dir: Optional[str] = None):
        """
        Init KernelMFT
        :param settings: dynaconf settings
        :param project_dir: main project directory (absolute path)
        :param out_dir: run directory, overrides general.output_dir/run_id

        :raises ConfigError: unknown experiment or invalid section values
        """
        self.settings = settings
        self.config = self.resolved_config(settings)
        general = self.config["general"]

        self.experiment = general["experiment"]
        if self.experiment not in KernelMFT.EXPERIMENTS:
            raise ConfigError(f"Unknown experiment {self.experiment}!")
        self.seed = int(self.config["seed"])
        self.seeds = [int(s) for s in np.random.SeedSequence(
            self.seed).generate_state(int(general["n_seeds"]))]

        # setup the directory structure
        self._path_project_dir = project_dir
        self.run_id = general["run_id"] or self.experiment
        if out_dir:
            self.path_run_dir = self._get_correct_path(out_dir)
        else:
            self.path_run_dir = self._get_correct_path(
                general["output_dir"]) / self.run_id
        self.path_kernel_dir = self.path_run_dir / "kernels"

        task = self.config["task"]
        self.T = int(task["t"])
        try:
            self.act = Activation(self.config["model"]["activation"])
            self.mask = ArchMask.from_name(self.config["model"]["arch"])
            hyper = self.config["hyper"]
            self.hyper = HyperParams(u=hyper["u"], w=hyper["w"],
                                     v=hyper["v"], kappa=hyper["kappa"],
                                     N=hyper["n"])
            self.solver_opts = SolverOptions(**self.config["solver"])
            self.saddle_opts = SaddleOptions(**self.config["saddle"])
            self.sampler = SamplerConfig(seed=self.seed,
                                         **self.config["sampler"])
        except (KernelMFTError, KeyError, TypeError) as e:
            raise ConfigError(f"Invalid configuration: {e}")

        sgld = self.config["sgld"]
        self.sgld_enable = bool(sgld["enable"])
        self.sgld_widths = [int(n) for n in sgld["widths"]]
        self.sgld_kappa = float(sgld["kappa"])

        self.metrics: List[Dict] = []
        self.errors: List[Dict] = []

    @staticmethod
    def resolved_config(settings: Dynaconf) -> Dict:
        """
        The experiment-relevant part of the settings as a plain dict.
        """
        data = lower_keys(settings.as_dict())
        config = {section: data.get(section, {}) for section in SECTIONS}
        config["seed"] = data.get("seed", 0)
        return config

    def _get_correct_path(self, path_str: str) -> Path:
        """
        Convert the given path to an absolute path if it is relative.
        :param path_str: Absolute or relative path.
        :return: The new absolute path.
        """
        path = Path(path_str)
        if path.is_absolute():
            return path
        return self._path_project_dir / path

    # bookkeeping
    def _metric(self, metric: str, value, arch: str = "", param="",
                status: str = "ok"):
        self.metrics.append({"experiment": self.experiment,
                             "metric": metric, "arch": arch,
                             "param": param, "value": value,
                             "status": status})

    def _attempt(self, what: str, func, *args, arch: str = "", param="",
                 **kwargs):
        """
        Run func, recording a KernelMFTError as failed sub-run.
        :return: func's result or None on failure
        """
        try:
            return func(*args, **kwargs)
        except KernelMFTError as e:
            logging.error("%s (%s %s) failed: %s", what, arch, param, e)
            report = e.report.dict() if e.report is not None else None
            state = e.state.dict() if e.state is not None else None
            self.errors.append({"what": what, "arch": arch, "param": param,
                                "error": type(e).__name__, "message": e.msg,
                                "report": report, "state": state})
            self._metric(what, float("nan"), arch, param, status="failed")
            return None

    def _kernel_path(self, name: str) -> str:
        return str(self.path_kernel_dir / f"{name}.csv")

    def _save_kernel(self, K: Kernel, name: str, **provenance):
        provenance.update({"experiment": self.experiment,
                           "run_id": self.run_id})
        save_kernel(K, self._kernel_path(name), provenance)

    def _sgld_hyper(self, N: Optional[int] = None) -> HyperParams:
        kappa = self.hyper.kappa if self.hyper.kappa > 0 else self.sgld_kappa
        return self.hyper.replace(kappa=kappa, N=N or self.hyper.N)

    def _sgld_config(self, seed: int) -> SGLDConfig:
        sgld = self.config["sgld"]
        return SGLDConfig(ds=sgld["ds"], n_steps=sgld["n_steps"],
                          burn_in_fraction=sgld["burn_in_fraction"],
                          thin=sgld["thin"], seed=seed,
                          tie_layers=sgld["tie_layers"])

    def _teacher_task(self, supervised) -> Task:
        task = self.config["task"]
        return teacher_rotation_task(self.T, float(task["dphi"]),
                                     float(task["phi0"]), supervised)

    def theory(self, task: Task, hyper: HyperParams, mask: ArchMask,
               name: str, act: Optional[Activation] = None) \
            -> Tuple[Kernel, Kernel]:
        """
        Solve the kernel theory for a task: the MAP kernel for linear
        activations, the saddle point otherwise.
        :return: (H, C) on the hidden range
        """
        act = act or self.act
        if act.is_linear:
            obj = LinearObjective.from_task(task, hyper, mask,
                                            self.solver_opts)
            H0, _ = nngp_kernel(task, hyper, act, mask,
                                self.config["general"]["overflow_bound"])
            init = symmetry_broken(H0, self.solver_opts.symmetry_breaking)
            report = solve_map(obj, init, self.solver_opts)
            save_solve_report(report, str(self.path_kernel_dir), name)
            return report.H_star, report.H_star

        problem = SaddleProblem(task, hyper, act, mask)
        init = initial_state(problem, self.solver_opts.symmetry_breaking)
        opts = self.saddle_opts.replace(
            checkpoint_dir=str(self.path_kernel_dir / f"{name}_ckpt"))
        state = solve_saddle(problem, init, opts, self.sampler)
        self._save_kernel(state.C, f"{name}_C", arch=str(mask))
        self._save_kernel(state.H_eql, f"{name}_H", arch=str(mask))
        return state.H_eql, state.C

    # experiments
    def nngp_check(self):
        """
        Prior kernels for both architectures, fixed-point residuals and the
        closed-form versus quadrature moment gap.
        """
        task = sinusoid_task(max(self.T, 3))
        save_task_manifest(task, str(self.path_run_dir / "task.json"))
        bound = self.config["general"]["overflow_bound"]
        priors = {}
        for mask in ArchMask:
            result = self._attempt("nngp_kernel", nngp_kernel, task,
                                   self.hyper, self.act, mask, bound,
                                   arch=str(mask))
            if result is None:
                continue
            H0, C0 = result
            priors[mask] = result
            self._metric("nngp_residual",
                         nngp_residual(H0, C0, task, self.hyper, mask),
                         str(mask))
            self._save_kernel(H0, f"H0_{mask}", arch=str(mask))
            self._save_kernel(C0, f"C0_{mask}", arch=str(mask))

        if len(priors) == 2:
            gap = np.max(np.abs(priors[ArchMask.RNN][0].data
                                - priors[ArchMask.DNN][0].data))
            self._metric("mask_gap", float(gap))
        if ArchMask.RNN in priors:
            H0, C0 = priors[ArchMask.RNN]
            quadrature = self.act.gaussian_moment_quadrature(H0.data)
            self._metric("quadrature_gap",
                         float(np.max(np.abs(quadrature - C0.data))))
            save_rows([{"time": t, "H0": H0.entry(t, t), "C0": C0.entry(t, t)}
                       for t in task.grid.hidden_times],
                      str(self.path_run_dir / "nngp_diag.csv"))

    def fig2_sinusoid(self):
        """
        Theory kernel of the sinusoid task, its autocorrelation and, with
        SGLD enabled, the alignment of weight-space kernels over widths.
        """
        task = sinusoid_task(self.T)
        save_task_manifest(task, str(self.path_run_dir / "task.json"))
        hyper = self._sgld_hyper() if self.sgld_enable else self.hyper
        result = self._attempt("theory", self.theory, task, hyper, self.mask,
                               "sinusoid", arch=str(self.mask))
        if result is None:
            return
        _, C_theory = result
        lags = {"theory": autocorrelation(C_theory)}

        cka_rows = []
        for N in (self.sgld_widths if self.sgld_enable else []):
            values, last_ok = [], None
            for seed in self.seeds:
                measurement = self._attempt(
                    "sgld", train_and_measure, task, self._sgld_hyper(N),
                    self.act, self.mask, self._sgld_config(seed),
                    arch=str(self.mask), param=N)
                if measurement is None:
                    continue
                last_ok = measurement
                value = cka(measurement.C_exp, C_theory)
                values.append(value)
                cka_rows.append({"N": N, "seed": seed, "cka": value})
                self._save_kernel(measurement.C_exp, f"C_exp_N{N}_s{seed}",
                                  N=N, seed=seed)
                save_training_log(measurement.losses, str(
                    self.path_run_dir / "logs" / f"sgld_N{N}_s{seed}.csv"))
            if values:
                self._metric("cka_median", float(np.median(values)),
                             str(self.mask), N)
                lags[f"N{N}"] = autocorrelation(last_ok.C_exp)

        rows = []
        for tau in range(len(lags["theory"])):
            row = {"lag": tau}
            for key, values in lags.items():
                row[key] = float(values[tau]) if values is not None else ""
            rows.append(row)
        save_rows(rows, str(self.path_run_dir / "fig2_autocorrelation.csv"))
        if cka_rows:
            save_rows(cka_rows, str(self.path_run_dir / "fig2_cka.csv"))

    def fig3_endpoint(self):
        """
        Time-off-diagonal kernel of the endpoint classification task over
        the signal strength for RNN and DNN.
        """
        task_cfg = self.config["task"]
        base = endpoint_classification(int(task_cfg["p"]),
                                       int(task_cfg["d"]), self.T)
        save_task_manifest(base, str(self.path_run_dir / "task.json"))
        last = base.grid.hidden_times[-1]
        rows = []
        for lam in self.config["landau"]["lambdas"]:
            task = scale_labels(base, label_for_lambda(lam, self.T,
                                                       self.hyper))
            for mask in ArchMask:
                result = self._attempt("theory", self.theory, task,
                                       self.hyper, mask,
                                       f"endpoint_{mask}_lam{lam}",
                                       arch=str(mask), param=lam)
                if result is None:
                    continue
                H, C = result
                f = self._attempt("endpoint_predictor", endpoint_predictor,
                                  H, task.label(self.T), self.hyper,
                                  arch=str(mask), param=lam)
                row = {
                    "lambda": lam, "arch": str(mask),
                    "offdiag_H": float(np.mean(np.diag(
                        H.block(last, last - 1)))),
                    "offdiag_C": float(np.mean(np.diag(
                        C.block(last, last - 1)))),
                    "f_over_y": float(np.mean(f / task.label(self.T)))
                    if f is not None and lam > 0 else ""
                }
                rows.append(row)
                self._metric("offdiag_H", row["offdiag_H"], str(mask), lam)

            if self.sgld_enable:
                rows.extend(self._sgld_offdiag(task, lam, last))
        save_rows(rows, str(self.path_run_dir / "fig3_offdiag.csv"),
                  ["lambda", "arch", "offdiag_H", "offdiag_C", "f_over_y",
                   "N", "se"])

    def _sgld_offdiag(self, task: Task, lam: float, last: int) -> List[Dict]:
        N = max(self.sgld_widths)
        values = []
        for seed in self.seeds:
            measurement = self._attempt(
                "sgld", train_and_measure, task, self._sgld_hyper(N),
                self.act, ArchMask.RNN, self._sgld_config(seed),
                arch="RNN", param=lam)
            if measurement is not None:
                values.append(float(np.mean(np.diag(
                    measurement.H_exp.block(last, last - 1)))))
        if not values:
            return []
        se = float(np.std(values, ddof=1) / math.sqrt(len(values))) \
            if len(values) > 1 else float("nan")
        return [{"lambda": lam, "arch": "RNN_sgld",
                 "offdiag_H": float(np.mean(values)), "N": N, "se": se}]

    def fig4_sequence(self):
        """
        Generalization of RNN and DNN kernels on the teacher task over the
        number of supervised timesteps.
        """
        counts = list(self.config["task"]["supervised_counts"]) \
            or list(range(1, self.T))
        rows, predictions = [], []
        for k in counts:
            task = self._attempt("task", self._teacher_task,
                                 spread_supervision(self.T, k), param=k)
            if task is None:
                continue
            kernels = {"teacher": teacher_kernel(task)}
            for mask in ArchMask:
                result = self._attempt("theory", self.theory, task,
                                       self.hyper, mask,
                                       f"teacher_{mask}_k{k}",
                                       arch=str(mask), param=k)
                if result is not None:
                    kernels[str(mask)] = result[0]

            for arch, H in kernels.items():
                result = self._attempt("sequence_predictor",
                                       sequence_predictor, H, task,
                                       self.hyper, arch=arch, param=k)
                if result is None:
                    continue
                unsup = [t - 2 for t in task.grid.unsupervised]
                rows.append({
                    "k": k, "arch": arch, "loss": result.loss,
                    "loss_unsupervised": result.unsupervised_loss,
                    "max_abs_f_unsupervised": float(
                        np.max(np.abs(result.f[unsup]))) if unsup else 0.0
                })
                self._metric("loss", result.loss, arch, k)
                for row in result.rows():
                    row.update({"k": k, "arch": arch})
                    predictions.append(row)

        save_rows(rows, str(self.path_run_dir / "fig4_loss.csv"),
                  ["k", "arch", "loss", "loss_unsupervised",
                   "max_abs_f_unsupervised"])
        save_rows(predictions,
                  str(self.path_run_dir / "fig4_predictions.csv"),
                  ["k", "arch", "time", "pattern", "y", "f", "supervised",
                   "squared_error"])

    def _endpoint_solve(self, T: int, lam: float, mask: ArchMask,
                        name: str) -> Optional[Kernel]:
        task = endpoint_scalar_task(T, label_for_lambda(lam, T, self.hyper))
        result = self._attempt("theory", self.theory, task, self.hyper,
                               mask, name, Activation("linear"),
                               arch=str(mask), param=lam)
        return result[0] if result is not None else None

    def landau_sweep(self):
        """
        Order parameter of the T=4 endpoint task from the full solver next
        to the mean-field branch, the onset for deeper unrollings and the
        optional SGLD overlay.
        """
        landau = self.config["landau"]
        u, w, v = self.hyper.u, self.hyper.w, self.hyper.v
        self._metric("critical_lambda", critical_lambda())

        rows = []
        for lam in landau["lambdas"]:
            for mask in ArchMask:
                H = self._endpoint_solve(4, lam, mask, f"landau_{mask}_"
                                                       f"lam{lam}")
                point = diagonal_foc_solve(lam, u, w, v, mask)
                rows.append({
                    "lambda": lam, "arch": str(mask),
                    "d2_theory": order_parameter(lam, u, w, v, mask),
                    "d2_solver": H.entry(3, 2) ** 2 if H is not None else "",
                    "C2": quadratic_coefficient(point, w),
                    "a": point.a, "c": point.c, "e": point.e
                })
        save_rows(rows, str(self.path_run_dir / "landau.csv"),
                  ["lambda", "arch", "d2_theory", "d2_solver", "C2", "a",
                   "c", "e"])

        near = [(r["lambda"], r["d2_solver"]) for r in rows
                if r["arch"] == "RNN" and r["d2_solver"] != ""
                and critical_lambda() < r["lambda"] <= 8.5
                and r["d2_solver"] > 0]
        if len(near) >= 2:
            lam, d2 = np.array(near).T
            slope = np.polyfit(np.log(lam - critical_lambda()),
                               0.5 * np.log(d2), 1)[0]
            self._metric("critical_exponent", float(slope), "RNN")

        self._depth_transitions(landau)
        if self.sgld_enable:
            self._landau_sgld(landau["lambdas"])

    def _depth_transitions(self, landau: Dict):
        depth_rows, transitions = [], []
        threshold = float(landau["onset_threshold"])
        for T in landau["t_values"]:
            if T <= 4:
                continue
            onset = None
            for lam in landau["lambdas"]:
                H = self._endpoint_solve(T, lam, ArchMask.RNN,
                                         f"depth_T{T}_lam{lam}")
                if H is None:
                    continue
                d2 = H.entry(T - 1, T - 2) ** 2
                depth_rows.append({"T": T, "lambda": lam, "d2_solver": d2})
                if onset is None and d2 > threshold:
                    onset = lam
            transitions.append({"T": T, "lambda_onset":
                                onset if onset is not None else ""})
            logging.info("Transition onset for T=%s: lambda=%s", T, onset)
        if depth_rows:
            save_rows(depth_rows, str(self.path_run_dir / "landau_depth.csv"))
            save_rows(transitions, str(self.path_run_dir / "transitions.csv"),
                      ["T", "lambda_onset"])

    def _landau_sgld(self, lambdas):
        N = max(self.sgld_widths)
        rows = []
        for lam in lambdas:
            task = endpoint_scalar_task(4, label_for_lambda(lam, 4,
                                                            self.hyper))
            values = []
            for seed in self.seeds:
                measurement = self._attempt(
                    "sgld", train_and_measure, task, self._sgld_hyper(N),
                    Activation("linear"), ArchMask.RNN,
                    self._sgld_config(seed), arch="RNN", param=lam)
                if measurement is not None:
                    values.append(measurement.H_exp.entry(3, 2))
            if not values:
                continue
            se = float(np.std(values, ddof=1) / math.sqrt(len(values))) \
                if len(values) > 1 else float("nan")
            rows.append({"lambda": lam, "N": N,
                         "H32_mean": float(np.mean(values)),
                         "H32_abs_mean": float(np.mean(np.abs(values))),
                         "H32_se": se,
                         "d_theory": math.sqrt(order_parameter(
                             lam, self.hyper.u, self.hyper.w,
                             self.hyper.v))})
        save_rows(rows, str(self.path_run_dir / "landau_sgld.csv"))

    def perturbation_check(self):
        """
        Second-order expansion against the full solver and the RNN/DNN
        contrast of the second-order kernel between an unsupervised and a
        supervised time.
        """
        supervised = list(self.config["task"]["supervised"]) or [2, 3]
        task = self._teacher_task(supervised)
        save_task_manifest(task, str(self.path_run_dir / "task.json"))
        scales = self.config["perturbation"]["scales"]

        rows, mechanism = [], []
        hidden_sup = task.grid.supervised_hidden
        unsup = [q for q in task.grid.hidden_times if q not in hidden_sup]
        for mask in ArchMask:
            result = self._attempt("expansion_error", expansion_error, task,
                                   self.hyper, mask, scales,
                                   self.solver_opts, arch=str(mask))
            if result is not None:
                rows.extend(result)
                if result[-1]["ratio"] is not None:
                    self._metric("cubic_ratio", result[-1]["ratio"],
                                 str(mask), result[-1]["scale"])

            if not unsup:
                continue
            H0, _ = nngp_kernel(task, self.hyper, Activation("linear"), mask)
            obj = LinearObjective.from_task(task, self.hyper, mask,
                                            self.solver_opts)
            props = self._attempt("propagators", propagators, H0, obj.X,
                                  self.hyper, arch=str(mask))
            if props is not None:
                self._metric("propagator_identity_error",
                             props.identity_error(H0), str(mask))
                save_json(props.dict(), str(
                    self.path_kernel_dir / f"propagators_{mask}.json"))
            D1 = self._attempt("delta1", delta1, H0, obj.Y, self.hyper, mask,
                               obj.X, arch=str(mask))
            if D1 is None:
                continue
            D2 = self._attempt("delta2", delta2, H0, D1, self.hyper, mask,
                               obj.Y, obj.X, arch=str(mask))
            if D2 is None:
                continue
            t_query, t_sup = max(unsup), min(hidden_sup)
            value = D2.entry(t_query, t_sup)
            mechanism.append({"arch": str(mask), "t_query": t_query,
                              "t_supervised": t_sup, "delta2": value})
            self._metric("delta2_unsupervised", value, str(mask),
                         f"{t_query},{t_sup}")
            self._save_kernel(D1, f"delta1_{mask}", arch=str(mask))
            self._save_kernel(D2, f"delta2_{mask}", arch=str(mask))

        save_rows(rows, str(self.path_run_dir / "perturbation.csv"),
                  ["scale", "arch", "err_order1", "err_order2", "ratio"])
        if mechanism:
            save_rows(mechanism, str(self.path_run_dir / "mechanism.csv"))

    # run
    def _versions(self) -> Dict:
        versions = {"python": platform.python_version()}
        for package in ("numpy", "scipy", "dynaconf", "simplejson"):
            try:
                versions[package] = metadata.version(package)
            except metadata.PackageNotFoundError:
                versions[package] = None
        return versions

    def _artifacts(self) -> Dict[str, str]:
        artifacts = {}
        for root, _, files in os.walk(self.path_run_dir):
            for name in sorted(files):
                path = Path(root) / name
                if name == "manifest.json" or name.startswith(".tmp_"):
                    continue
                with open(path, "rb") as fp:
                    artifacts[str(path.relative_to(self.path_run_dir))] = \
                        hashlib.sha256(fp.read()).hexdigest()
        return artifacts

    def run(self) -> int:
        """
        Run the configured experiment and write metrics, errors and the
        manifest, also after failures.
        :return: 0 on success, 1 if any sub-run failed
        """
        os.makedirs(self.path_kernel_dir, exist_ok=True)
        logging.info("Starting %s in %s", self.experiment, self.path_run_dir)
        start = time.time()
        status = "failed"
        try:
            getattr(self, self.experiment)()
            status = "ok" if not self.errors else "partial"
        except KernelMFTError as e:
            logging.exception(e)
            self.errors.append({"what": self.experiment,
                                "error": type(e).__name__,
                                "message": e.msg})
        finally:
            save_rows(self.metrics, str(self.path_run_dir / "metrics.csv"),
                      METRIC_FIELDS)
            save_json(self.errors, str(self.path_run_dir / "errors.json"))
            save_json({
                "experiment": self.experiment,
                "run_id": self.run_id,
                "status": status,
                "config": self.config,
                "config_sha256": canonical_hash(self.config),
                "seed": self.seed,
                "seeds": self.seeds,
                "versions": self._versions(),
                "wall_time": time.time() - start,
                "artifacts": self._artifacts()
            }, str(self.path_run_dir / "manifest.json"))
        logging.info("Finished %s with status %s", self.experiment, status)
        return 0 if status == "ok" else 1
