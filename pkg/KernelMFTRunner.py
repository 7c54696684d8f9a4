#!/usr/bin/env python3

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

import argparse
import builtins
import logging
import logging.handlers
import os
import sys
from argparse import ArgumentParser
from pathlib import Path
from typing import Dict, List, Sequence

import simplejson as json
from dynaconf import Dynaconf, Validator, validator
from dynaconf.vendor import toml

from KernelMFT.Exceptions import ConfigError
from KernelMFT.KernelMFT import KernelMFT, lower_keys
from KernelMFT.Sweep import Sweep

CONFIG_DIR = "1_Config"
LOG_DIR = "2_Logs"
DEFAULTS_FILE = "settings.toml"
VALIDATORS_FILE = "dynaconf_validators.toml"
ENV = "KernelMFT"
VALIDATOR_OPS = {"must_exist", "is_type_of", "is_in", "is_not_in", "gt",
                 "gte", "lt", "lte", "eq", "ne", "len_eq", "len_min",
                 "len_max"}

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def read_arguments(argv: Sequence[str] = None) -> argparse.Namespace:
    """
    Configures the possible arguments and reads them from argv.
    :return: namespace containing the parsed arguments
    """
    parser = ArgumentParser(
        prog="kmft",
        description=("Kernel mean-field theory of recurrent and deep "
                     "networks: prior kernels, posterior kernel solvers, "
                     "weight-space sampling and the experiments built on "
                     "them.")
    )

    logging_group = parser.add_argument_group(
        title="Logging",
        description="Logging configuration. All arguments are optional."
    )
    logging_group.add_argument("-l", "--loglevel", dest="LOGLEVEL",
                               choices=["debug", "info", "warning", "error",
                                        "critical"],
                               default="info", required=False,
                               help="Loglevel (Default: Info)")

    logging_group.add_argument("--disable-log-stdout", dest="ENABLE_STDOUT",
                               action="store_false", default=True,
                               required=False,
                               help=("Enable logging to stdout. "
                                     "(Default: True)"))

    logging_group.add_argument("--disable-log-file", dest="ENABLE_FILE",
                               action="store_false", default=True,
                               required=False,
                               help="Enable logging to files. (Default: True)")

    logging_group.add_argument("--log-syslog", dest="ENABLE_SYSLOG",
                               action="store_true", default=False,
                               required=False,
                               help=("Enable logging to syslog. "
                                     "(Default: False)"))

    commands = parser.add_subparsers(dest="COMMAND", required=True)
    run = commands.add_parser("run", help="Run the configured experiment.")
    sweep = commands.add_parser("sweep", help=("Run the experiment once per "
                                               "value of one parameter."))
    validate = commands.add_parser("validate",
                                   help="Only validate the config.")

    for sub in (run, sweep, validate):
        sub.add_argument("CONFIG_FILE", nargs="?", default=DEFAULTS_FILE,
                         help=("Config file layered over the defaults. A "
                               "bare name is looked up in the folder "
                               "1_Config. Default: settings.toml"))
        sub.add_argument("-s", "--set", dest="SETS", action="append",
                         default=[], metavar="KEY=VALUE",
                         help=("Override a dotted settings key, the value "
                               "is parsed as TOML. Repeatable."))
        sub.add_argument("--print-config", dest="PRINT_CONFIG",
                         action="store_true", default=False,
                         help="Print the resolved config as JSON and exit.")

    run.add_argument("-o", "--out", dest="OUT_DIR", default=None,
                     help=("Run directory. Default: "
                           "general.output_dir/general.run_id"))

    sweep.add_argument("-a", "--axis", dest="AXIS", required=True,
                       help=("Swept parameter: lambda, N, kappa, T or a "
                             "dotted settings key."))
    sweep.add_argument("-v", "--values", dest="VALUES", nargs="+",
                       required=True, help="Values of the swept parameter.")
    sweep.add_argument("-p", "--parallel", dest="PARALLEL", type=int,
                       default=1, help="Concurrent runs. (Default: 1)")
    sweep.add_argument("-t", "--timeout", dest="TIMEOUT", type=float,
                       default=3600.0,
                       help="Seconds per run before it is killed. "
                            "(Default: 3600)")
    sweep.add_argument("-o", "--out", dest="OUT_DIR", default=None,
                       help="Sweep directory. Default: "
                            "general.output_dir/sweep_<axis>")

    return parser.parse_args(argv)


def configure_logging(log_level: str, log_dir: str, enable_stdout: bool = True,
                      enable_file: bool = True, enable_syslog: bool = False) \
        -> logging.Logger:
    """
    Configure the root logger.
    :param log_level: loglevel as string (NOTSET, DEBUG, INFO, Warning, Error,
                                          critical)
    :param log_dir: Directory for logging.
    :param enable_stdout: Enable logging to stdout?
    :param enable_file: Enable logging to the logging folder?
    :param enable_syslog: Enable logging to syslog?

    :returns logging: the root logger
    """
    log_levels = {
        'NOTSET': 0,
        'DEBUG': logging.DEBUG,
        'INFO': logging.INFO,
        'WARNING': logging.WARNING,
        'ERROR': logging.ERROR,
        'CRITICAL': logging.CRITICAL
    }
    level = log_levels.get(log_level.upper(), logging.DEBUG)

    log = logging.getLogger("")

    form = logging.Formatter("%(asctime)s %(module)s.%(funcName)s: "
                             "[%(levelname)s] %(message)s")

    form_syslog = logging.Formatter("%(module)s.%(funcName)s: "
                                    "[%(levelname)s] %(message)s")

    log_path = ""
    log.setLevel(level)
    if enable_file:
        log_dir = Path(log_dir)
        if not log_dir.is_absolute():
            log_dir = Path(__file__).parent.absolute() / log_dir

        os.makedirs(log_dir, exist_ok=True)
        log_path = Path(log_dir, "KernelMFT.log")

        fh = logging.handlers.TimedRotatingFileHandler(
            log_path,
            when="S", interval=86400,
            backupCount=100
        )
        fh.doRollover()
        fh.setLevel(level)
        fh.setFormatter(form)
        log.addHandler(fh)

    if enable_stdout:
        sh = logging.StreamHandler()
        sh.setLevel(level)
        sh.setFormatter(form)
        log.addHandler(sh)

    if enable_syslog:
        # unix only
        sl = logging.handlers.SysLogHandler(address="/dev/log")
        sl.setLevel(level)
        sl.setFormatter(form_syslog)
        log.addHandler(sl)

    if enable_file:
        logging.debug("Logging to %s", log_path)

    return log


def resolve_config_path(config_dir: Path, config_file: str) -> Path:
    """
    A path as given, or a bare name inside the config folder.
    :raises ConfigError: the file does not exist
    """
    path = Path(config_file)
    if not path.is_absolute() and not path.exists():
        path = config_dir / config_file
    if not path.exists():
        raise ConfigError(f"The config file {path} does not exist!")
    return path.absolute()


def unknown_keys(data: Dict, defaults: Dict, prefix: str = "") -> List[str]:
    """
    Dotted keys of data that the defaults do not define.
    """
    unknown = []
    for key, value in data.items():
        if key not in defaults:
            unknown.append(prefix + key)
        elif isinstance(value, dict) and isinstance(defaults[key], dict):
            unknown += unknown_keys(value, defaults[key], f"{prefix}{key}.")
    return unknown


def load_validators(path: Path, env: str = ENV) -> List[Validator]:
    """
    Build validators from a dynaconf_validators.toml file (the format of
    the `dynaconf validate` command).
    :param path: validators file
    :param env: environment table to read
    :return: one Validator per constrained key
    """
    with open(path) as fp:
        data = toml.load(fp)
    return list(_validators(data.get(env, {}), ""))


def _validators(table: Dict, prefix: str):
    for key, rules in table.items():
        if not isinstance(rules, dict):
            continue
        if not set(rules) & VALIDATOR_OPS:
            yield from _validators(rules, f"{prefix}{key}.")
            continue
        rules = dict(rules)
        if "is_type_of" in rules:
            rules["is_type_of"] = getattr(builtins, rules["is_type_of"])
        yield Validator(prefix + key, **rules)


def setup_dynaconf(config_dir: str, settings_file: str,
                   sets: Sequence[str] = ()) -> Dynaconf:
    """
    Setup dynaconf with the defaults and the given config file on top,
    apply the overrides and validate.
    :param config_dir: path to config dir
    :param settings_file: path or name of the config file
    :param sets: "dotted.key=value" overrides, values parsed as TOML
    :return: the validated settings

    :raises ConfigError: missing file, malformed override or unknown key
    :raises validator.ValidationError: a constraint is violated
    """
    config_folder = Path(__file__).parent.absolute() / Path(config_dir)
    defaults_path = config_folder / DEFAULTS_FILE
    settings_path = resolve_config_path(config_folder, settings_file)

    def load(files) -> Dynaconf:
        return Dynaconf(
            envvar_prefix="KMFT",
            settings_files=[str(f) for f in files],
            environments=True,
            load_dotenv=True,
            dotenv_path=config_folder,
            root_path=config_folder,
            default_env=ENV,
            env=ENV
        )

    defaults = load([defaults_path])
    files = [defaults_path]
    if settings_path != defaults_path:
        files.append(settings_path)
    settings = load(files)

    for entry in sets:
        key, sep, value = entry.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Malformed override {entry}! Use key=value.")
        settings.set(key.strip(), value.strip(), tomlfy=True)

    unknown = unknown_keys(lower_keys(settings.as_dict()),
                           lower_keys(defaults.as_dict()))
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")

    settings.validators.register(
        *load_validators(config_folder / VALIDATORS_FILE))
    settings.validators.validate()

    # correct incorrect values
    if settings.sgld.thin <= 0:
        logging.warning("Invalid value for sgld.thin: %s! Setting to %s",
                        settings.sgld.thin, 1)
        settings.set("sgld.thin", 1)

    if settings.sampler.n_samples < 10000:
        logging.warning("Invalid value for sampler.n_samples: %s! Setting "
                        "to %s", settings.sampler.n_samples, 10000)
        settings.set("sampler.n_samples", 10000)

    return settings


def main(argv: Sequence[str] = None) -> int:
    """
    Main routine
    :return: exit code, 0 success, 1 run failure, 2 config error
    """
    args = read_arguments(argv)

    configure_logging(args.LOGLEVEL, LOG_DIR, args.ENABLE_STDOUT,
                      args.ENABLE_FILE, args.ENABLE_SYSLOG)

    project_dir = Path(__file__).parent.absolute()
    try:
        settings = setup_dynaconf(CONFIG_DIR, args.CONFIG_FILE, args.SETS)
        if args.PRINT_CONFIG:
            print(json.dumps(KernelMFT.resolved_config(settings), indent=2))
            return EXIT_OK
        if args.COMMAND == "validate":
            logging.info("Config %s is valid", args.CONFIG_FILE)
            return EXIT_OK

        if args.COMMAND == "sweep":
            out_dir = Path(args.OUT_DIR) if args.OUT_DIR else \
                project_dir / settings.general.output_dir / \
                f"sweep_{args.AXIS}"
            job = Sweep(project_dir / Path(__file__).name,
                        args.CONFIG_FILE, args.AXIS, args.VALUES,
                        out_dir, args.SETS, args.PARALLEL, args.TIMEOUT)
        else:
            job = KernelMFT(settings=settings, project_dir=project_dir,
                            out_dir=args.OUT_DIR)
    except (ConfigError, validator.ValidationError) as e:
        logging.exception(e)
        return EXIT_CONFIG

    try:
        return job.run()
    except Exception as e:
        logging.exception(e)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
