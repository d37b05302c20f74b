"""A small build system: per-file command steps, then one assembly command.

Config file (YAML)::

    steps:                 # run in order on every input file
      - cp {in} {out}
    assemble: cat {ins} > {out}
    inputs: [a.txt, b.txt, c.txt]
    output: book.txt

Relative paths are resolved against the config file's directory, which is
also the working directory of every command. ``{in}``, ``{out}`` and
``{ins}`` expand to shell-quoted absolute paths. Intermediate files go to
the work directory.
"""
from __future__ import annotations

import shlex
import subprocess
import uuid
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..circuit import Circuit, TaskSpec, chain, map_c, task, then_
from ..datastore import StoreRegistry
from ..runtime import JobError, JobFailed, start_network
from ..signature import STR, FlowError, List, Port

PATH = Port("Var", STR)
PATHS = Port("Var", List(STR))

KEYS = {"steps", "assemble", "inputs", "output"}


class ConfigError(FlowError):
    pass


class CommandFailed(Exception):
    def __init__(self, command: str, returncode: int, stderr: str = ""):
        self.command = command
        self.returncode = returncode
        detail = f": {stderr.strip()}" if stderr.strip() else ""
        super().__init__(f"exit code {returncode} from `{command}`{detail}")


@dataclass
class BuildConfig:
    steps: list[str]
    assemble: str
    inputs: list[Path]
    output: Path
    base_dir: Path


def _str_list(data, key) -> list[str]:
    value = data.get(key)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{key!r} must be a list of strings")
    return value


def load_config(path) -> BuildConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"{path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    unknown = set(data) - KEYS
    missing = KEYS - set(data)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    if missing:
        raise ConfigError(f"missing keys: {', '.join(sorted(missing))}")
    steps = _str_list(data, "steps")
    if not steps:
        raise ConfigError("'steps' needs at least one command")
    for key in ("assemble", "output"):
        if not isinstance(data[key], str) or not data[key]:
            raise ConfigError(f"{key!r} must be a non-empty string")
    base = path.resolve().parent
    return BuildConfig(
        steps=steps,
        assemble=data["assemble"],
        inputs=[base / p for p in _str_list(data, "inputs")],
        output=base / data["output"],
        base_dir=base,
    )


def run_command(command: str, cwd) -> None:
    proc = subprocess.run(command, shell=True, cwd=cwd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise CommandFailed(command, proc.returncode, proc.stderr)


def command_task(name: str, template: str, workdir, cwd=None) -> Circuit:
    """A task that runs a shell command on one file path and yields the output path.

    `template` may use ``{in}`` and ``{out}``; the output file is placed in
    `workdir` under a fresh name.
    """
    workdir = Path(workdir)

    def body(values):
        (src,) = values
        workdir.mkdir(parents=True, exist_ok=True)
        dst = workdir.resolve() / f"{uuid.uuid4().hex[:12]}-{Path(src).name}"
        run_command(template.format(**{"in": shlex.quote(src), "out": shlex.quote(str(dst))}), cwd)
        return str(dst)

    return task(TaskSpec(name, (PATH,), PATH, body))


def assemble_task(template: str, output: Path, cwd=None) -> Circuit:
    def body(values):
        (files,) = values
        if not files:
            # nothing to assemble: the output is defined as an empty file
            output.write_bytes(b"")
        else:
            ins = " ".join(shlex.quote(f) for f in files)
            run_command(template.format(ins=ins, out=shlex.quote(str(output))), cwd)
        return str(output)

    return task(TaskSpec("assemble", (PATHS,), PATH, body))


def build_circuit(config: BuildConfig, workdir) -> Circuit:
    per_file = chain(*[
        command_task(f"step{i}", step, workdir, config.base_dir) for i, step in enumerate(config.steps, 1)
    ])
    return then_(map_c(per_file, PATHS, PATHS), assemble_task(config.assemble, config.output, config.base_dir))


def run_buildflow(config: BuildConfig, workdir, registry: StoreRegistry | None = None,
                  topology: list | None = None) -> Path:
    """Build `config.output`. Raises :class:`JobFailed` naming the failing step."""
    registry = registry or StoreRegistry(workdir)
    circuit = build_circuit(config, workdir)
    with start_network(circuit, registry) as net:
        if topology is not None:
            topology.append(net.topology())
        net.write_values([[str(p) for p in config.inputs]])
        # the blocking read keeps us alive until the build has finished
        _, out = net.read_values()
    if isinstance(out, JobError):
        raise JobFailed(out)
    return Path(out[0])
