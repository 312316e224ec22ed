"""Differential checking: reference interpreter vs emitted program.

For each input set the module runs twice: once on the interpreter, once
as an emitted program under the dialect's toolchain, both following the
harness protocol (inputs one per line in canonical literal syntax,
displays and outputs printed the same way). Verdicts compare the full
observable line streams, exactly for discrete values and within 1e-9
relative for reals.
"""

from __future__ import annotations

import math
import os
import shutil
import subprocess
import sys
import uuid
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from ..errors import EmitError, PatchError
from ..document import read_value, render_value
from ..interpreter import RunConfig, Repository, ScriptedConsole, run_module
from ..model import ModuleDef, PatchProgram
from ..values import PatchSet, PatchTuple, Value, assign_coerce
from .base import SourceText, emit

REAL_RTOL = 1e-9


@dataclass
class Trial:
    """One differential input set: call arguments plus scripted console
    lines consumed by read steps."""

    args: dict[str, Value]
    console: list[str] = dc_field(default_factory=list)


@dataclass
class TrialVerdict:
    index: int
    equal: bool
    expected: list[str]
    actual: list[str]
    detail: str = ""


@dataclass
class EquivalenceReport:
    dialect: str
    verdicts: list[TrialVerdict] = dc_field(default_factory=list)
    skipped: bool = False
    reason: str = ""

    @property
    def all_equal(self) -> bool:
        return not self.skipped and all(v.equal for v in self.verdicts)

    def summary(self) -> str:
        if self.skipped:
            return f"skipped ({self.reason})"
        agree = sum(1 for v in self.verdicts if v.equal)
        return f"agree={agree}/{len(self.verdicts)}"


class CxxToolchain:
    dialect = "cxx"

    def __init__(self, compiler: str = "g++"):
        self.compiler = compiler

    def available(self) -> bool:
        return shutil.which(self.compiler) is not None

    def build(self, source: SourceText, src_dir: Path,
              bin_dir: Path) -> list[str]:
        src = src_dir / source.filename
        src.write_text(source.text, encoding="utf-8")
        exe = bin_dir / (src.stem + ".bin")
        proc = subprocess.run(
            [self.compiler, "-std=c++17", "-O1", "-o", str(exe), str(src)],
            capture_output=True, text=True)
        if proc.returncode != 0:
            raise EmitError("toolchain-build-failed",
                            f"{self.compiler} failed:\n{proc.stderr}")
        return [str(exe)]


class Py3Toolchain:
    dialect = "py3"

    def __init__(self, python: str | None = None):
        self.python = python or sys.executable

    def available(self) -> bool:
        return shutil.which(self.python) is not None or \
            os.path.exists(self.python)

    def build(self, source: SourceText, src_dir: Path,
              bin_dir: Path) -> list[str]:
        src = src_dir / source.filename
        src.write_text(source.text, encoding="utf-8")
        return [self.python, str(src)]


_TOOLCHAINS = {"cxx": CxxToolchain, "py3": Py3Toolchain}


def default_toolchain(dialect: str):
    ctor = _TOOLCHAINS.get(dialect)
    return ctor() if ctor is not None else None


def scratch_root(workdir: str | None = None) -> Path:
    root = workdir or os.environ.get("PATCH_WORKDIR") or \
        os.path.join(os.path.expanduser("~"), ".cache", "patchlang")
    return Path(root)


def interpreter_lines(program: PatchProgram, module: ModuleDef,
                      trial: Trial,
                      iteration_budget: int = 1_000_000) -> list[str]:
    """Observable output of the reference interpreter under the harness
    protocol: display lines first, then caller-bound outputs."""
    console = ScriptedConsole(trial.console)
    args = {}
    for d in module.inputs:
        if d.binding == "caller":
            args[d.name] = assign_coerce(trial.args[d.norm()], d.type)
    result = run_module(program, module.name, args=args, console=console,
                        repository=Repository(),
                        config=RunConfig(trace=False,
                                         iteration_budget=iteration_budget))
    lines = list(console.displayed)
    for d in module.outputs:
        if d.binding == "caller":
            lines.append(render_value(result.outputs[d.name]))
    return lines


def harness_stdin(module: ModuleDef, trial: Trial) -> str:
    lines = []
    for d in module.inputs:
        if d.binding == "caller":
            lines.append(render_value(assign_coerce(trial.args[d.norm()],
                                                    d.type)))
    lines.extend(trial.console)
    return "\n".join(lines) + "\n"


def values_close(a: Value, b: Value, rtol: float = REAL_RTOL) -> bool:
    """Structural comparison: exact for discrete values, tolerant for
    reals (and for int/real mixes, since canonical real text may drop the
    fraction)."""
    if isinstance(a, bool) or isinstance(b, bool):
        return a is b if isinstance(a, bool) and isinstance(b, bool) else False
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if isinstance(a, int) and isinstance(b, int):
            return a == b
        return math.isclose(float(a), float(b), rel_tol=rtol, abs_tol=rtol)
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(
            values_close(x, y, rtol) for x, y in zip(a, b))
    if isinstance(a, PatchSet) and isinstance(b, PatchSet):
        return len(a) == len(b) and all(
            any(values_close(x, y, rtol) for y in b.elems) for x in a.elems)
    if isinstance(a, PatchTuple) and isinstance(b, PatchTuple):
        return len(a) == len(b) and all(
            values_close(x, y, rtol) for x, y in zip(a.values, b.values))
    return False


def lines_equal(expected: list[str], actual: list[str]) -> bool:
    if len(expected) != len(actual):
        return False
    for e, a in zip(expected, actual):
        if e == a:
            continue
        try:
            ev, av = read_value(e), read_value(a)
        except PatchError:
            return False
        if not values_close(ev, av):
            return False
    return True


def differential_check(module: ModuleDef, dialect: str,
                       trials: list[Trial],
                       program: PatchProgram | None = None,
                       toolchain=None,
                       workdir: str | None = None,
                       run_id: str | None = None,
                       allow_skip: bool = False,
                       timeout: float = 30.0) -> EquivalenceReport:
    """Run interpreter and emitted program on every trial and compare.

    A missing toolchain raises toolchain-missing unless allow_skip is
    set, in which case the report notes the skip (not a failure of the
    module).
    """
    toolchain = toolchain if toolchain is not None else \
        default_toolchain(dialect)
    if toolchain is None or not toolchain.available():
        if allow_skip:
            return EquivalenceReport(dialect=dialect, skipped=True,
                                     reason=f"no toolchain for {dialect}")
        raise EmitError("toolchain-missing",
                        f"no working toolchain for dialect {dialect!r}")

    prog = program if program is not None else PatchProgram(
        modules=[module], entry=module.name)
    source = emit(module, dialect, prog)

    rid = run_id or f"diff-{uuid.uuid4().hex[:12]}"
    root = scratch_root(workdir) / rid
    src_dir, bin_dir, out_dir = root / "src", root / "bin", root / "out"
    for d in (src_dir, bin_dir, out_dir):
        d.mkdir(parents=True, exist_ok=True)

    report = EquivalenceReport(dialect=dialect)
    try:
        cmd = toolchain.build(source, src_dir, bin_dir)
        for i, trial in enumerate(trials):
            report.verdicts.append(
                _run_trial(i, cmd, prog, module, trial, out_dir, timeout))
    finally:
        shutil.rmtree(root, ignore_errors=True)
    return report


def _run_trial(i: int, cmd: list[str], prog: PatchProgram,
               module: ModuleDef, trial: Trial, out_dir: Path,
               timeout: float) -> TrialVerdict:
    try:
        expected = interpreter_lines(prog, module, trial)
    except PatchError as e:
        return TrialVerdict(i, False, [], [],
                            detail=f"interpreter error: {e}")
    stdin_text = harness_stdin(module, trial)
    try:
        proc = subprocess.run(cmd, input=stdin_text, capture_output=True,
                              text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return TrialVerdict(i, False, expected, [], detail="timeout")
    (out_dir / f"trial-{i}.out").write_text(proc.stdout, encoding="utf-8")
    if proc.returncode != 0:
        return TrialVerdict(i, False, expected,
                            proc.stdout.splitlines(),
                            detail=f"exit {proc.returncode}: "
                                   f"{proc.stderr.strip()[:200]}")
    actual = proc.stdout.splitlines()
    ok = lines_equal(expected, actual)
    return TrialVerdict(i, ok, expected, actual,
                        detail="" if ok else "output mismatch")
