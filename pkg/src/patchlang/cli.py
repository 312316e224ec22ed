"""Command-line entry points over .patch.json documents.

Exit codes are a stable contract for CI: 0 ok, 1 validation findings,
2 I/O problems, 3 runtime or resolution failures, 4 environment
(missing toolchain). Diagnostics go to stderr (machine-parseable, one
per line); results go to stdout.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .codegen import available_dialects, differential_check, emit
from .codegen.diff import Trial
from .document import parse, read_value, render_value
from .errors import DocumentError, EmitError, PatchError
from .interpreter import (
    InteractiveConsole, Repository, RunConfig, run_module,
)
from .tracestream import event_to_wire
from .validate import validate
from .values import PatchType, INTEGER, REAL, STRING, BOOLEAN

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_IO = 2
EXIT_RUNTIME = 3
EXIT_ENV = 4


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentError("io-error", f"cannot read {path}: {e}") from None
    return parse(text)


def _parse_inputs(pairs: list[str]) -> dict:
    args = {}
    for pair in pairs:
        if "=" not in pair:
            raise DocumentError("io-error",
                                f"--in expects name=value, got {pair!r}")
        name, raw = pair.split("=", 1)
        args[name.strip()] = read_value(raw.strip())
    return args


def cmd_check(ns) -> int:
    doc = _load(ns.document)
    report = validate(doc.program)
    for f in report:
        print(f"step={f.step_id or '-'} rule={f.rule} msg={f.message}",
              file=sys.stderr)
    return EXIT_FINDINGS if report else EXIT_OK


def _run_document(ns, collect_trace: bool):
    doc = _load(ns.document)
    report = validate(doc.program)
    if report:
        for f in report:
            print(f"step={f.step_id or '-'} rule={f.rule} msg={f.message}",
                  file=sys.stderr)
        return None, EXIT_FINDINGS
    args = _parse_inputs(ns.inputs or [])
    console = InteractiveConsole()
    result = run_module(doc.program, ns.module, args=args, console=console,
                        repository=Repository(),
                        config=RunConfig(trace=collect_trace))
    return (doc, result, console), EXIT_OK


def cmd_run(ns) -> int:
    out, code = _run_document(ns, collect_trace=False)
    if out is None:
        return code
    _doc, result, console = out
    if ns.json:
        payload = {
            "outputs": {k: render_value(v)
                        for k, v in result.outputs.items()},
            "displayed": console.displayed,
            "stopped": result.stopped,
        }
        print(json.dumps(payload, ensure_ascii=False))
    else:
        for v in result.outputs.values():
            print(render_value(v))
    return EXIT_OK


def cmd_trace(ns) -> int:
    out, code = _run_document(ns, collect_trace=True)
    if out is None:
        return code
    _doc, result, _console = out
    for ev in result.trace:
        print(json.dumps(event_to_wire(ev), ensure_ascii=False))
    return EXIT_OK


def cmd_emit(ns) -> int:
    doc = _load(ns.document)
    report = validate(doc.program)
    if report:
        for f in report:
            print(f"step={f.step_id or '-'} rule={f.rule} msg={f.message}",
                  file=sys.stderr)
        return EXIT_FINDINGS
    module = doc.program.module(ns.module) if ns.module \
        else doc.program.entry_module()
    if module is None:
        return _fail(EXIT_RUNTIME, f"no module named {ns.module!r}")
    source = emit(module, ns.dialect, doc.program)
    out_dir = Path(ns.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / source.filename
    target.write_text(source.text, encoding="utf-8")
    print(str(target))
    return EXIT_OK


def _random_value(t: PatchType, rng: random.Random):
    if t == INTEGER:
        return rng.randint(-1000, 1000)
    if t == REAL:
        return round(rng.uniform(-1000, 1000), 4)
    if t == BOOLEAN:
        return rng.random() < 0.5
    if t == STRING:
        return rng.choice(["pea", "java", "moscow", "patch", "vine"])
    if t.kind == "list":
        return [_random_value(t.elem, rng) for _ in range(rng.randint(0, 20))]
    raise EmitError("unsupported-construct",
                    f"cannot generate trial inputs of type {t}")


def cmd_diff(ns) -> int:
    doc = _load(ns.document)
    report = validate(doc.program)
    if report:
        for f in report:
            print(f"step={f.step_id or '-'} rule={f.rule} msg={f.message}",
                  file=sys.stderr)
        return EXIT_FINDINGS
    module = doc.program.module(ns.module) if ns.module \
        else doc.program.entry_module()
    rng = random.Random(ns.seed)
    trials = []
    for _ in range(ns.trials):
        args = {d.norm(): _random_value(d.type, rng)
                for d in module.inputs if d.binding == "caller"}
        trials.append(Trial(args=args))
    try:
        rep = differential_check(module, ns.dialect, trials,
                                 program=doc.program,
                                 workdir=ns.workdir,
                                 allow_skip=ns.allow_skip)
    except EmitError as e:
        if e.code == "toolchain-missing":
            return _fail(EXIT_ENV, str(e))
        raise
    if rep.skipped:
        print(f"skipped: {rep.reason}", file=sys.stderr)
        print(rep.summary())
        return EXIT_OK
    for v in rep.verdicts:
        line = f"trial={v.index} equal={'yes' if v.equal else 'no'}"
        if v.detail:
            line += f" detail={v.detail}"
        print(line)
    print(rep.summary())
    return EXIT_OK if rep.all_equal else EXIT_RUNTIME


def cmd_serve(ns) -> int:
    from .service import PatchService
    service = PatchService(directory=ns.dir)
    service.serve(host=ns.host, port=ns.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="patchlang",
        description="Validate, run, trace, emit, and differential-test "
                    "Patch programs.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="validate a document")
    c.add_argument("document")
    c.set_defaults(fn=cmd_check)

    r = sub.add_parser("run", help="run a module and print its outputs")
    r.add_argument("document")
    r.add_argument("--module", default=None)
    r.add_argument("--in", dest="inputs", action="append", metavar="NAME=VALUE")
    r.add_argument("--json", action="store_true")
    r.set_defaults(fn=cmd_run)

    t = sub.add_parser("trace", help="run and print the event stream")
    t.add_argument("document")
    t.add_argument("--module", default=None)
    t.add_argument("--in", dest="inputs", action="append", metavar="NAME=VALUE")
    t.set_defaults(fn=cmd_trace)

    e = sub.add_parser("emit", help="emit source text for a dialect")
    e.add_argument("document")
    e.add_argument("--dialect", required=True, choices=available_dialects())
    e.add_argument("--module", default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(fn=cmd_emit)

    d = sub.add_parser("diff", help="differential-check emitted code")
    d.add_argument("document")
    d.add_argument("--dialect", required=True, choices=available_dialects())
    d.add_argument("--module", default=None)
    d.add_argument("--trials", type=int, default=20)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--workdir", default=None)
    d.add_argument("--allow-skip", action="store_true")
    d.set_defaults(fn=cmd_diff)

    s = sub.add_parser("serve", help="start the editor HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=7341)
    s.add_argument("--dir", default=None,
                   help="directory for document persistence")
    s.set_defaults(fn=cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.fn(ns)
    except DocumentError as e:
        return _fail(EXIT_IO, str(e))
    except EmitError as e:
        if e.code == "toolchain-missing":
            return _fail(EXIT_ENV, str(e))
        return _fail(EXIT_RUNTIME, str(e))
    except PatchError as e:
        return _fail(EXIT_RUNTIME, str(e))


if __name__ == "__main__":
    sys.exit(main())
