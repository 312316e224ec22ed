"""Drawing-rule and well-formedness validation.

Nothing here throws on a bad program: every violation becomes a report
finding carrying the step id and a stable rule id. Rule ids:

  module-name-unique   duplicate module names after normalization
  entry-exists         entry does not name a module
  decl-name-unique     duplicate input or output names in one module
  decl-shape           bad identifier or binding on a declaration
  module-root-unique   zero or several module-root steps
  tree-shape           fan-in, solid+dashed into one node, cycle,
                       unreachable step, edge to an unknown id
  child-arity          wrong dashed group count for the step kind
  terminal-shape       exit/stop carrying a next edge or children
  label-unique         duplicate labels on a labeled branch
  payload-shape        missing or ill-formed payload for the step kind
  assign-shape         assignment whose source computes (not a copy)
  counter-var-write    loop body writes its counter variable
  var-undeclared       name used before any definite binding
  call-unknown-module  call to a module the program does not define
  call-arity           actual count differs from callee input count
  call-binding         schema mapping provably fails on static types

The tree-shape reading of the drawing rule constrains incoming edges:
every step has at most one incoming solid and at most one incoming
dashed arrow, never both, and everything hangs off the module root.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from .errors import ModelError, ResolveError
from .exprtypes import TypeEnv, static_expr_type
from .model import (
    BINDINGS, CONTAINER_KINDS, CallArg, ChildGroup, Expr,
    GROUP_ARM, GROUP_BODY, GROUP_DEFAULT, GROUP_ELSE, GROUP_THEN,
    K_ASSIGN, K_BYPASS, K_CALL, K_CONDITIONAL_LOOP, K_COUNTER_LOOP,
    K_DISPLAY, K_EITHER_OR, K_EXIT, K_LABELED, K_MODULE_ROOT, K_READ,
    K_SENTINEL_LOOP, K_STOP, K_TRANSFORM, ModuleDef,
    PatchProgram, Step, STEP_KINDS, Var, is_path_expr,
    is_reference_expr, normalize_identifier, path_root, walk_expr,
)
from .values import BINARY_OPS, INTEGER, UNARY_OPS, patch_equal


@dataclass(frozen=True)
class Finding:
    module: str
    step_id: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"step={self.step_id or '-'} rule={self.rule} msg={self.message}"


@dataclass
class ValidationReport:
    findings: list[Finding] = dc_field(default_factory=list)

    def empty(self) -> bool:
        return not self.findings

    def __bool__(self) -> bool:
        return bool(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def __len__(self) -> int:
        return len(self.findings)

    def rules(self) -> set[str]:
        return {f.rule for f in self.findings}


def validate(program: PatchProgram) -> ValidationReport:
    """Check every module against the drawing rules and payload contracts.

    Pure: two calls on the same program yield identical reports.
    """
    report = ValidationReport()
    add = report.findings.append

    names_seen: dict[str, str] = {}
    for m in program.modules:
        try:
            norm = m.norm()
        except ModelError as e:
            add(Finding(m.name, "", "decl-shape", e.message))
            continue
        if norm in names_seen:
            add(Finding(m.name, "", "module-name-unique",
                        f"module name {m.name!r} collides with "
                        f"{names_seen[norm]!r}"))
        else:
            names_seen[norm] = m.name

    if program.entry:
        if program.module(program.entry) is None:
            add(Finding("", "", "entry-exists",
                        f"entry {program.entry!r} names no module"))
    for m in program.modules:
        _validate_module(m, program, report)
    return report


def _validate_module(m: ModuleDef, program: PatchProgram,
                     report: ValidationReport) -> None:
    add = report.findings.append

    for decls, what in ((m.inputs, "input"), (m.outputs, "output")):
        seen: set[str] = set()
        for d in decls:
            try:
                n = d.norm()
            except ModelError as e:
                add(Finding(m.name, "", "decl-shape", e.message))
                continue
            if n in seen:
                add(Finding(m.name, "", "decl-name-unique",
                            f"duplicate {what} name {d.name!r}"))
            seen.add(n)
            if d.binding not in BINDINGS:
                add(Finding(m.name, "", "decl-shape",
                            f"{what} {d.name!r} has unknown binding "
                            f"{d.binding!r}"))

    roots = [s for s in m.steps.values() if s.kind == K_MODULE_ROOT]
    if len(roots) != 1:
        add(Finding(m.name, "", "module-root-unique",
                    f"module {m.name!r} has {len(roots)} module-root steps"))
        return

    before = len(report.findings)
    _check_tree_shape(m, roots[0], report)
    tree_broken = any(f.rule == "tree-shape"
                      for f in report.findings[before:])
    for s in m.steps.values():
        _check_step_shape(m, s, report)
        _check_payload(m, s, program, report)
    # the definite-binding walk assumes a tree; skip it on broken graphs
    if not tree_broken:
        _check_dataflow(m, roots[0], program, report)


def _check_tree_shape(m: ModuleDef, root: Step,
                      report: ValidationReport) -> None:
    add = report.findings.append
    solid_in: dict[str, list[str]] = {}
    dashed_in: dict[str, list[str]] = {}

    for s in m.steps.values():
        if s.next is not None:
            if s.next not in m.steps:
                add(Finding(m.name, s.id, "tree-shape",
                            f"solid edge to unknown step {s.next!r}"))
            else:
                solid_in.setdefault(s.next, []).append(s.id)
        for g in s.children:
            if g.entry is None:
                continue
            if g.entry not in m.steps:
                add(Finding(m.name, s.id, "tree-shape",
                            f"dashed edge to unknown step {g.entry!r}"))
            else:
                dashed_in.setdefault(g.entry, []).append(s.id)

    for sid, froms in solid_in.items():
        if len(froms) > 1:
            add(Finding(m.name, sid, "tree-shape",
                        f"{len(froms)} incoming solid edges "
                        f"(from {', '.join(sorted(froms))})"))
    for sid, froms in dashed_in.items():
        if len(froms) > 1:
            add(Finding(m.name, sid, "tree-shape",
                        f"{len(froms)} incoming dashed edges "
                        f"(from {', '.join(sorted(froms))})"))
    for sid in sorted(set(solid_in) & set(dashed_in)):
        add(Finding(m.name, sid, "tree-shape",
                    "step has both an incoming solid and dashed edge"))
    if root.id in solid_in or root.id in dashed_in:
        add(Finding(m.name, root.id, "tree-shape",
                    "module root must not have incoming edges"))

    # Reachability and cycle detection over the combined edge set.
    WHITE, GRAY, BLACK = 0, 1, 2
    color: dict[str, int] = {sid: WHITE for sid in m.steps}
    cycle_reported = False

    def edges(s: Step):
        if s.next is not None and s.next in m.steps:
            yield s.next
        for g in s.children:
            if g.entry is not None and g.entry in m.steps:
                yield g.entry

    def dfs(sid: str) -> None:
        nonlocal cycle_reported
        stack = [(sid, iter(edges(m.steps[sid])))]
        color[sid] = GRAY
        while stack:
            cur, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    if not cycle_reported:
                        add(Finding(m.name, nxt, "tree-shape",
                                    "edge closes a cycle"))
                        cycle_reported = True
                elif color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, iter(edges(m.steps[nxt]))))
                    advanced = True
                    break
            if not advanced:
                color[cur] = BLACK
                stack.pop()

    dfs(root.id)
    for sid in sorted(m.steps):
        if color[sid] == WHITE:
            add(Finding(m.name, sid, "tree-shape",
                        "step is not reachable from the module root"))


_GROUP_SHAPE = {
    K_MODULE_ROOT: ((GROUP_BODY,), "one body group"),
    K_BYPASS: ((GROUP_BODY,), "one body group"),
    K_EITHER_OR: ((GROUP_THEN, GROUP_ELSE), "a then and an else group"),
    K_COUNTER_LOOP: ((GROUP_BODY,), "one body group"),
    K_CONDITIONAL_LOOP: ((GROUP_BODY,), "one body group"),
    K_SENTINEL_LOOP: ((GROUP_BODY,), "one body group"),
}


def _check_step_shape(m: ModuleDef, s: Step,
                      report: ValidationReport) -> None:
    add = report.findings.append
    if s.kind not in STEP_KINDS:
        add(Finding(m.name, s.id, "payload-shape",
                    f"unknown step kind {s.kind!r}"))
        return

    if s.kind in (K_EXIT, K_STOP):
        if s.next is not None or s.children:
            add(Finding(m.name, s.id, "terminal-shape",
                        f"{s.kind} must end its chain"))
        return

    if s.kind == K_MODULE_ROOT and s.next is not None:
        add(Finding(m.name, s.id, "tree-shape",
                    "module root carries no solid successor"))

    if s.kind not in CONTAINER_KINDS:
        if s.children:
            add(Finding(m.name, s.id, "child-arity",
                        f"{s.kind} steps take no child groups"))
        return

    if s.kind == K_LABELED:
        arms = [g for g in s.children if g.tag == GROUP_ARM]
        defaults = [g for g in s.children if g.tag == GROUP_DEFAULT]
        others = [g for g in s.children if g.tag not in (GROUP_ARM, GROUP_DEFAULT)]
        if not arms or others or len(defaults) > 1:
            add(Finding(m.name, s.id, "child-arity",
                        "labeled branch needs labeled arms plus at most "
                        "one default group"))
        labels = [g.label for g in arms]
        for i, a in enumerate(labels):
            if any(patch_equal(a, b) for b in labels[:i]):
                add(Finding(m.name, s.id, "label-unique",
                            f"duplicate label {a!r}"))
        return

    want, desc = _GROUP_SHAPE[s.kind]
    if tuple(g.tag for g in s.children) != want:
        add(Finding(m.name, s.id, "child-arity",
                    f"{s.kind} needs {desc}"))


def _check_expr(m: ModuleDef, s: Step, e: Expr, what: str,
                report: ValidationReport) -> None:
    from .model import Binary, Field as FieldExpr, Index, Lit, Unary
    for sub in walk_expr(e):
        if isinstance(sub, Binary) and sub.op not in BINARY_OPS:
            report.findings.append(Finding(
                m.name, s.id, "payload-shape",
                f"{what}: unknown operator {sub.op!r}"))
        elif isinstance(sub, Unary) and sub.op not in UNARY_OPS:
            report.findings.append(Finding(
                m.name, s.id, "payload-shape",
                f"{what}: unknown unary operator {sub.op!r}"))
        elif isinstance(sub, Var):
            try:
                normalize_identifier(sub.name)
            except ModelError as err:
                report.findings.append(Finding(
                    m.name, s.id, "payload-shape", f"{what}: {err.message}"))
        elif not isinstance(sub, (Lit, Index, FieldExpr, Binary, Unary, Var)):
            report.findings.append(Finding(
                m.name, s.id, "payload-shape",
                f"{what}: not an expression: {sub!r}"))


def _check_payload(m: ModuleDef, s: Step, program: PatchProgram,
                   report: ValidationReport) -> None:
    add = report.findings.append
    p = s.payload

    def need(*keys: str) -> bool:
        missing = [k for k in keys if p.get(k) is None]
        if missing:
            add(Finding(m.name, s.id, "payload-shape",
                        f"{s.kind} payload missing {', '.join(missing)}"))
            return False
        return True

    if s.kind in (K_ASSIGN, K_TRANSFORM):
        if not need("target", "source"):
            return
        if not is_path_expr(p["target"]):
            add(Finding(m.name, s.id, "payload-shape",
                        "write target must be a variable path"))
        else:
            _check_expr(m, s, p["target"], "target", report)
        _check_expr(m, s, p["source"], "source", report)
        if s.kind == K_ASSIGN:
            if not is_reference_expr(p["source"]):
                add(Finding(m.name, s.id, "assign-shape",
                            "assignment source must copy an existing "
                            "value; computed sources are transformations"))
            if not isinstance(p["target"], Var):
                add(Finding(m.name, s.id, "assign-shape",
                            "assignment target must be a bare variable; "
                            "element writes are transformations"))
    elif s.kind == K_READ:
        if not need("target"):
            return
        try:
            target = normalize_identifier(p["target"])
        except ModelError as e:
            add(Finding(m.name, s.id, "payload-shape", e.message))
            return
        declared = (m.input_decl(target) or m.output_decl(target))
        if declared is None and p.get("type") is None:
            add(Finding(m.name, s.id, "payload-shape",
                        f"read into undeclared {p['target']!r} needs an "
                        "explicit type"))
    elif s.kind == K_DISPLAY:
        if need("value"):
            _check_expr(m, s, p["value"], "value", report)
    elif s.kind in (K_BYPASS, K_EITHER_OR, K_CONDITIONAL_LOOP):
        if need("condition"):
            _check_expr(m, s, p["condition"], "condition", report)
    elif s.kind == K_LABELED:
        if need("scrutinee"):
            _check_expr(m, s, p["scrutinee"], "scrutinee", report)
    elif s.kind == K_COUNTER_LOOP:
        if not need("var", "start", "end"):
            return
        _check_expr(m, s, p["start"], "start", report)
        _check_expr(m, s, p["end"], "end", report)
        if p.get("direction", "auto") not in ("auto", "up", "down"):
            add(Finding(m.name, s.id, "payload-shape",
                        f"bad loop direction {p.get('direction')!r}"))
        _check_counter_writes(m, s, report)
    elif s.kind == K_SENTINEL_LOOP:
        if not need("var", "collection", "marker"):
            return
        _check_expr(m, s, p["collection"], "collection", report)
        _check_expr(m, s, p["marker"], "marker", report)
    elif s.kind == K_CALL:
        _check_call(m, s, program, report)


def _writes_of(s: Step) -> list[str]:
    """Names a single step binds or rebinds."""
    p = s.payload
    out: list[str] = []
    try:
        if s.kind in (K_ASSIGN, K_TRANSFORM) and p.get("target") is not None:
            if is_path_expr(p["target"]):
                out.append(normalize_identifier(path_root(p["target"])))
        elif s.kind == K_READ and p.get("target"):
            out.append(normalize_identifier(p["target"]))
        elif s.kind in (K_COUNTER_LOOP, K_SENTINEL_LOOP) and p.get("var"):
            out.append(normalize_identifier(p["var"]))
        elif s.kind == K_CALL:
            for r in p.get("results", ()):
                out.append(normalize_identifier(r.target))
    except ModelError:
        pass
    return out


def _check_counter_writes(m: ModuleDef, s: Step,
                          report: ValidationReport) -> None:
    try:
        var = normalize_identifier(s.payload["var"])
    except ModelError as e:
        report.findings.append(Finding(m.name, s.id, "payload-shape",
                                       e.message))
        return
    for inner in _descend_group_steps(m, s):
        if var in _writes_of(inner):
            report.findings.append(Finding(
                m.name, inner.id, "counter-var-write",
                f"loop counter {s.payload['var']!r} of step {s.id} "
                "cannot be written inside the loop body"))


def _descend_group_steps(m: ModuleDef, s: Step):
    """All steps inside s's child groups, transitively (cycle-safe)."""
    seen: set[str] = set()
    stack = [g.entry for g in s.children if g.entry is not None]
    while stack:
        sid = stack.pop()
        if sid in seen or sid not in m.steps:
            continue
        seen.add(sid)
        step = m.steps[sid]
        yield step
        if step.next is not None:
            stack.append(step.next)
        stack.extend(g.entry for g in step.children if g.entry is not None)


def _check_call(m: ModuleDef, s: Step, program: PatchProgram,
                report: ValidationReport) -> None:
    add = report.findings.append
    p = s.payload
    if not p.get("module"):
        add(Finding(m.name, s.id, "payload-shape", "call names no module"))
        return
    callee = program.module(p["module"])
    if callee is None:
        add(Finding(m.name, s.id, "call-unknown-module",
                    f"no module named {p['module']!r}"))
        return
    args: list[CallArg] = list(p.get("args", ()))
    caller_bound = [d for d in callee.inputs if d.binding == "caller"]
    if len(args) != len(caller_bound):
        add(Finding(m.name, s.id, "call-arity",
                    f"{len(args)} actuals for {len(caller_bound)} "
                    f"caller-bound inputs of {callee.name!r}"))
        return
    for arg in args:
        _check_expr(m, s, arg.value, "actual", report)
    for r in p.get("results", ()):
        if r.output is not None and callee.output_decl(r.output) is None:
            add(Finding(m.name, s.id, "call-binding",
                        f"{callee.name!r} has no output {r.output!r}"))
        if r.output is None and len(callee.outputs) != 1:
            add(Finding(m.name, s.id, "call-binding",
                        "unnamed result binding needs a single-output "
                        "callee"))


def _check_dataflow(m: ModuleDef, root: Step, program: PatchProgram,
                    report: ValidationReport) -> None:
    """Definite-binding walk; also drives static call-mapping checks.

    Conservative on purpose: a name only counts as bound after a step
    that is guaranteed to run. Branch arms contribute the intersection
    of their bindings; loop bodies contribute only when the loop always
    iterates (auto-direction counter loops).
    """
    add = report.findings.append
    declared: TypeEnv = {}
    for d in m.inputs:
        try:
            declared[d.norm()] = d.type
        except ModelError:
            continue

    reported: set[tuple[str, str]] = set()

    def check_vars(s: Step, e: Expr, env: TypeEnv) -> None:
        for sub in walk_expr(e):
            if isinstance(sub, Var):
                try:
                    n = normalize_identifier(sub.name)
                except ModelError:
                    continue
                if n not in env and (s.id, n) not in reported:
                    reported.add((s.id, n))
                    add(Finding(m.name, s.id, "var-undeclared",
                                f"{sub.name!r} is not bound on every "
                                "path to this step"))

    def flow_chain(sid: str | None, env: TypeEnv) -> TypeEnv:
        guard = 0
        while sid is not None and sid in m.steps:
            guard += 1
            if guard > len(m.steps):
                break  # cyclic chain; tree-shape already reported
            env = flow_step(m.steps[sid], env)
            sid = m.steps[sid].next
        return env

    def group_env(s: Step, tag_env: TypeEnv, group: ChildGroup) -> TypeEnv:
        return flow_chain(group.entry, dict(tag_env))

    def flow_step(s: Step, env: TypeEnv) -> TypeEnv:
        p = s.payload
        if s.kind in (K_ASSIGN, K_TRANSFORM):
            if p.get("source") is not None:
                check_vars(s, p["source"], env)
            target = p.get("target")
            if target is not None and is_path_expr(target):
                try:
                    rootname = normalize_identifier(path_root(target))
                except ModelError:
                    return env
                if isinstance(target, Var):
                    t = static_expr_type(p.get("source"), env) \
                        if p.get("source") is not None else None
                    env = dict(env)
                    env[rootname] = env.get(rootname) or t
                else:
                    # element/field write: the base must already be bound
                    check_vars(s, target, env)
            return env
        if s.kind == K_READ:
            try:
                n = normalize_identifier(p.get("target", ""))
            except ModelError:
                return env
            env = dict(env)
            decl = m.input_decl(n) or m.output_decl(n)
            env[n] = decl.type if decl is not None else p.get("type")
            return env
        if s.kind == K_DISPLAY:
            if p.get("value") is not None:
                check_vars(s, p["value"], env)
            return env
        if s.kind == K_BYPASS:
            if p.get("condition") is not None:
                check_vars(s, p["condition"], env)
            for g in s.children:
                group_env(s, env, g)
            return env
        if s.kind == K_EITHER_OR:
            if p.get("condition") is not None:
                check_vars(s, p["condition"], env)
            outs = [group_env(s, env, g) for g in s.children]
            return _merge_envs(env, outs) if len(outs) == 2 else env
        if s.kind == K_LABELED:
            if p.get("scrutinee") is not None:
                check_vars(s, p["scrutinee"], env)
            outs = [group_env(s, env, g) for g in s.children]
            has_default = any(g.tag == GROUP_DEFAULT for g in s.children)
            return _merge_envs(env, outs) if (outs and has_default) else env
        if s.kind == K_COUNTER_LOOP:
            for k in ("start", "end"):
                if p.get(k) is not None:
                    check_vars(s, p[k], env)
            body_env = dict(env)
            try:
                var = normalize_identifier(p.get("var", ""))
                body_env[var] = INTEGER
            except ModelError:
                var = None
            out = None
            for g in s.children:
                out = group_env(s, body_env, g)
            if p.get("direction", "auto") == "auto" and out is not None:
                return out  # always iterates at least once
            return env
        if s.kind == K_CONDITIONAL_LOOP:
            if p.get("condition") is not None:
                check_vars(s, p["condition"], env)
            for g in s.children:
                group_env(s, env, g)
            return env
        if s.kind == K_SENTINEL_LOOP:
            for k in ("collection", "marker"):
                if p.get(k) is not None:
                    check_vars(s, p[k], env)
            body_env = dict(env)
            try:
                var = normalize_identifier(p.get("var", ""))
                coll_t = static_expr_type(p.get("collection"), env) \
                    if p.get("collection") is not None else None
                body_env[var] = coll_t.elem if coll_t is not None and \
                    coll_t.kind == "list" else None
            except ModelError:
                pass
            for g in s.children:
                group_env(s, body_env, g)
            return env
        if s.kind == K_CALL:
            return _flow_call(s, env)
        if s.kind == K_MODULE_ROOT:
            for g in s.children:
                env = group_env(s, env, g)
            return env
        return env

    def _flow_call(s: Step, env: TypeEnv) -> TypeEnv:
        p = s.payload
        callee = program.module(p["module"]) if p.get("module") else None
        for arg in p.get("args", ()):
            check_vars(s, arg.value, env)
        if callee is not None:
            _static_mapping_check(m, s, callee, env, report)
        env = dict(env)
        for r in p.get("results", ()):
            try:
                n = normalize_identifier(r.target)
            except ModelError:
                continue
            out_t = None
            if callee is not None:
                d = (callee.output_decl(r.output) if r.output
                     else (callee.outputs[0] if len(callee.outputs) == 1
                           else None))
                out_t = d.type if d is not None else None
            env[n] = env.get(n) or out_t
        return env

    flow_step(root, dict(declared))


def _static_mapping_check(m: ModuleDef, s: Step, callee: ModuleDef,
                          env: TypeEnv, report: ValidationReport) -> None:
    """Run the schema mapper on statically known actual types."""
    from .resolver import CallSignature, resolve_call

    actuals = []
    for arg in s.payload.get("args", ()):
        t = static_expr_type(arg.value, env)
        if t is None and arg.name is None:
            return  # dynamically typed unnamed actual: defer to runtime
        actuals.append((arg.name, t))
    caller_bound = [d for d in callee.inputs if d.binding == "caller"]
    if len(actuals) != len(caller_bound):
        return  # call-arity already reported
    try:
        resolve_call(CallSignature(actuals), callee)
    except ResolveError as e:
        report.findings.append(Finding(
            m.name, s.id, "call-binding", e.message))


def _merge_envs(before: TypeEnv, arms: list[TypeEnv]) -> TypeEnv:
    """Names bound after a branch: bound before, or bound in every arm."""
    if not arms:
        return before
    common = set(arms[0])
    for a in arms[1:]:
        common &= set(a)
    merged = dict(before)
    for n in common:
        if n not in merged:
            ts = {a[n] for a in arms}
            merged[n] = arms[0][n] if len(ts) == 1 else None
    return merged
