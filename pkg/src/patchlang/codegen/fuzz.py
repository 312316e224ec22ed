"""Seeded random program generator for differential testing.

Programs come out of a restricted grammar that keeps both sides of the
differential honest by construction: every loop is bounded, list
indexing happens only under counters pinned to the list's length,
divisors are nonzero literals, branch conditions compare integers,
booleans, or strings (never reals, whose last-ulp differences across
runtimes could flip a branch), and real-to-integer truncation never
happens. Anything that still errors on the interpreter (overflow, etc.)
is discarded and regenerated deterministically.

Grammar coverage: assign, transform (scalar and list element), read,
display, by-pass, either-or, labeled, counter loop (all directions),
conditional loop, sentinel loop, call, exit, stop; scalar and list
types, depth up to four.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field

from ..errors import PatchError
from ..interpreter import RunConfig, Repository, ScriptedConsole, run_module
from ..model import (
    Binary, CallArg, ChildGroup, Expr, GROUP_ARM, GROUP_BODY, GROUP_DEFAULT,
    GROUP_ELSE, GROUP_THEN, Index, K_ASSIGN, K_BYPASS, K_CALL,
    K_CONDITIONAL_LOOP, K_COUNTER_LOOP, K_DISPLAY, K_EITHER_OR, K_EXIT,
    K_LABELED, K_MODULE_ROOT, K_READ, K_SENTINEL_LOOP, K_STOP, K_TRANSFORM,
    Lit, ModuleDef, DataObjectDecl, PatchProgram, ResultBind, Step, Unary,
    Var,
)
from ..validate import validate
from ..values import (
    BOOLEAN, INTEGER, OP_ADD, OP_AND, OP_EQ, OP_GE, OP_GT, OP_LE,
    OP_LENGTH, OP_LT, OP_MUL, OP_NOT, OP_OR, OP_SUB, OP_DIV,
    OP_POW, PatchType, REAL, STRING, list_of,
)
from .diff import Trial

_WORDS = ("pea", "java", "moscow", "patch", "delta", "koala", "vine",
          "quartz", "maple", "sable")


def _lit(v) -> Lit:
    from ..values import type_of
    return Lit(v, type_of(v))


@dataclass
class FuzzUnit:
    program: PatchProgram
    module: ModuleDef
    trials: list[Trial]


@dataclass
class _Scope:
    vars: dict[str, PatchType] = dc_field(default_factory=dict)
    safe_index: list[tuple[str, str]] = dc_field(default_factory=list)
    # (counter var, list var) pairs currently valid for element access
    reads: int = 0


class _Gen:
    def __init__(self, rng: random.Random, include_calls: bool = True):
        self.rng = rng
        self.include_calls = include_calls
        self.next_var = 0
        self.next_step = 0
        self.module: ModuleDef | None = None
        self.helpers: list[ModuleDef] = []

    # -- naming

    def fresh_var(self, prefix: str = "v") -> str:
        self.next_var += 1
        return f"{prefix}{self.next_var}"

    def fresh_step(self) -> str:
        self.next_step += 1
        return f"s{self.next_step}"

    def add(self, kind: str, payload=None, children=None) -> Step:
        s = Step(self.fresh_step(), kind, payload or {}, None,
                 children or [])
        self.module.add(s)
        return s

    @staticmethod
    def link(steps: list[Step]) -> str | None:
        for a, b in zip(steps, steps[1:]):
            a.next = b.id
        return steps[0].id if steps else None

    # -- expressions

    def int_expr(self, sc: _Scope, depth: int = 0) -> Expr:
        r = self.rng
        opts = ["lit", "lit"]
        ivars = [n for n, t in sc.vars.items() if t == INTEGER]
        if ivars:
            opts += ["var", "var"]
        ilists = [lv for _k, lv in sc.safe_index
                  if sc.vars[lv].elem == INTEGER]
        if ilists:
            opts += ["elem"]
        lists = [n for n, t in sc.vars.items() if t.kind == "list"]
        if lists:
            opts += ["length"]
        if depth < 2:
            opts += ["arith", "arith"]
        choice = r.choice(opts)
        if choice == "lit":
            return _lit(r.randint(-20, 20))
        if choice == "var":
            return Var(r.choice(ivars))
        if choice == "elem":
            lv = r.choice(ilists)
            k = next(k for k, l in reversed(sc.safe_index) if l == lv)
            return Index(Var(lv), Var(k))
        if choice == "length":
            return Unary(OP_LENGTH, Var(r.choice(lists)))
        op = r.choice([OP_ADD, OP_SUB, OP_ADD, OP_SUB, OP_MUL])
        lhs = self.int_expr(sc, depth + 1)
        rhs = _lit(r.randint(-5, 5)) if op == OP_MUL \
            else self.int_expr(sc, depth + 1)
        return Binary(op, lhs, rhs)

    def real_expr(self, sc: _Scope, depth: int = 0) -> Expr:
        r = self.rng
        opts = ["lit", "lit"]
        rvars = [n for n, t in sc.vars.items() if t == REAL]
        if rvars:
            opts += ["var", "var"]
        rlists = [lv for _k, lv in sc.safe_index if sc.vars[lv].elem == REAL]
        if rlists:
            opts += ["elem"]
        if depth < 2:
            opts += ["arith", "arith", "div", "pow", "widen"]
        choice = r.choice(opts)
        if choice == "lit":
            return _lit(round(r.uniform(-20, 20), 3))
        if choice == "var":
            return Var(r.choice(rvars))
        if choice == "elem":
            lv = r.choice(rlists)
            k = next(k for k, l in reversed(sc.safe_index) if l == lv)
            return Index(Var(lv), Var(k))
        if choice == "div":
            denom = r.choice([2, 3, 4, 5, -2, 2.5, -1.5])
            return Binary(OP_DIV, self.real_expr(sc, depth + 1), _lit(denom))
        if choice == "pow":
            return Binary(OP_POW, _lit(round(r.uniform(0.5, 3.0), 2)),
                          _lit(r.randint(0, 3)))
        if choice == "widen":
            return Binary(OP_ADD, self.real_expr(sc, depth + 1),
                          self.int_expr(sc, depth + 1))
        op = r.choice([OP_ADD, OP_SUB, OP_MUL])
        rhs = _lit(round(r.uniform(-3, 3), 2)) if op == OP_MUL \
            else self.real_expr(sc, depth + 1)
        return Binary(op, self.real_expr(sc, depth + 1), rhs)

    def string_expr(self, sc: _Scope) -> Expr:
        svars = [n for n, t in sc.vars.items() if t == STRING]
        if svars and self.rng.random() < 0.6:
            return Var(self.rng.choice(svars))
        return _lit(self.rng.choice(_WORDS))

    def bool_expr(self, sc: _Scope, depth: int = 0) -> Expr:
        r = self.rng
        roll = r.random()
        if depth >= 2 or roll < 0.15:
            return _lit(r.random() < 0.5)
        if roll < 0.6:
            # integer or string comparison; never reals (ulp-safe)
            op = r.choice([OP_LT, OP_GT, OP_EQ, OP_LE, OP_GE])
            if r.random() < 0.8:
                return Binary(op, self.int_expr(sc, 1), self.int_expr(sc, 1))
            return Binary(op, self.string_expr(sc), self.string_expr(sc))
        if roll < 0.75:
            return Unary(OP_NOT, self.bool_expr(sc, depth + 1))
        op = r.choice([OP_AND, OP_OR])
        return Binary(op, self.bool_expr(sc, depth + 1),
                      self.bool_expr(sc, depth + 1))

    def expr_of(self, t: PatchType, sc: _Scope) -> Expr:
        if t == INTEGER:
            return self.int_expr(sc)
        if t == REAL:
            return self.real_expr(sc)
        if t == STRING:
            return self.string_expr(sc)
        return self.bool_expr(sc)

    # -- statements

    def chain(self, sc: _Scope, depth: int, in_container: bool,
              length: int | None = None) -> list[Step]:
        r = self.rng
        n = length if length is not None else r.randint(1, 4)
        steps: list[Step] = []
        for _ in range(n):
            steps.extend(self.statement(sc, depth))
        if in_container and r.random() < 0.15:
            steps.append(self.add(K_EXIT))
        elif r.random() < 0.04:
            steps.append(self.add(K_STOP))
        self.link(steps)
        return steps

    def statement(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        opts = ["scalar", "scalar", "display"]
        if sc.safe_index:
            opts += ["elem_write", "elem_write"]
        if depth < 3:
            opts += ["bypass", "either", "counter", "counter"]
            if depth < 2:
                opts += ["labeled", "conditional", "sentinel"]
        if self.helpers and self.include_calls:
            opts += ["call"]
        if sc.reads < 2 and r.random() < 0.25:
            opts += ["read"]
        choice = r.choice(opts)
        return getattr(self, f"_st_{choice}")(sc, depth)

    def _st_scalar(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        t = r.choice([INTEGER, INTEGER, REAL, BOOLEAN, STRING])
        existing = [n for n, vt in sc.vars.items() if vt == t]
        if existing and r.random() < 0.6:
            name = r.choice(existing)
        else:
            name = self.fresh_var()
            sc.vars[name] = t
        src = self.expr_of(t, sc)
        # plain copies are assignments; computed sources are transforms
        kind = K_ASSIGN if isinstance(src, (Lit, Var)) else K_TRANSFORM
        return [self.add(kind, {"target": Var(name), "source": src})]

    def _st_elem_write(self, sc: _Scope, depth: int) -> list[Step]:
        k, lv = self.rng.choice(sc.safe_index)
        elem_t = sc.vars[lv].elem
        src = self.int_expr(sc) if elem_t == INTEGER else self.real_expr(sc)
        return [self.add(K_TRANSFORM,
                         {"target": Index(Var(lv), Var(k)), "source": src})]

    def _st_display(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        candidates = [n for n, t in sc.vars.items()
                      if t.kind in ("integer", "real", "boolean", "string",
                                    "list")]
        if candidates and r.random() < 0.7:
            e: Expr = Var(r.choice(candidates))
        else:
            e = self.expr_of(r.choice([INTEGER, REAL, BOOLEAN, STRING]), sc)
        return [self.add(K_DISPLAY, {"value": e})]

    def _st_read(self, sc: _Scope, depth: int) -> list[Step]:
        name = self.fresh_var("rd")
        sc.vars[name] = INTEGER
        sc.reads += 1
        return [self.add(K_READ, {"target": name, "type": INTEGER})]

    def _st_bypass(self, sc: _Scope, depth: int) -> list[Step]:
        body = self.chain(dict_scope(sc), depth + 1, True)
        return [self.add(K_BYPASS, {"condition": self.bool_expr(sc)},
                         [ChildGroup(GROUP_BODY, entry=body[0].id)])]

    def _st_either(self, sc: _Scope, depth: int) -> list[Step]:
        then = self.chain(dict_scope(sc), depth + 1, True)
        other = self.chain(dict_scope(sc), depth + 1, True)
        return [self.add(K_EITHER_OR, {"condition": self.bool_expr(sc)},
                         [ChildGroup(GROUP_THEN, entry=then[0].id),
                          ChildGroup(GROUP_ELSE, entry=other[0].id)])]

    def _st_labeled(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        labels = r.sample(range(0, 5), k=r.randint(2, 4))
        groups = []
        for lab in labels:
            arm = self.chain(dict_scope(sc), depth + 1, True,
                             length=r.randint(1, 2))
            groups.append(ChildGroup(GROUP_ARM, entry=arm[0].id,
                                     label=lab, label_type=INTEGER))
        if r.random() < 0.5:
            dflt = self.chain(dict_scope(sc), depth + 1, True,
                              length=r.randint(1, 2))
            groups.append(ChildGroup(GROUP_DEFAULT, entry=dflt[0].id))
        return [self.add(K_LABELED, {"scrutinee": self.int_expr(sc)},
                         groups)]

    def _st_counter(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        var = self.fresh_var("k")
        inner = dict_scope(sc)
        inner.vars[var] = INTEGER
        lists = [n for n, t in inner.vars.items() if t.kind == "list"]
        if lists and r.random() < 0.6:
            lv = r.choice(lists)
            inner.safe_index.append((var, lv))
            start: Expr = _lit(1)
            end: Expr = Unary(OP_LENGTH, Var(lv))
            direction = "up"
        else:
            a = r.randint(-3, 6)
            b = a + r.randint(0, 5) * (1 if r.random() < 0.7 else -1)
            start, end = _lit(a), _lit(b)
            direction = r.choice(["auto", "auto", "up", "down"])
        body = self.chain(inner, depth + 1, True)
        return [self.add(K_COUNTER_LOOP,
                         {"var": var, "start": start, "end": end,
                          "direction": direction},
                         [ChildGroup(GROUP_BODY, entry=body[0].id)])]

    def _st_conditional(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        counter = self.fresh_var("c")
        sc.vars[counter] = INTEGER
        init = self.add(K_ASSIGN, {"target": Var(counter),
                                   "source": _lit(r.randint(1, 5))})
        inner = dict_scope(sc)
        body = self.chain(inner, depth + 1, True, length=r.randint(1, 2))
        # countdown keeps the loop finite; it stays at the chain's end,
        # outside any nested branch
        dec = self.add(K_TRANSFORM,
                       {"target": Var(counter),
                        "source": Binary(OP_SUB, Var(counter), _lit(1))})
        body = [s for s in body if s.kind not in (K_EXIT, K_STOP)] or \
            [self.add(K_DISPLAY, {"value": _lit(0)})]
        self.link(body + [dec])
        loop = self.add(K_CONDITIONAL_LOOP,
                        {"condition": Binary(OP_GT, Var(counter), _lit(0))},
                        [ChildGroup(GROUP_BODY, entry=body[0].id)])
        init.next = loop.id
        return [init, loop]

    def _st_sentinel(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        lists = [n for n, t in sc.vars.items() if t.kind == "list"]
        if lists and r.random() < 0.7:
            coll: Expr = Var(r.choice(lists))
            elem_t = sc.vars[coll.name].elem
        else:
            elem_t = INTEGER
            coll = Lit([r.randint(-9, 9) for _ in range(r.randint(0, 5))],
                       list_of(INTEGER))
        var = self.fresh_var("e")
        inner = dict_scope(sc)
        inner.vars[var] = elem_t
        marker = _lit(r.randint(-9, 9)) if elem_t == INTEGER \
            else _lit(round(r.uniform(-9, 9), 2))
        body = self.chain(inner, depth + 1, True, length=r.randint(1, 2))
        return [self.add(K_SENTINEL_LOOP,
                         {"var": var, "collection": coll, "marker": marker},
                         [ChildGroup(GROUP_BODY, entry=body[0].id)])]

    def _st_call(self, sc: _Scope, depth: int) -> list[Step]:
        r = self.rng
        helper = r.choice(self.helpers)
        formals = [d for d in helper.inputs if d.binding == "caller"]
        named = len(formals) > 1 or r.random() < 0.5
        args = []
        for d in formals:
            e = self.expr_of(d.type, sc)
            args.append(CallArg(value=e, name=d.name if named else None))
        if r.random() < 0.5:
            args = list(reversed(args)) if named else args
        target = self.fresh_var("cr")
        out = helper.outputs[0]
        sc.vars[target] = out.type
        results = [ResultBind(target=target,
                              output=out.name if r.random() < 0.5 else None)]
        return [self.add(K_CALL, {"module": helper.name, "args": args,
                                  "results": results})]

    # -- whole modules

    def helper_module(self, idx: int) -> ModuleDef:
        r = self.rng
        name = f"Helper{chr(ord('A') + idx)}"
        arity = r.randint(1, 2)
        types = [r.choice([INTEGER, REAL]) for _ in range(arity)]
        if arity == 2 and types[0] == types[1]:
            types[1] = REAL if types[0] == INTEGER else INTEGER
        out_t = r.choice([INTEGER, REAL])
        m = ModuleDef(
            name=name,
            inputs=[DataObjectDecl(f"a{i + 1}", t, "caller")
                    for i, t in enumerate(types)],
            outputs=[DataObjectDecl("result", out_t, "caller")],
        )
        saved_module, self.module = self.module, m
        sc = _Scope(vars={f"a{i + 1}": t for i, t in enumerate(types)})
        body: list[Step] = []
        for _ in range(r.randint(1, 3)):
            body.extend(self._st_scalar(sc, 0))
        src = self.int_expr(sc) if out_t == INTEGER else self.real_expr(sc)
        body.append(self.add(K_TRANSFORM, {"target": Var("result"),
                                           "source": src}))
        self.link(body)
        m.add(Step(self.fresh_step(), K_MODULE_ROOT,
                   children=[ChildGroup(GROUP_BODY, entry=body[0].id)]))
        self.module = saved_module
        return m

    def main_module(self) -> ModuleDef:
        r = self.rng
        arity = r.randint(1, 3)
        decls = []
        for i in range(arity):
            t = r.choice([INTEGER, REAL, STRING,
                          list_of(INTEGER), list_of(INTEGER), list_of(REAL)])
            decls.append(DataObjectDecl(f"in{i + 1}", t, "caller"))
        m = ModuleDef(name="Main", inputs=decls,
                      outputs=[DataObjectDecl(d.name, d.type, "caller")
                               for d in decls])
        self.module = m
        sc = _Scope(vars={d.norm(): d.type for d in decls})
        body = self.chain(sc, 0, False, length=r.randint(2, 5))
        m.add(Step(self.fresh_step(), K_MODULE_ROOT,
                   children=[ChildGroup(GROUP_BODY, entry=body[0].id)]))
        self.module = None
        self._reads = sc.reads
        return m

    def trials(self, m: ModuleDef, count: int) -> list[Trial]:
        r = self.rng
        out = []
        for _ in range(count):
            args = {}
            for d in m.inputs:
                if d.binding != "caller":
                    continue
                args[d.norm()] = self._arg_value(d.type)
            console = [str(r.randint(-50, 50)) for _ in range(self._reads)]
            out.append(Trial(args=args, console=console))
        return out

    def _arg_value(self, t: PatchType):
        r = self.rng
        if t == INTEGER:
            return r.randint(-1000, 1000)
        if t == REAL:
            return round(r.uniform(-1000, 1000), 4)
        if t == STRING:
            return r.choice(_WORDS)
        if t.kind == "list":
            return [self._arg_value(t.elem) for _ in range(r.randint(0, 8))]
        return r.random() < 0.5


def dict_scope(sc: _Scope) -> _Scope:
    return _Scope(vars=dict(sc.vars), safe_index=list(sc.safe_index),
                  reads=sc.reads)


def generate_unit(rng: random.Random, include_calls: bool = True,
                  trials_per: int = 10, max_attempts: int = 50,
                  iteration_budget: int = 200_000) -> FuzzUnit:
    """One interpreter-clean program plus its trials; deterministic in
    the rng state."""
    for _ in range(max_attempts):
        gen = _Gen(rng, include_calls=include_calls)
        if include_calls and rng.random() < 0.5:
            gen.helpers = [gen.helper_module(i)
                           for i in range(rng.randint(1, 2))]
        try:
            main = gen.main_module()
        except PatchError:
            continue
        program = PatchProgram(modules=gen.helpers + [main], entry="Main")
        if not validate(program).empty():
            continue
        trials = gen.trials(main, trials_per)
        if _all_trials_clean(program, main, trials, iteration_budget):
            return FuzzUnit(program=program, module=main, trials=trials)
    # deterministic fallback: a trivially safe program
    gen = _Gen(rng, include_calls=False)
    m = ModuleDef(name="Main",
                  inputs=[DataObjectDecl("in1", INTEGER, "caller")],
                  outputs=[DataObjectDecl("in1", INTEGER, "caller")])
    gen.module = m
    shown = gen.add(K_DISPLAY, {"value": Var("in1")})
    m.add(Step(gen.fresh_step(), K_MODULE_ROOT,
               children=[ChildGroup(GROUP_BODY, entry=shown.id)]))
    program = PatchProgram(modules=[m], entry="Main")
    trials = [Trial(args={"in1": rng.randint(-100, 100)})
              for _ in range(trials_per)]
    return FuzzUnit(program=program, module=m, trials=trials)


def _all_trials_clean(program: PatchProgram, m: ModuleDef,
                      trials: list[Trial], budget: int) -> bool:
    from ..values import assign_coerce
    for t in trials:
        console = ScriptedConsole(t.console)
        try:
            args = {d.name: assign_coerce(t.args[d.norm()], d.type)
                    for d in m.inputs if d.binding == "caller"}
            run_module(program, m.name, args=args, console=console,
                       repository=Repository(),
                       config=RunConfig(trace=False,
                                        iteration_budget=budget))
        except PatchError:
            return False
    return True


def generate_suite(seed: int, programs: int = 100, trials_per: int = 10,
                   include_calls: bool = True) -> list[FuzzUnit]:
    rng = random.Random(seed)
    return [generate_unit(rng, include_calls=include_calls,
                          trials_per=trials_per)
            for _ in range(programs)]
