"""Call binding by schema mapping rather than position or name.

A call site supplies actuals that may or may not be named; the callee
declares its caller-bound inputs. Binding happens in two passes:

  1. every named actual binds to the identically named formal;
  2. remaining actuals bind to remaining formals, repeatedly taking any
     actual with exactly one type-compatible unbound candidate, until a
     fixed point.

The call succeeds only when the result is a bijection. Anything short of
that is loud: an unnamed actual with several compatible candidates is an
ambiguous-mapping error, never a guess.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ResolveError
from .model import ModuleDef, PatchProgram, normalize_identifier
from .values import PatchType, compatible


@dataclass(frozen=True)
class CallSignature:
    """Ordered actuals: (optional name, optional static type) pairs."""

    actuals: tuple[tuple[Optional[str], Optional[PatchType]], ...]

    def __init__(self, actuals):
        object.__setattr__(self, "actuals", tuple(
            (name, t) for name, t in actuals))
        seen: set[str] = set()
        for name, _ in self.actuals:
            if name is None:
                continue
            n = normalize_identifier(name)
            if n in seen:
                raise ResolveError("duplicate-actual-name",
                                   f"actual name {name!r} repeats")
            seen.add(n)

    def __len__(self) -> int:
        return len(self.actuals)


@dataclass(frozen=True)
class Mapping:
    """Bijection from actual position (0-based) to formal input name."""

    pairs: tuple[tuple[int, str], ...]

    def formal_for(self, position: int) -> str:
        for p, name in self.pairs:
            if p == position:
                return name
        raise ResolveError("unresolvable", f"no binding for actual {position}")

    def as_dict(self) -> dict[int, str]:
        return dict(self.pairs)


def caller_bound_inputs(callee: ModuleDef):
    """Inputs the caller must supply; console/repository inputs fill
    themselves inside the module."""
    return [d for d in callee.inputs if d.binding == "caller"]


def resolve_call(call: CallSignature, callee: ModuleDef) -> Mapping:
    formals = caller_bound_inputs(callee)
    if len(call) != len(formals):
        raise ResolveError(
            "arity-mismatch",
            f"{len(call)} actuals for {len(formals)} caller-bound inputs "
            f"of {callee.name!r}")

    formal_names = [d.norm() for d in formals]
    formal_types = {d.norm(): d.type for d in formals}
    bound: dict[int, str] = {}
    unbound_formals = set(formal_names)

    # Pass 1: explicit names win outright.
    for pos, (name, _t) in enumerate(call.actuals):
        if name is None:
            continue
        n = normalize_identifier(name)
        if n not in formal_names:
            raise ResolveError(
                "unresolvable",
                f"{callee.name!r} has no caller-bound input named {name!r}")
        bound[pos] = n
        unbound_formals.discard(n)

    # Pass 2: unique type-compatible candidates, to a fixed point.
    pending = [pos for pos in range(len(call.actuals)) if pos not in bound]
    while pending:
        progressed = False
        still: list[int] = []
        for pos in pending:
            _name, t = call.actuals[pos]
            if t is None:
                candidates = sorted(unbound_formals)
            else:
                candidates = sorted(
                    f for f in unbound_formals
                    if compatible(t, formal_types[f]))
            if not candidates:
                raise ResolveError(
                    "unresolvable",
                    f"actual {pos + 1} ({t}) fits no remaining input of "
                    f"{callee.name!r}")
            if len(candidates) == 1:
                bound[pos] = candidates[0]
                unbound_formals.discard(candidates[0])
                progressed = True
            else:
                still.append(pos)
        if not progressed:
            pos = still[0]
            raise ResolveError(
                "ambiguous-mapping",
                f"actual {pos + 1} matches several inputs of "
                f"{callee.name!r}; name it explicitly")
        pending = still

    assert len(set(bound.values())) == len(bound)  # bijection by construction
    return Mapping(tuple(sorted(bound.items())))


def resolve_module(name: str, call: CallSignature,
                   program: PatchProgram) -> tuple[ModuleDef, Mapping]:
    """Dispatch a call-site name over the program's module set.

    Module names are case-insensitive; duplicates were already rejected
    by validation, so the name is unique when present.
    """
    callee = program.module(name)
    if callee is None:
        raise ResolveError("unknown-module", f"no module named {name!r}")
    return callee, resolve_call(call, callee)
