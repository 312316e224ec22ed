"""Rule-violating mutation generator for validator tests.

Each mutation clones a clean base program, breaks exactly one drawing
rule, and records the rule id the validator must report.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass

from patchlang.model import (
    Binary, K_TRANSFORM, Lit, PatchProgram, Step,
    Var,
)
from patchlang.samples import bubble_sort_program, label_demo_program
from patchlang.values import INTEGER, OP_ADD


@dataclass
class Mutant:
    description: str
    program: PatchProgram
    expected_rule: str


def _clone(p: PatchProgram) -> PatchProgram:
    return copy.deepcopy(p)


def extra_solid_edge(rng: random.Random) -> Mutant:
    """A second solid arrow into a step that already has one."""
    p = _clone(bubble_sort_program())
    m = p.modules[0]
    # steps 6 and 7 both sit mid-chain with one incoming solid edge
    target = rng.choice(["6", "7"])
    donor = rng.choice([s for s in m.steps.values()
                        if s.kind not in ("exit", "stop")
                        and s.id != target and s.next != target])
    donor.next = target
    return Mutant(f"extra solid edge {donor.id}->{target}", p, "tree-shape")


def cycle_edge(rng: random.Random) -> Mutant:
    """A solid arrow from a descendant back to an ancestor."""
    p = _clone(bubble_sort_program())
    m = p.modules[0]
    descendant, ancestor = rng.choice([("7", "4"), ("7", "3"), ("7", "2"),
                                       ("5", "4"), ("6", "3")])
    m.steps[descendant].next = ancestor
    return Mutant(f"cycle {descendant}->{ancestor}", p, "tree-shape")


def duplicate_labels(rng: random.Random) -> Mutant:
    p = _clone(label_demo_program())
    m = p.modules[0]
    branch = m.steps["3"]
    arms = [g for g in branch.children if g.tag == "arm"]
    value = rng.choice(["Moscow", "Pea", "same"])
    for g in arms:
        g.label = value
    return Mutant(f"duplicate label {value!r}", p, "label-unique")


def counter_var_write(rng: random.Random) -> Mutant:
    """The loop body writes the loop's own counter."""
    p = _clone(bubble_sort_program())
    m = p.modules[0]
    loop_id, var = rng.choice([("2", "i"), ("3", "j")])
    write = Step("w1", K_TRANSFORM,
                 payload={"target": Var(var),
                          "source": Binary(OP_ADD, Var(var),
                                           Lit(1, INTEGER))})
    m.add(write)
    # splice at the head of the swap body so it sits inside both loops
    branch = m.steps["4"]
    write.next = branch.children[0].entry
    branch.children[0].entry = "w1"
    return Mutant(f"write to counter {var!r} of loop {loop_id}", p,
                  "counter-var-write")


MUTATORS = [extra_solid_edge, cycle_edge, duplicate_labels,
            counter_var_write]


def generate_mutants(seed: int, count: int) -> list[Mutant]:
    rng = random.Random(seed)
    out = []
    for i in range(count):
        out.append(MUTATORS[i % len(MUTATORS)](rng))
    return out
