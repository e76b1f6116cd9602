"""Las Vegas sampling of constraint-satisfying test cases.

The derivation rewrites the leftmost nonterminal or variable of the
sentential form, tracking feasible value intervals for every variable as
constraints accumulate.  When a choice later turns out to be a dead end
(an empty interval, an unreachable production, or a violated chain), the
whole derivation restarts with fresh randomness; whatever is returned is
therefore always a member of the grammar's language.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .constraints import DEFAULT_RANGE, Assignment, check_assignment, feasible_interval
from .errors import (
    NodeBudgetExceeded,
    OutputBudgetExceeded,
    RetriesExhausted,
    SampleError,
    UnboundCounter,
)
from .model import (
    CharClass,
    CounterBinder,
    Grammar,
    Literal,
    Nonterminal,
    SepNewline,
    SepSpace,
    VariableTerminal,
    candidate_productions,
    family_index,
    render_grammar,
    resolve_subscript,
)


@dataclass(frozen=True, slots=True)
class SampleLimits:
    """Budgets for one sampling call; all values must be positive."""

    node_budget: int = 100_000
    retry_budget: int = 1_000
    output_budget: int = 1 << 20
    default_range: tuple = DEFAULT_RANGE

    def __post_init__(self):
        if min(self.node_budget, self.retry_budget, self.output_budget) <= 0:
            raise ValueError("all budgets must be positive")
        if self.default_range[0] > self.default_range[1]:
            raise ValueError("default_range is empty")


@dataclass(frozen=True, slots=True)
class TestCase:
    data: bytes
    grammar_id: str
    seed: int


class _DeadEnd(Exception):
    """Internal: the current derivation cannot be completed."""


def derive_seed(seed: int, tag) -> int:
    """Stable child seed for element ``tag`` of a seeded operation."""
    digest = hashlib.sha256(f"{seed}:{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@lru_cache(maxsize=256)
def grammar_id(grammar: Grammar) -> str:
    return hashlib.sha256(render_grammar(grammar)).hexdigest()[:12]


@lru_cache(maxsize=1024)
def _alphabet(chars: frozenset) -> str:
    # Sorted so that choices depend only on the seed, not on set iteration
    # order.
    return "".join(sorted(chars))


def _pick(rng: random.Random, lo: int, hi: int, boundary_bias: bool) -> int:
    if not boundary_bias:
        return rng.randint(lo, hi)
    roll = rng.random()
    if roll < 0.25:
        return lo
    if roll < 0.5:
        return hi
    if hi - lo >= 2:
        return rng.randint(lo + 1, hi - 1)
    return rng.randint(lo, hi)


def _derive_once(grammar: Grammar, rng: random.Random, limits: SampleLimits,
                 boundary_bias: bool) -> bytes:
    index = family_index(grammar)
    constraints = grammar.constraints
    assignment = Assignment()
    out = bytearray()
    stack = [Nonterminal(grammar.start, None)]
    nodes = 0

    def sample_value(base: str, inst: Optional[int]) -> int:
        target = base if inst is None else (base, inst)
        lo, hi = feasible_interval(constraints, target, assignment,
                                   default_range=limits.default_range)
        if lo > hi:
            raise _DeadEnd(f"empty interval for {target}")
        return _pick(rng, lo, hi, boundary_bias)

    while stack:
        nodes += 1
        if nodes > limits.node_budget:
            raise NodeBudgetExceeded(
                f"derivation exceeded {limits.node_budget} nodes")
        sym = stack.pop()

        if isinstance(sym, SepSpace):
            out += b" "
        elif isinstance(sym, SepNewline):
            out += b"\n"
        elif isinstance(sym, Literal):
            out += sym.text.encode("utf-8")
        elif isinstance(sym, CharClass):
            repeat = sym.repeat
            if isinstance(repeat, str):
                if repeat not in assignment.scalars:
                    raise UnboundCounter(
                        f"repetition count '{repeat}' read before it was bound")
                repeat = assignment.scalars[repeat]
            if repeat < 0:
                raise _DeadEnd(f"negative repetition count {repeat}")
            nodes += repeat
            if nodes > limits.node_budget:
                raise NodeBudgetExceeded(
                    f"derivation exceeded {limits.node_budget} nodes")
            alphabet = _alphabet(sym.chars)
            out += "".join(rng.choice(alphabet) for _ in range(repeat)).encode()
        elif isinstance(sym, CounterBinder):
            value = sample_value(sym.name, None)
            assignment.bind_scalar(sym.name, value)
            out += str(value).encode()
        elif isinstance(sym, VariableTerminal):
            if sym.index is None:
                value = sample_value(sym.base, None)
                assignment.bind_scalar(sym.base, value)
            else:
                inst = resolve_subscript(sym.index, assignment.scalars)
                if inst <= 0:
                    raise _DeadEnd(f"non-positive instance index {inst} for {sym.base}")
                value = sample_value(sym.base, inst)
                assignment.bind_instance(sym.base, inst, value)
            out += str(value).encode()
        elif isinstance(sym, Nonterminal):
            if sym.subscript is None:
                value = None
            else:
                value = resolve_subscript(sym.subscript, assignment.scalars)
            candidates = candidate_productions(
                index, sym.name, value, assignment.scalars.__contains__)
            if not candidates:
                raise _DeadEnd(f"no production applies to {sym}")
            chosen = candidates[rng.randrange(len(candidates))]
            stack.extend(reversed(chosen.rhs))
        else:
            raise TypeError(f"not a symbol: {sym!r}")

        if len(out) > limits.output_budget:
            raise OutputBudgetExceeded(
                f"output exceeded {limits.output_budget} bytes")

    violation = check_assignment(constraints, assignment)
    if violation is not None:
        raise _DeadEnd(violation)
    if not out:
        raise _DeadEnd("derivation produced no bytes")
    return bytes(out)


def sample_test_case(grammar: Grammar, seed: int,
                     limits: Optional[SampleLimits] = None, *,
                     boundary_bias: bool = False) -> TestCase:
    """Sample one test case; identical arguments give identical bytes.

    Raises RetriesExhausted when every attempt within the retry budget dies
    on a constraint dead end, and NodeBudgetExceeded / OutputBudgetExceeded
    as soon as a single derivation outgrows its budget.
    """
    limits = limits or SampleLimits()
    rng = random.Random(derive_seed(seed, "derivation"))
    last_reason = "no attempt made"
    for _ in range(limits.retry_budget):
        try:
            data = _derive_once(grammar, rng, limits, boundary_bias)
        except _DeadEnd as dead:
            last_reason = str(dead)
            continue
        return TestCase(data, grammar_id(grammar), seed)
    raise RetriesExhausted(
        f"no valid derivation in {limits.retry_budget} attempts "
        f"(last dead end: {last_reason})")


def sample_set(grammar: Grammar, count: int, seed: int,
               limits: Optional[SampleLimits] = None, *,
               boundary_bias: bool = False) -> list:
    """Sample ``count`` independent, reproducible test cases.

    Element ``j`` uses a seed derived from (seed, j), so sets are stable
    under the same arguments and elements do not influence one another.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    cases = []
    for j in range(count):
        try:
            cases.append(sample_test_case(grammar, derive_seed(seed, j),
                                          limits, boundary_bias=boundary_bias))
        except SampleError as exc:
            wrapped = type(exc)(f"test case {j}: {exc}")
            wrapped.index = j
            raise wrapped from None
    return cases
