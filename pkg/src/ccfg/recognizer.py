"""Top-down recognition of byte sequences against a counter grammar.

Matching mirrors the sampler: binders and variable terminals consume one
maximal integer token and bind it, character classes consume exactly
repetition-many bytes, separators and literals match bit-exactly.  For a
concrete subscript the productions with that exact subscript are tried
before the instantiated template, with chronological backtracking; the
input is accepted only when it is fully consumed and the final assignment
satisfies every instantiated constraint chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .constraints import DEFAULT_RANGE, Assignment, check_assignment, feasible_interval
from .errors import UnboundCounter
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
    render_symbol,
    resolve_subscript,
)

STEP_BUDGET = 1_000_000


@dataclass
class ParseResult:
    accepted: bool
    assignment: Optional[dict]
    reason: Optional[str]
    steps_used: int
    inconclusive: bool = False

    def to_document(self) -> dict:
        return {
            "accepted": self.accepted,
            "assignment": self.assignment,
            "reason": self.reason,
            "steps_used": self.steps_used,
            "inconclusive": self.inconclusive,
        }


@dataclass
class _Choice:
    stack: list
    pos: int
    undo_len: int
    candidates: list
    next_index: int = 1


@lru_cache(maxsize=1024)
def _byte_set(chars: frozenset) -> frozenset:
    return frozenset(ord(c) for c in chars)


def _lex_int(data: bytes, pos: int):
    """Maximal integer token at ``pos``: optional '-', digits, no leading
    zeros unless the token is exactly "0".  None when no token starts here."""
    p = pos
    negative = False
    if p < len(data) and data[p] == 0x2D:
        negative = True
        p += 1
    if p >= len(data) or not 0x30 <= data[p] <= 0x39:
        return None
    if data[p] == 0x30:
        if negative:
            return None
        return 0, p + 1
    q = p
    while q < len(data) and 0x30 <= data[q] <= 0x39:
        q += 1
    value = int(data[p:q])
    return (-value if negative else value), q


def parse_test_case(grammar: Grammar, data: bytes,
                    step_budget: int = STEP_BUDGET, *,
                    tolerate_trailing_newline: bool = False,
                    default_range: tuple = DEFAULT_RANGE) -> ParseResult:
    """Decide membership of ``data`` in the grammar's language.

    Exhausting ``step_budget`` yields a distinct inconclusive rejection
    rather than a plain reject, so scoring noise stays observable.
    """
    index = family_index(grammar)
    constraints = grammar.constraints
    assignment = Assignment()
    undo: list = []
    stack: list = [Nonterminal(grammar.start, None)]
    trail: list = []
    pos = 0
    steps = 0
    best_pos = -1
    best_reason = "empty derivation"

    def remember(reason: str) -> None:
        nonlocal best_pos, best_reason
        if pos >= best_pos:
            best_pos = pos
            best_reason = reason

    def backtrack() -> bool:
        nonlocal stack, pos
        while trail:
            choice = trail[-1]
            if choice.next_index < len(choice.candidates):
                while len(undo) > choice.undo_len:
                    assignment.undo(undo.pop())
                stack = choice.stack.copy()
                pos = choice.pos
                stack.extend(reversed(choice.candidates[choice.next_index].rhs))
                choice.next_index += 1
                return True
            trail.pop()
        return False

    while True:
        steps += 1
        if steps > step_budget:
            return ParseResult(False, None,
                               f"step budget of {step_budget} exhausted",
                               steps, inconclusive=True)

        if not stack:
            leftover = data[pos:]
            if leftover and not (tolerate_trailing_newline and leftover == b"\n"):
                remember(f"byte {pos}: input continues past the derivation")
                if backtrack():
                    continue
                break
            violation = check_assignment(constraints, assignment)
            if violation is None:
                return ParseResult(True, assignment.flatten(), None, steps)
            remember(violation)
            if backtrack():
                continue
            break

        sym = stack.pop()
        failed: Optional[str] = None

        if isinstance(sym, SepSpace):
            if pos < len(data) and data[pos] == 0x20:
                pos += 1
            else:
                failed = f"byte {pos}: expected space"
        elif isinstance(sym, SepNewline):
            if pos < len(data) and data[pos] == 0x0A:
                pos += 1
            else:
                failed = f"byte {pos}: expected newline"
        elif isinstance(sym, Literal):
            encoded = sym.text.encode("utf-8")
            if data.startswith(encoded, pos):
                pos += len(encoded)
            else:
                failed = f"byte {pos}: expected literal '{sym.text}'"
        elif isinstance(sym, CharClass):
            repeat = sym.repeat
            if isinstance(repeat, str):
                if repeat in assignment.scalars:
                    repeat = assignment.scalars[repeat]
                else:
                    failed = (f"byte {pos}: repetition count '{sym.repeat}' "
                              f"is unbound")
            if failed is None:
                if repeat < 0:
                    failed = f"byte {pos}: negative repetition count {repeat}"
                elif pos + repeat > len(data):
                    failed = f"byte {pos}: input too short for {render_symbol(sym)}"
                else:
                    steps += repeat
                    if steps > step_budget:
                        return ParseResult(
                            False, None,
                            f"step budget of {step_budget} exhausted",
                            steps, inconclusive=True)
                    allowed = _byte_set(sym.chars)
                    for offset in range(repeat):
                        if data[pos + offset] not in allowed:
                            failed = (f"byte {pos + offset}: "
                                      f"not in {render_symbol(sym)}")
                            break
                    else:
                        pos += repeat
        elif isinstance(sym, (CounterBinder, VariableTerminal)):
            token = _lex_int(data, pos)
            if token is None:
                failed = f"byte {pos}: expected an integer"
            else:
                value, end = token
                if isinstance(sym, CounterBinder) or sym.index is None:
                    base = sym.name if isinstance(sym, CounterBinder) else sym.base
                    target = base
                    inst = None
                else:
                    base = sym.base
                    try:
                        inst = resolve_subscript(sym.index, assignment.scalars)
                    except UnboundCounter as exc:
                        inst = None
                        failed = f"byte {pos}: {exc}"
                    else:
                        if inst <= 0:
                            failed = (f"byte {pos}: non-positive instance "
                                      f"index {inst} for {base}")
                        else:
                            target = (base, inst)
                if failed is None:
                    lo, hi = feasible_interval(constraints, target, assignment,
                                               default_range=default_range)
                    if not lo <= value <= hi:
                        failed = (f"byte {pos}: value {value} outside "
                                  f"[{lo}, {hi}] for {base}")
                    else:
                        if inst is None:
                            undo.append(assignment.bind_scalar(base, value))
                        else:
                            undo.append(assignment.bind_instance(base, inst, value))
                        pos = end
        elif isinstance(sym, Nonterminal):
            try:
                value = (None if sym.subscript is None
                         else resolve_subscript(sym.subscript, assignment.scalars))
            except UnboundCounter as exc:
                failed = f"byte {pos}: {exc}"
            else:
                candidates = candidate_productions(
                    index, sym.name, value, assignment.scalars.__contains__)
                if not candidates:
                    failed = f"byte {pos}: no production applies to {render_symbol(sym)}"
                else:
                    if len(candidates) > 1:
                        trail.append(_Choice(stack.copy(), pos, len(undo),
                                             candidates))
                    stack.extend(reversed(candidates[0].rhs))
        else:
            raise TypeError(f"not a symbol: {sym!r}")

        if failed is not None:
            remember(failed)
            if not backtrack():
                break

    return ParseResult(False, None, best_reason, steps)
