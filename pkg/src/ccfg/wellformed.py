"""Well-formedness checks and categorized feedback for grammars.

A grammar is well-formed when none of the five error categories apply:

* NullGrammar — no productions, or no production for the start symbol;
* InvalidNonterminal — a referenced nonterminal with no production family;
* UnbracketedCounterVariable — a counter used as a subscript or repetition
  count without a binder in scope (leftmost order);
* MissingVariableReference — a variable present in constraints but not in
  productions, or a production variable no constraint mentions;
* NodeOverflow — every seeded trial derivation aborts on a budget or runs
  out of retries, so the grammar cannot actually produce test cases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import (
    CounterExprUnsupported,
    GrammarParseError,
    MalformedConstraint,
    NodeBudgetExceeded,
    NullGrammar as NullGrammarError,
    OutputBudgetExceeded,
    RetriesExhausted,
    UnboundCounter,
)
from .model import (
    CharClass,
    Const,
    CounterBinder,
    Grammar,
    Nonterminal,
    Var,
    VarAtom,
    VariableTerminal,
    VarMinus,
    family_index,
)
from .sampler import SampleLimits, derive_seed, sample_test_case

CATEGORIES = ("NullGrammar", "UnbracketedCounterVariable",
              "MissingVariableReference", "NodeOverflow", "InvalidNonterminal")

NODE_OVERFLOW_PHRASE = "too many nodes found, not valid grammar"


@dataclass(frozen=True, slots=True)
class GrammarIssue:
    category: str
    message: str
    location: Union[int, str]  # production index, or "global"

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category '{self.category}'")


@dataclass(frozen=True)
class WellFormednessReport:
    well_formed: bool
    errors: tuple = ()
    warnings: tuple = ()

    def __post_init__(self):
        if self.well_formed != (len(self.errors) == 0):
            raise ValueError("well_formed must mirror the error list")

    def to_document(self) -> dict:
        return {
            "well_formed": self.well_formed,
            "errors": [
                {"category": e.category, "message": e.message,
                 "location": e.location}
                for e in self.errors
            ],
            "warnings": list(self.warnings),
        }


def _issue_order(issue: GrammarIssue):
    location = -1 if issue.location == "global" else issue.location
    return (location, issue.category)


def _sorted_report(errors: list, warnings: list) -> WellFormednessReport:
    ordered = tuple(sorted(errors, key=_issue_order))
    return WellFormednessReport(not ordered, ordered, tuple(warnings))


def feedback_text(report: WellFormednessReport) -> list:
    """One "<category>: <message>" line per error, in stable order."""
    return [f"{e.category}: {e.message}" for e in report.errors]


def report_from_parse_error(exc: GrammarParseError) -> WellFormednessReport:
    """Fold a document-level parse failure into the error taxonomy."""
    if isinstance(exc, NullGrammarError):
        category = "NullGrammar"
    elif isinstance(exc, (CounterExprUnsupported, MalformedConstraint)):
        category = "UnbracketedCounterVariable"
    else:  # InvalidNonterminal, MissingArrow, anything else structural
        category = "InvalidNonterminal"
    location = exc.index if exc.index is not None else "global"
    issue = GrammarIssue(category, str(exc), location)
    return WellFormednessReport(False, (issue,))


# --------------------------------------------------------------------------
# static checks


def _check_start(grammar: Grammar) -> list:
    if not grammar.productions:
        return [GrammarIssue("NullGrammar", "grammar has no productions", "global")]
    if all(p.lhs_name != grammar.start for p in grammar.productions):
        return [GrammarIssue(
            "NullGrammar",
            f"no production rewrites the start symbol <{grammar.start}>",
            "global")]
    return []


def _check_references(grammar: Grammar) -> list:
    index = family_index(grammar)
    errors = []
    for pi, prod in enumerate(grammar.productions):
        for sym in prod.rhs:
            if isinstance(sym, Nonterminal) and sym.name not in index.names:
                errors.append(GrammarIssue(
                    "InvalidNonterminal",
                    f"<{sym.name}> is used but never defined", pi))
    return errors


class _CounterWalk:
    """Leftmost abstract expansion tracking which counters are bound."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.index = family_index(grammar)
        self.families: dict = {}
        for pi, prod in enumerate(grammar.productions):
            self.families.setdefault(prod.lhs_name, []).append((pi, prod))
        self.errors: list = []
        self.warnings: list = []
        self.flagged: set = set()
        self.memo: dict = {}

    def run(self) -> None:
        self.family(self.grammar.start, frozenset())

    def flag(self, pi: int, name: str) -> None:
        if (pi, name) in self.flagged:
            return
        self.flagged.add((pi, name))
        self.errors.append(GrammarIssue(
            "UnbracketedCounterVariable",
            f"counter '{name}' is used before any binder [{name}] sets it",
            pi))

    def family(self, name: str, bound: frozenset) -> frozenset:
        members = self.families.get(name)
        if not members:
            return bound
        key = (name, bound)
        if key in self.memo:
            return self.memo[key]
        self.memo[key] = bound  # cycle assumption: no new bindings
        results = [self.production(pi, prod, bound) for pi, prod in members]
        outcome = frozenset.intersection(*results)
        self.memo[key] = outcome
        return outcome

    def production(self, pi: int, prod, bound: frozenset) -> frozenset:
        placeholder = (prod.lhs_subscript.name
                       if isinstance(prod.lhs_subscript, Var) else None)
        base_one = (isinstance(prod.lhs_subscript, Const)
                    and prod.lhs_subscript.value == 1)
        local = set(bound)

        def used(name: str, quirk_ok: bool = False) -> None:
            if name == placeholder or name in local:
                return
            if quirk_ok:
                if (pi, name) not in self.flagged:
                    self.flagged.add((pi, name))
                    self.warnings.append(
                        f"production {pi}: dangling index '{name}' is read "
                        f"as 1 in this base rule")
                return
            self.flag(pi, name)

        for sym in prod.rhs:
            if isinstance(sym, CounterBinder):
                local.add(sym.name)
            elif isinstance(sym, CharClass):
                if isinstance(sym.repeat, str):
                    used(sym.repeat)
            elif isinstance(sym, VariableTerminal):
                if isinstance(sym.index, Var):
                    used(sym.index.name, quirk_ok=base_one)
                elif isinstance(sym.index, VarMinus):
                    used(sym.index.name)
            elif isinstance(sym, Nonterminal):
                if isinstance(sym.subscript, (Var, VarMinus)):
                    used(sym.subscript.name)
                local = set(self.family(sym.name, frozenset(local)))
        return frozenset(local)


def _check_variable_references(grammar: Grammar) -> list:
    production_names = set()
    constrained_names = set()
    needs_constraint = set()
    for prod in grammar.productions:
        if isinstance(prod.lhs_subscript, Var):
            placeholder = prod.lhs_subscript.name
        else:
            placeholder = None
        for sym in prod.rhs:
            if isinstance(sym, CounterBinder):
                production_names.add(sym.name)
                needs_constraint.add(sym.name)
            elif isinstance(sym, VariableTerminal):
                production_names.add(sym.base)
                needs_constraint.add(sym.base)
                if isinstance(sym.index, (Var, VarMinus)):
                    if sym.index.name != placeholder:
                        production_names.add(sym.index.name)
            elif isinstance(sym, CharClass) and isinstance(sym.repeat, str):
                if sym.repeat != placeholder:
                    production_names.add(sym.repeat)
            elif isinstance(sym, Nonterminal):
                if isinstance(sym.subscript, (Var, VarMinus)):
                    if sym.subscript.name != placeholder:
                        production_names.add(sym.subscript.name)
    for constraint in grammar.constraints:
        for atom in constraint.atoms:
            if isinstance(atom, VarAtom):
                constrained_names.add(atom.base)
    errors = []
    for name in sorted(constrained_names - production_names):
        errors.append(GrammarIssue(
            "MissingVariableReference",
            f"variable '{name}' appears in constraints but in no production",
            "global"))
    for name in sorted(needs_constraint - constrained_names):
        errors.append(GrammarIssue(
            "MissingVariableReference",
            f"variable '{name}' is used in productions but no constraint "
            f"mentions it",
            "global"))
    return errors


# --------------------------------------------------------------------------
# dynamic generability


def _trial_derivations(grammar: Grammar, node_budget: int, retry_budget: int,
                       trials: int, seed: int):
    errors = []
    resource_failures = []
    unbound_failures = []
    successes = 0
    for t in range(trials):
        try:
            sample_test_case(grammar, derive_seed(seed, f"trial:{t}"),
                             SampleLimits(node_budget=node_budget,
                                          retry_budget=retry_budget))
        except (NodeBudgetExceeded, OutputBudgetExceeded, RetriesExhausted) as exc:
            resource_failures.append(exc)
        except UnboundCounter as exc:
            unbound_failures.append(exc)
        else:
            successes += 1
    if unbound_failures:
        errors.append(GrammarIssue(
            "UnbracketedCounterVariable",
            f"trial derivation read an unbound counter: {unbound_failures[0]}",
            "global"))
    if successes == 0 and resource_failures and not unbound_failures:
        detail = "; ".join(sorted({type(e).__name__ for e in resource_failures}))
        errors.append(GrammarIssue(
            "NodeOverflow",
            f"{NODE_OVERFLOW_PHRASE}: all {trials} trial derivations failed "
            f"({detail})",
            "global"))
    return errors


def validate(grammar: Grammar, *, node_budget: int = 100_000, trials: int = 3,
             retry_budget: int = 1_000, seed: int = 0) -> WellFormednessReport:
    """Run the five checks in order and report every error found.

    Deterministic for a given (grammar, budget, trials, seed); failures are
    data in the report, never exceptions.
    """
    errors = _check_start(grammar)
    errors += _check_references(grammar)
    walk = _CounterWalk(grammar)
    walk.run()
    errors += walk.errors
    warnings = list(walk.warnings)
    errors += _check_variable_references(grammar)
    mechanics_broken = any(
        e.category in ("NullGrammar", "InvalidNonterminal",
                       "UnbracketedCounterVariable")
        for e in errors)
    if not mechanics_broken:
        errors += _trial_derivations(grammar, node_budget, retry_budget,
                                     trials, seed)
    return _sorted_report(errors, warnings)
