"""Data model and textual notation for context-free grammars with counters.

A grammar is a list of productions plus a list of comparison-chain
constraints.  Productions are written one per line as

    <LHS> -> sym sym ...

where symbols are whitespace-separated tokens: "<s>" / "<n>" are the
single-byte space and newline separators, "<Name>" / "<Name_sub>" reference
nonterminals, "[ident]" binds a counter variable, "[set]{rep}" emits
characters from a set, bare identifiers are integer-valued variable
terminals, and anything else is a literal token.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Union

from .errors import (
    CounterExprUnsupported,
    GrammarParseError,
    InvalidNonterminal,
    MalformedConstraint,
    MissingArrow,
    NonPositiveSubscript,
    NullGrammar,
    UnboundCounter,
)

_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9]*")
_BINDER_RE = re.compile(r"\[([A-Za-z][A-Za-z0-9]*)\]")
_SUBSCRIPT_RE = re.compile(r"(?:(\d+)|([A-Za-z])(?:-(\d+))?)")
_VAR_TERMINAL_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)(?:_(.+))?")
_INT_LITERAL_RE = re.compile(r"([+-]?)(?:(\d+)\*10\^(\d+)|10\^(\d+)|(\d+))")
_CONSTRAINT_SPLIT_RE = re.compile(r"\s*(<=|>=|==|!=|<|>|=)\s*")
_CONSTRAINT_VAR_RE = re.compile(r"([A-Za-z][A-Za-z0-9]*)(?:_([A-Za-z]|\d+))?")


# --------------------------------------------------------------------------
# subscript expressions


@dataclass(frozen=True, slots=True)
class Const:
    value: int


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class VarMinus:
    name: str
    offset: int  # >= 1


Subscript = Union[Const, Var, VarMinus]


def parse_subscript(text: str) -> Optional[Subscript]:
    """Parse INT, single-letter IDENT, or IDENT-INT.  None when malformed.

    Subscript variables are single letters; longer words after an
    underscore mark an invalid token, not a subscript.
    """
    m = _SUBSCRIPT_RE.fullmatch(text)
    if not m:
        return None
    if m.group(1) is not None:
        return Const(int(m.group(1)))
    if m.group(3) is None:
        return Var(m.group(2))
    offset = int(m.group(3))
    if offset < 1:
        return None
    return VarMinus(m.group(2), offset)


def render_subscript(sub: Subscript) -> str:
    if isinstance(sub, Const):
        return str(sub.value)
    if isinstance(sub, Var):
        return sub.name
    return f"{sub.name}-{sub.offset}"


def resolve_subscript(sub: Subscript, scalars: dict) -> int:
    """Evaluate a subscript against the current scalar counter bindings."""
    if isinstance(sub, Const):
        return sub.value
    try:
        value = scalars[sub.name]
    except KeyError:
        raise UnboundCounter(f"counter '{sub.name}' read before it was bound") from None
    if isinstance(sub, VarMinus):
        return value - sub.offset
    return value


# --------------------------------------------------------------------------
# right-hand-side symbols


@dataclass(frozen=True, slots=True)
class SepSpace:
    pass


@dataclass(frozen=True, slots=True)
class SepNewline:
    pass


@dataclass(frozen=True, slots=True)
class Literal:
    text: str


@dataclass(frozen=True, slots=True)
class CounterBinder:
    name: str


@dataclass(frozen=True, slots=True)
class VariableTerminal:
    base: str
    index: Optional[Subscript] = None


@dataclass(frozen=True, slots=True)
class CharClass:
    chars: frozenset
    repeat: Union[int, str] = 1  # plain count or a counter variable name


@dataclass(frozen=True, slots=True)
class Nonterminal:
    name: str
    subscript: Optional[Subscript] = None


Symbol = Union[SepSpace, SepNewline, Literal, CounterBinder, VariableTerminal,
               CharClass, Nonterminal]


# --------------------------------------------------------------------------
# constraints


@dataclass(frozen=True, slots=True)
class IntAtom:
    value: int


@dataclass(frozen=True, slots=True)
class VarAtom:
    base: str
    indexed: bool = False


Atom = Union[IntAtom, VarAtom]


@dataclass(frozen=True, slots=True)
class Constraint:
    """A comparison chain ``atom op atom op atom ...`` with ops in {<=, <}."""

    atoms: tuple
    ops: tuple

    def __post_init__(self):
        if len(self.atoms) < 2 or len(self.ops) != len(self.atoms) - 1:
            raise ValueError("constraint chain needs n atoms and n-1 operators")


@dataclass(frozen=True, slots=True)
class Production:
    lhs_name: str
    lhs_subscript: Optional[Subscript]
    rhs: tuple


@dataclass(frozen=True, slots=True)
class Grammar:
    productions: tuple
    constraints: tuple
    start: str = "S"


# --------------------------------------------------------------------------
# production parsing


def _parse_nonterminal_token(tok: str) -> Nonterminal:
    if len(tok) < 3 or tok[0] != "<" or tok[-1] != ">":
        raise InvalidNonterminal(f"malformed nonterminal token '{tok}'")
    body = tok[1:-1]
    if "<" in body or ">" in body:
        raise InvalidNonterminal(f"malformed nonterminal token '{tok}'")
    name, _, sub_text = body.partition("_")
    if not _IDENT_RE.fullmatch(name):
        raise InvalidNonterminal(f"bad nonterminal name in '{tok}'")
    if not sub_text:
        if "_" in body:
            raise InvalidNonterminal(f"empty subscript in '{tok}'")
        return Nonterminal(name, None)
    sub = parse_subscript(sub_text)
    if sub is None:
        raise InvalidNonterminal(
            f"'{sub_text}' is not a valid subscript in '{tok}'")
    return Nonterminal(name, sub)


def _parse_charset(body: str, tok: str) -> frozenset:
    if not body:
        raise CounterExprUnsupported(f"empty character set in '{tok}'")
    chars = set()
    i = 0
    while i < len(body):
        c = body[i]
        if i + 2 < len(body) and body[i + 1] == "-":
            lo, hi = c, body[i + 2]
            if ord(lo) > ord(hi):
                raise CounterExprUnsupported(f"reversed range '{lo}-{hi}' in '{tok}'")
            chars.update(chr(p) for p in range(ord(lo), ord(hi) + 1))
            i += 3
        else:
            chars.add(c)
            i += 1
    for c in chars:
        if not (0x20 <= ord(c) <= 0x7E):
            raise CounterExprUnsupported(
                f"character set in '{tok}' is not printable ASCII")
    return frozenset(chars)


def _parse_repetition(text: str, tok: str) -> Union[int, str]:
    if text.isdigit():
        return int(text)
    if _IDENT_RE.fullmatch(text):
        return text
    raise CounterExprUnsupported(
        f"repetition '{{{text}}}' in '{tok}' is not a plain count or variable")


def _parse_bracket_token(tok: str) -> list:
    """A counter binder, or one or more character-class groups."""
    m = _BINDER_RE.fullmatch(tok)
    if m:
        return [CounterBinder(m.group(1))]
    symbols = []
    i = 0
    while i < len(tok):
        if tok[i] != "[":
            raise CounterExprUnsupported(
                f"unsupported operator '{tok[i:]}' in '{tok}'")
        close = tok.find("]", i + 1)
        if close < 0:
            raise CounterExprUnsupported(f"unterminated character set in '{tok}'")
        chars = _parse_charset(tok[i + 1:close], tok)
        i = close + 1
        repeat: Union[int, str] = 1
        if i < len(tok) and tok[i] == "{":
            brace = tok.find("}", i)
            if brace < 0:
                raise CounterExprUnsupported(f"unterminated repetition in '{tok}'")
            repeat = _parse_repetition(tok[i + 1:brace], tok)
            i = brace + 1
        symbols.append(CharClass(chars, repeat))
    return symbols


def _parse_rhs_token(tok: str) -> list:
    if tok == "<s>":
        return [SepSpace()]
    if tok == "<n>":
        return [SepNewline()]
    if tok.startswith("<") or tok.endswith(">"):
        return [_parse_nonterminal_token(tok)]
    if tok.startswith("["):
        return _parse_bracket_token(tok)
    m = _VAR_TERMINAL_RE.fullmatch(tok)
    if m:
        base, sub_text = m.group(1), m.group(2)
        if sub_text is None:
            return [VariableTerminal(base, None)]
        sub = parse_subscript(sub_text)
        if sub is not None:
            return [VariableTerminal(base, sub)]
    return [Literal(tok)]


def parse_production(text: str) -> Production:
    """Parse one production line of the form "<LHS> -> sym sym ..."."""
    if "->" not in text:
        raise MissingArrow(f"production '{text.strip()}' has no '->'")
    lhs_text, rhs_text = text.split("->", 1)
    lhs_tok = lhs_text.strip()
    lhs = _parse_nonterminal_token(lhs_tok)
    if isinstance(lhs.subscript, VarMinus):
        raise InvalidNonterminal(
            f"left-hand side '{lhs_tok}' may not use an offset subscript")
    rhs: list = []
    for tok in rhs_text.split():
        rhs.extend(_parse_rhs_token(tok))
    return Production(lhs.name, lhs.subscript, tuple(rhs))


# --------------------------------------------------------------------------
# constraint parsing


def _parse_int_literal(text: str) -> Optional[int]:
    m = _INT_LITERAL_RE.fullmatch(text)
    if not m:
        return None
    sign = -1 if m.group(1) == "-" else 1
    if m.group(2) is not None:
        value = int(m.group(2)) * 10 ** int(m.group(3))
    elif m.group(4) is not None:
        value = 10 ** int(m.group(4))
    else:
        value = int(m.group(5))
    return sign * value


def _parse_atom(text: str) -> Atom:
    text = text.strip()
    if not text:
        raise MalformedConstraint("empty side in constraint")
    value = _parse_int_literal(text)
    if value is not None:
        return IntAtom(value)
    m = _CONSTRAINT_VAR_RE.fullmatch(text)
    if m:
        return VarAtom(m.group(1), indexed=m.group(2) is not None)
    raise MalformedConstraint(f"cannot parse constraint atom '{text}'")


def parse_constraint(text: str) -> Constraint:
    """Parse a comparison chain such as "1 <= n <= 10^3"."""
    parts = _CONSTRAINT_SPLIT_RE.split(text.strip())
    if len(parts) < 3:
        raise MalformedConstraint(f"'{text.strip()}' is not a comparison chain")
    ops = tuple(parts[1::2])
    for op in ops:
        if op not in ("<=", "<"):
            raise MalformedConstraint(f"operator '{op}' is not supported")
    atoms = tuple(_parse_atom(p) for p in parts[0::2])
    return Constraint(atoms, ops)


# --------------------------------------------------------------------------
# document container


def parse_grammar_document(data) -> Grammar:
    """Parse the JSON container {"grammar": {"productions": [...], "constraints": [...]}}.

    Unknown keys are ignored.  A missing or empty productions list (which
    includes any undecodable document) raises NullGrammar; errors in
    individual strings are re-raised annotated with their list index.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError:
            raise NullGrammar("document is not valid UTF-8") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError:
        raise NullGrammar("document is not valid JSON") from None
    if not isinstance(obj, dict) or not isinstance(obj.get("grammar"), dict):
        raise NullGrammar("document has no 'grammar' object")
    body = obj["grammar"]
    production_strings = body.get("productions")
    if not isinstance(production_strings, list) or not production_strings:
        raise NullGrammar("productions list is absent or empty")
    constraint_strings = body.get("constraints")
    if constraint_strings is None:
        constraint_strings = []
    if not isinstance(constraint_strings, list):
        raise NullGrammar("constraints entry is not a list")

    productions = []
    for i, line in enumerate(production_strings):
        if not isinstance(line, str):
            raise InvalidNonterminal("production entry is not a string").located(
                "productions", i)
        try:
            productions.append(parse_production(line))
        except GrammarParseError as exc:
            raise exc.located("productions", i) from None
    constraints = []
    for i, line in enumerate(constraint_strings):
        if not isinstance(line, str):
            raise MalformedConstraint("constraint entry is not a string").located(
                "constraints", i)
        try:
            constraints.append(parse_constraint(line))
        except GrammarParseError as exc:
            raise exc.located("constraints", i) from None
    return Grammar(tuple(productions), tuple(constraints))


def _render_charset(chars: frozenset) -> str:
    points = sorted(ord(c) for c in chars)
    dash = 0x2D in points
    if dash:
        points.remove(0x2D)
    pieces = []
    i = 0
    while i < len(points):
        j = i
        while j + 1 < len(points) and points[j + 1] == points[j] + 1:
            j += 1
        if j - i >= 2:
            pieces.append(f"{chr(points[i])}-{chr(points[j])}")
        else:
            pieces.extend(chr(p) for p in points[i:j + 1])
        i = j + 1
    if dash:
        pieces.append("-")
    return "".join(pieces)


def render_symbol(sym: Symbol) -> str:
    if isinstance(sym, SepSpace):
        return "<s>"
    if isinstance(sym, SepNewline):
        return "<n>"
    if isinstance(sym, Literal):
        return sym.text
    if isinstance(sym, CounterBinder):
        return f"[{sym.name}]"
    if isinstance(sym, VariableTerminal):
        if sym.index is None:
            return sym.base
        return f"{sym.base}_{render_subscript(sym.index)}"
    if isinstance(sym, CharClass):
        return f"[{_render_charset(sym.chars)}]{{{sym.repeat}}}"
    if isinstance(sym, Nonterminal):
        if sym.subscript is None:
            return f"<{sym.name}>"
        return f"<{sym.name}_{render_subscript(sym.subscript)}>"
    raise TypeError(f"not a symbol: {sym!r}")


def render_production(production: Production) -> str:
    if production.lhs_subscript is None:
        lhs = f"<{production.lhs_name}>"
    else:
        lhs = f"<{production.lhs_name}_{render_subscript(production.lhs_subscript)}>"
    rhs = " ".join(render_symbol(s) for s in production.rhs)
    return f"{lhs} -> {rhs}".rstrip()


def render_constraint(constraint: Constraint) -> str:
    def atom_text(atom: Atom) -> str:
        if isinstance(atom, IntAtom):
            return str(atom.value)
        return f"{atom.base}_i" if atom.indexed else atom.base

    out = [atom_text(constraint.atoms[0])]
    for op, atom in zip(constraint.ops, constraint.atoms[1:]):
        out.append(op)
        out.append(atom_text(atom))
    return " ".join(out)


def render_grammar(grammar: Grammar) -> bytes:
    """Emit the canonical document container; parsing it back is lossless."""
    doc = {
        "grammar": {
            "productions": [render_production(p) for p in grammar.productions],
            "constraints": [render_constraint(c) for c in grammar.constraints],
        }
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


# --------------------------------------------------------------------------
# template instantiation and production lookup


def instantiate(production: Production, k: int) -> Production:
    """Substitute the template placeholder of ``production`` with ``k``.

    Every subscript, variable-terminal index, and repetition count naming
    the placeholder is evaluated; any evaluated subscript smaller than one
    raises NonPositiveSubscript.
    """
    if not isinstance(production.lhs_subscript, Var):
        raise ValueError("only productions with a variable subscript are templates")
    placeholder = production.lhs_subscript.name

    def check(value: int, what: str) -> int:
        if value <= 0:
            raise NonPositiveSubscript(
                f"subscript {value} in {what} after substituting "
                f"{placeholder}={k}")
        return value

    check(k, f"<{production.lhs_name}_{placeholder}>")

    def sub_expr(expr: Optional[Subscript], what: str) -> Optional[Subscript]:
        if isinstance(expr, Var) and expr.name == placeholder:
            return Const(check(k, what))
        if isinstance(expr, VarMinus) and expr.name == placeholder:
            return Const(check(k - expr.offset, what))
        return expr

    rhs = []
    for sym in production.rhs:
        if isinstance(sym, Nonterminal):
            rhs.append(Nonterminal(sym.name, sub_expr(sym.subscript, f"<{sym.name}>")))
        elif isinstance(sym, VariableTerminal):
            rhs.append(VariableTerminal(sym.base, sub_expr(sym.index, sym.base)))
        elif isinstance(sym, CharClass) and sym.repeat == placeholder:
            rhs.append(CharClass(sym.chars, k))
        else:
            rhs.append(sym)
    return Production(production.lhs_name, Const(k), tuple(rhs))


@dataclass(frozen=True)
class FamilyIndex:
    """Productions grouped by LHS name and subscript shape."""

    plain: dict
    exact: dict
    templates: dict
    names: frozenset


@lru_cache(maxsize=256)
def family_index(grammar: Grammar) -> FamilyIndex:
    plain: dict = {}
    exact: dict = {}
    templates: dict = {}
    for prod in grammar.productions:
        sub = prod.lhs_subscript
        if sub is None:
            plain.setdefault(prod.lhs_name, []).append(prod)
        elif isinstance(sub, Const):
            exact.setdefault((prod.lhs_name, sub.value), []).append(prod)
        else:
            templates.setdefault(prod.lhs_name, []).append(prod)
    names = frozenset(p.lhs_name for p in grammar.productions)
    return FamilyIndex(plain, exact, templates, names)


def _rewrite_unresolved_indices(production: Production,
                                is_bound: Callable[[str], bool]) -> Production:
    # A base production like <T_1> -> a_i names its single instance with a
    # dangling index; treat that index as 1 unless the variable is a live
    # counter (bound already, or bound by an earlier binder in this rule).
    seen = set()
    rhs = []
    changed = False
    for sym in production.rhs:
        if isinstance(sym, CounterBinder):
            seen.add(sym.name)
        elif (isinstance(sym, VariableTerminal) and isinstance(sym.index, Var)
              and sym.index.name not in seen and not is_bound(sym.index.name)):
            rhs.append(VariableTerminal(sym.base, Const(1)))
            changed = True
            continue
        rhs.append(sym)
    if not changed:
        return production
    return Production(production.lhs_name, production.lhs_subscript, tuple(rhs))


def candidate_productions(index: FamilyIndex, name: str, value: Optional[int],
                          is_bound: Callable[[str], bool]) -> list:
    """Productions applicable to a nonterminal reference, in precedence order.

    For a concrete subscript, productions with that exact subscript shadow
    the template family; templates are instantiated on the fly and skipped
    when substitution drives a subscript non-positive.
    """
    if value is None:
        return list(index.plain.get(name, ()))
    exacts = index.exact.get((name, value))
    if exacts:
        if value == 1:
            return [_rewrite_unresolved_indices(p, is_bound) for p in exacts]
        return list(exacts)
    candidates = []
    for template in index.templates.get(name, ()):
        try:
            candidates.append(instantiate(template, value))
        except NonPositiveSubscript:
            continue
    return candidates
