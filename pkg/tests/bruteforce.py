"""Independent language enumeration used as an oracle in tests.

This walks every derivation of a (small) grammar exhaustively instead of
sampling, uses its own loose literal-only ranges for variable values, and
re-checks constraints by direct evaluation at the end.  It shares only the
parsed data model with the package; none of the sampler/recognizer logic
is reused.
"""

import itertools

from ccfg.model import (
    CharClass,
    Const,
    CounterBinder,
    IntAtom,
    Literal,
    Nonterminal,
    SepNewline,
    SepSpace,
    Var,
    VarAtom,
    VariableTerminal,
    VarMinus,
)


def _literal_bounds(grammar, base, indexed):
    """Loose [lo, hi] for a variable from integer literals in its chains."""
    lo, hi = None, None
    for chain in grammar.constraints:
        positions = [i for i, a in enumerate(chain.atoms)
                     if isinstance(a, VarAtom) and a.base == base
                     and a.indexed == indexed]
        if not positions:
            continue
        for i, atom in enumerate(chain.atoms):
            if not isinstance(atom, IntAtom):
                continue
            for p in positions:
                if i < p:
                    lo = atom.value if lo is None else min(lo, atom.value)
                elif i > p:
                    hi = atom.value if hi is None else max(hi, atom.value)
    if lo is None or hi is None:
        raise ValueError(f"cannot enumerate unbounded variable {base}")
    return lo, hi


def _chain_holds(chain, values):
    for i, op in enumerate(chain.ops):
        left, right = values[i], values[i + 1]
        if left is None or right is None:
            continue
        if op == "<=" and not left <= right:
            return False
        if op == "<" and not left < right:
            return False
    return True


def _assignment_ok(grammar, scalars, instances):
    for chain in grammar.constraints:
        indexed_bases = {a.base for a in chain.atoms
                         if isinstance(a, VarAtom) and a.indexed}
        if indexed_bases:
            all_indices = set()
            for base in indexed_bases:
                all_indices.update(j for (b, j) in instances if b == base)
            index_sets = sorted(all_indices) or []
        else:
            index_sets = [None]
        for j in index_sets:
            values = []
            for atom in chain.atoms:
                if isinstance(atom, IntAtom):
                    values.append(atom.value)
                elif atom.indexed:
                    values.append(instances.get((atom.base, j)))
                else:
                    values.append(scalars.get(atom.base))
            if not _chain_holds(chain, values):
                return False
    return True


def _productions_for(grammar, name, value):
    """Right-hand sides applicable to a reference, as tuples of symbols.

    Exact-subscript rules shadow the template, mirroring the notation.
    """
    if value is None:
        return [tuple(p.rhs) for p in grammar.productions
                if p.lhs_name == name and p.lhs_subscript is None]
    exact = [tuple(p.rhs) for p in grammar.productions
             if p.lhs_name == name and p.lhs_subscript == Const(value)]
    if exact:
        return exact
    out = []
    for p in grammar.productions:
        if p.lhs_name == name and isinstance(p.lhs_subscript, Var):
            placeholder = p.lhs_subscript.name
            rhs = []
            dead = False
            for sym in p.rhs:
                sym = _substitute(sym, placeholder, value)
                if sym is None:
                    dead = True
                    break
                rhs.append(sym)
            if not dead:
                out.append(tuple(rhs))
    return out


def _substitute(sym, placeholder, value):
    def expr(e):
        if isinstance(e, Var) and e.name == placeholder:
            return Const(value)
        if isinstance(e, VarMinus) and e.name == placeholder:
            if value - e.offset <= 0:
                return "dead"
            return Const(value - e.offset)
        return e

    if isinstance(sym, Nonterminal) and sym.subscript is not None:
        new = expr(sym.subscript)
        if new == "dead":
            return None
        if isinstance(new, Const) and new.value <= 0:
            return None
        return Nonterminal(sym.name, new)
    if isinstance(sym, VariableTerminal) and sym.index is not None:
        new = expr(sym.index)
        if new == "dead":
            return None
        return VariableTerminal(sym.base, new)
    if isinstance(sym, CharClass) and sym.repeat == placeholder:
        return CharClass(sym.chars, value)
    return sym


def enumerate_language(grammar, max_len=64, max_outputs=100_000):
    """Every byte string the grammar derives, up to the length cap."""
    results = set()

    def walk(symbols, out, scalars, instances):
        if len(out) > max_len or len(results) > max_outputs:
            return
        if not symbols:
            if out and _assignment_ok(grammar, scalars, instances):
                results.add(bytes(out))
            return
        head, rest = symbols[0], symbols[1:]
        if isinstance(head, SepSpace):
            walk(rest, out + b" ", scalars, instances)
        elif isinstance(head, SepNewline):
            walk(rest, out + b"\n", scalars, instances)
        elif isinstance(head, Literal):
            walk(rest, out + head.text.encode(), scalars, instances)
        elif isinstance(head, CharClass):
            repeat = head.repeat
            if isinstance(repeat, str):
                repeat = scalars[repeat]
            for combo in itertools.product(sorted(head.chars), repeat=repeat):
                walk(rest, out + "".join(combo).encode(), scalars, instances)
        elif isinstance(head, CounterBinder):
            lo, hi = _literal_bounds(grammar, head.name, False)
            for v in range(lo, hi + 1):
                walk(rest, out + str(v).encode(),
                     {**scalars, head.name: v}, instances)
        elif isinstance(head, VariableTerminal):
            if head.index is None:
                lo, hi = _literal_bounds(grammar, head.base, False)
                for v in range(lo, hi + 1):
                    walk(rest, out + str(v).encode(),
                         {**scalars, head.base: v}, instances)
            else:
                if isinstance(head.index, Const):
                    j = head.index.value
                elif isinstance(head.index, Var):
                    j = scalars[head.index.name]
                else:
                    j = scalars[head.index.name] - head.index.offset
                lo, hi = _literal_bounds(grammar, head.base, True)
                for v in range(lo, hi + 1):
                    walk(rest, out + str(v).encode(), scalars,
                         {**instances, (head.base, j): v})
        elif isinstance(head, Nonterminal):
            if head.subscript is None:
                value = None
            elif isinstance(head.subscript, Const):
                value = head.subscript.value
            elif isinstance(head.subscript, Var):
                value = scalars[head.subscript.name]
            else:
                value = scalars[head.subscript.name] - head.subscript.offset
            for rhs in _productions_for(grammar, head.name, value):
                walk(rhs + tuple(rest), out, scalars, instances)
        else:
            raise TypeError(head)

    walk((Nonterminal(grammar.start, None),), b"", {}, {})
    return results
