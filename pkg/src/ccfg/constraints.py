"""Assignments and feasible-interval tracking over constraint chains."""

from __future__ import annotations

from typing import Optional, Sequence, Tuple, Union

from .model import Constraint, IntAtom, VarAtom, render_constraint

DEFAULT_RANGE = (-10 ** 9, 10 ** 9)

_MISSING = object()

Target = Union[str, Tuple[str, Optional[int]]]


class Assignment:
    """Variable bindings accumulated during a derivation.

    Scalar counters keep their most recent binding; indexed instances are
    keyed by (base name, index).
    """

    __slots__ = ("scalars", "instances")

    def __init__(self):
        self.scalars: dict = {}
        self.instances: dict = {}  # base -> {index: value}

    def bind_scalar(self, name: str, value: int):
        old = self.scalars.get(name, _MISSING)
        self.scalars[name] = value
        return ("s", name, old)

    def bind_instance(self, base: str, index: int, value: int):
        per_base = self.instances.setdefault(base, {})
        old = per_base.get(index, _MISSING)
        per_base[index] = value
        return ("i", (base, index), old)

    def undo(self, entry) -> None:
        kind, key, old = entry
        if kind == "s":
            if old is _MISSING:
                del self.scalars[key]
            else:
                self.scalars[key] = old
        else:
            base, index = key
            if old is _MISSING:
                del self.instances[base][index]
            else:
                self.instances[base][index] = old

    def instance(self, base: str, index: int) -> Optional[int]:
        per_base = self.instances.get(base)
        return None if per_base is None else per_base.get(index)

    def flatten(self) -> dict:
        out = dict(self.scalars)
        for base, per_base in self.instances.items():
            for index, value in per_base.items():
                out[f"{base}_{index}"] = value
        return out


def _target_parts(target: Target) -> Tuple[str, Optional[int]]:
    if isinstance(target, str):
        return target, None
    return target


def _atom_value(atom, index: Optional[int], side: str,
                assignment: Assignment) -> Optional[int]:
    """Value of an atom when it is already known, else None.

    For an indexed atom seen from a scalar target, the bound instances act
    collectively: the tightest of them applies (max below, min above).
    """
    if isinstance(atom, IntAtom):
        return atom.value
    if not atom.indexed:
        return assignment.scalars.get(atom.base)
    if index is not None:
        return assignment.instance(atom.base, index)
    per_base = assignment.instances.get(atom.base)
    if not per_base:
        return None
    values = per_base.values()
    return max(values) if side == "lower" else min(values)


def feasible_interval(constraints: Sequence[Constraint], target: Target,
                      assignment: Assignment, *,
                      default_range: Tuple[int, int] = DEFAULT_RANGE
                      ) -> Tuple[int, int]:
    """Inclusive interval of values currently admissible for ``target``.

    Every chain mentioning the target contributes the bounds implied by
    atoms whose values are already known; a strict "<" crossed on the way
    tightens the bound by one.  Atoms not yet assigned contribute nothing
    here (they are enforced at their own binding).  Sides without any bound
    fall back to ``default_range``.  The interval may come back empty
    (lo > hi); choosing what to do then is the caller's business.
    """
    base, index = _target_parts(target)
    want_indexed = index is not None
    lo: Optional[int] = None
    hi: Optional[int] = None
    for chain in constraints:
        atoms = chain.atoms
        ops = chain.ops
        for pos, atom in enumerate(atoms):
            if not (isinstance(atom, VarAtom) and atom.base == base
                    and atom.indexed == want_indexed):
                continue
            tighten = 0
            for q in range(pos - 1, -1, -1):
                if ops[q] == "<":
                    tighten += 1
                value = _atom_value(atoms[q], index, "lower", assignment)
                if value is not None:
                    bound = value + tighten
                    if lo is None or bound > lo:
                        lo = bound
            tighten = 0
            for q in range(pos + 1, len(atoms)):
                if ops[q - 1] == "<":
                    tighten += 1
                value = _atom_value(atoms[q], index, "upper", assignment)
                if value is not None:
                    bound = value - tighten
                    if hi is None or bound < hi:
                        hi = bound
    if lo is None:
        lo = default_range[0]
    if hi is None:
        hi = default_range[1]
    return lo, hi


def _chain_indices(chain: Constraint, assignment: Assignment) -> list:
    indices = set()
    for atom in chain.atoms:
        if isinstance(atom, VarAtom) and atom.indexed:
            indices.update(assignment.instances.get(atom.base, ()))
    return sorted(indices)


def _resolved(atom, index: Optional[int], assignment: Assignment) -> Optional[int]:
    if isinstance(atom, IntAtom):
        return atom.value
    if atom.indexed:
        return None if index is None else assignment.instance(atom.base, index)
    return assignment.scalars.get(atom.base)


def check_assignment(constraints: Sequence[Constraint],
                     assignment: Assignment) -> Optional[str]:
    """Check every chain over all bound instances; None when satisfied.

    Comparisons with an unbound side are skipped, so partially built
    assignments are never rejected for what they have not sampled yet.
    """
    for chain in constraints:
        has_indexed = any(isinstance(a, VarAtom) and a.indexed for a in chain.atoms)
        indices = _chain_indices(chain, assignment) if has_indexed else [None]
        for index in indices:
            values = [_resolved(atom, index, assignment) for atom in chain.atoms]
            for i, op in enumerate(chain.ops):
                left, right = values[i], values[i + 1]
                if left is None or right is None:
                    continue
                if op == "<=" and left > right:
                    return _violation(chain, index, left, op, right)
                if op == "<" and left >= right:
                    return _violation(chain, index, left, op, right)
    return None


def _violation(chain: Constraint, index: Optional[int], left: int, op: str,
               right: int) -> str:
    where = "" if index is None else f" at index {index}"
    return (f"constraint '{render_constraint(chain)}'{where} "
            f"violated: {left} {op} {right} is false")
