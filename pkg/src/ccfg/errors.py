"""Exception types shared across the package."""

from __future__ import annotations

from typing import Optional


class CcfgError(Exception):
    """Base class for every error raised by this package."""


class GrammarParseError(CcfgError):
    """A grammar document or one of its strings could not be parsed.

    ``section`` and ``index`` locate the offending entry inside the document
    container ("productions" or "constraints") when known.
    """

    def __init__(self, message: str, *, section: Optional[str] = None,
                 index: Optional[int] = None):
        super().__init__(message)
        self.section = section
        self.index = index

    def located(self, section: str, index: int) -> "GrammarParseError":
        """Return a copy annotated with its position in the document."""
        return type(self)(f"{section}[{index}]: {self}", section=section, index=index)


class MissingArrow(GrammarParseError):
    """A production line has no "->" separator."""


class InvalidNonterminal(GrammarParseError):
    """A malformed angle-bracket token or bad nonterminal name."""


class CounterExprUnsupported(GrammarParseError):
    """A repetition or subscript expression outside INT / IDENT / IDENT-INT."""


class MalformedConstraint(GrammarParseError):
    """A constraint with unknown operators or unparseable atoms."""


class NullGrammar(GrammarParseError):
    """The document carries no productions at all."""


class NonPositiveSubscript(CcfgError):
    """Instantiating a template produced a subscript smaller than one."""


class SampleError(CcfgError):
    """Base class for sampling failures."""

    index: Optional[int] = None  # element number when raised by sample_set


class RetriesExhausted(SampleError):
    """Every derivation attempt ran into a constraint dead end."""


class NodeBudgetExceeded(SampleError):
    """A derivation grew past the configured node budget."""


class OutputBudgetExceeded(SampleError):
    """A derivation emitted more bytes than the configured budget."""


class UnboundCounter(SampleError):
    """A subscript or repetition count was read before any binder set it."""


class TruthNotWellFormed(CcfgError):
    """The reference grammar of a scoring call failed validation."""


class EmptySolutionSet(CcfgError):
    """Effectiveness needs at least one test case and one wrong solution."""


class EmptyCorpus(CcfgError):
    """A corpus file or score list with nothing usable in it."""


class UnreadablePath(CcfgError):
    """A corpus path that cannot be opened."""


class ReferenceFailed(CcfgError):
    """The reference solution did not produce a usable output."""


class EmptyTestCase(CcfgError):
    """Mutation was asked to operate on an input without tokens."""


class OracleSpawnError(CcfgError):
    """The external grammar oracle could not be started."""


class OracleProtocolError(CcfgError):
    """The external grammar oracle returned an unusable response."""
