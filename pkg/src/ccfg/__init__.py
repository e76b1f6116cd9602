"""Toolkit for context-free grammars with counters.

Parse and render the grammar notation, validate well-formedness, sample
constraint-satisfying test cases, decide membership, score candidate
grammars against references, run solution harnesses, and drive bounded
refinement loops over external grammar oracles.
"""

from .constraints import (
    Assignment,
    check_assignment,
    feasible_interval,
)
from .errors import (
    CcfgError,
    CounterExprUnsupported,
    EmptyCorpus,
    EmptySolutionSet,
    EmptyTestCase,
    GrammarParseError,
    InvalidNonterminal,
    MalformedConstraint,
    MissingArrow,
    NodeBudgetExceeded,
    NonPositiveSubscript,
    NullGrammar,
    OracleProtocolError,
    OracleSpawnError,
    OutputBudgetExceeded,
    ReferenceFailed,
    RetriesExhausted,
    SampleError,
    TruthNotWellFormed,
    UnboundCounter,
    UnreadablePath,
)
from .harness import (
    Corpus,
    Problem,
    RunOutcome,
    TestSets,
    load_corpus,
    mutate_test_case,
    outputs_differ,
    run_matrix,
    run_solution,
    save_corpus,
)
from .metrics import (
    EffectivenessInput,
    ProblemScores,
    Reward,
    aggregate,
    effectiveness_for_problem,
    element_effectiveness,
    element_generality,
    element_validity,
    reward,
    reward_for_document,
    score_grammars,
    set_effectiveness,
    set_generality,
    set_validity,
)
from .model import (
    CharClass,
    Const,
    Constraint,
    CounterBinder,
    Grammar,
    IntAtom,
    Literal,
    Nonterminal,
    Production,
    SepNewline,
    SepSpace,
    Var,
    VarAtom,
    VariableTerminal,
    VarMinus,
    instantiate,
    parse_constraint,
    parse_grammar_document,
    parse_production,
    render_grammar,
    render_production,
)
from .recognizer import ParseResult, parse_test_case
from .refine import (
    Attempt,
    OracleRequest,
    RefinementTrace,
    build_request,
    refine,
)
from .sampler import (
    SampleLimits,
    TestCase,
    derive_seed,
    sample_set,
    sample_test_case,
)
from .wellformed import (
    GrammarIssue,
    WellFormednessReport,
    feedback_text,
    report_from_parse_error,
    validate,
)

__version__ = "0.1.0"
