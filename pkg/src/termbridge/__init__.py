"""An embedded logic engine with customisable handling of host object references."""

from termbridge.conversion import (
    DEFAULT_CONTEXT,
    ContextBuilder,
    ConversionContext,
    Converter,
    build_context,
    deserialize_term,
    register_codec,
    serialize_term,
)
from termbridge.demo import Person, PersonConverter
from termbridge.engine import ClauseDatabase, Engine, Query, Solution
from termbridge.errors import (
    ConversionError,
    DeadReferenceError,
    GoalTypeError,
    InvalidClauseError,
    KeyConflictError,
    NoCodecError,
    NoSolutionError,
    NotAReferenceError,
    ParseError,
    ResolutionDepthError,
    TermBridgeError,
)
from termbridge.refbridge import RefRegistry, Sweep, default_registry, register_equality
from termbridge.syntax import Clause, SourceSpan, parse_clause, parse_program, parse_term, print_term
from termbridge.terms import (
    ANONYMOUS_VAR,
    Atom,
    Compound,
    FloatTerm,
    ForeignRef,
    IntTerm,
    RefHandle,
    Strength,
    Term,
    Var,
    functor_arity,
    is_ground,
    term_equal,
    variables_of,
)
from termbridge.unify import Substitution, apply, rename_apart, unify

__version__ = "0.1.0"

__all__ = [
    "ANONYMOUS_VAR", "Atom", "Clause", "ClauseDatabase", "Compound", "ContextBuilder",
    "ConversionContext", "ConversionError", "Converter", "DEFAULT_CONTEXT",
    "DeadReferenceError", "Engine", "FloatTerm", "ForeignRef", "GoalTypeError", "IntTerm",
    "InvalidClauseError", "KeyConflictError", "NoCodecError", "NoSolutionError",
    "NotAReferenceError", "ParseError", "Person", "PersonConverter", "Query", "RefHandle",
    "RefRegistry", "ResolutionDepthError", "Solution", "SourceSpan", "Strength",
    "Substitution", "Sweep", "Term", "TermBridgeError", "Var", "apply", "build_context",
    "default_registry", "deserialize_term", "functor_arity", "is_ground", "parse_clause",
    "parse_program", "parse_term", "print_term", "register_codec", "register_equality",
    "rename_apart", "serialize_term", "term_equal", "unify", "variables_of",
]
