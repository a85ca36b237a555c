"""Embedded clause database with depth-first SLD resolution."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple, Union

from termbridge.conversion import DEFAULT_CONTEXT, ConversionContext
from termbridge.errors import GoalTypeError, InvalidClauseError, NoSolutionError, ResolutionDepthError
from termbridge.refbridge import RefRegistry, default_registry
from termbridge.syntax import Clause, parse_program, print_term
from termbridge.terms import (
    TRUE,
    Atom,
    Compound,
    Term,
    Var,
    functor_arity,
    variables_of,
)
from termbridge.unify import EMPTY, FreshNames, Substitution, rename_apart, unify

log = logging.getLogger(__name__)

DEFAULT_DEPTH_LIMIT = 10 ** 6

PredicateKey = Tuple[str, int]
# a goal list is a cons chain: (goal, rest) or None
Goals = Optional[Tuple[Term, Any]]
State = Tuple[Goals, Substitution, int]


class ClauseDatabase:
    """Clauses grouped by predicate, in insertion order."""

    def __init__(self) -> None:
        self.predicates: Dict[PredicateKey, List[Clause]] = {}
        self._snapshots: Dict[PredicateKey, Tuple[Clause, ...]] = {}

    def add(self, clause: Clause) -> None:
        key = functor_arity(clause.head)
        self.predicates.setdefault(key, []).append(clause)
        self._snapshots.pop(key, None)

    def snapshot(self, key: PredicateKey) -> Tuple[Clause, ...]:
        snap = self._snapshots.get(key)
        if snap is None:
            snap = self._snapshots[key] = tuple(self.predicates.get(key, ()))
        return snap

    def replace(self, key: PredicateKey, clauses: List[Clause]) -> None:
        if clauses:
            self.predicates[key] = clauses
        else:
            self.predicates.pop(key, None)
        self._snapshots.pop(key, None)

    def clauses(self, key: Optional[PredicateKey] = None) -> List[Clause]:
        if key is not None:
            return list(self.predicates.get(key, ()))
        return [c for cs in self.predicates.values() for c in cs]

    def __len__(self) -> int:
        return sum(len(cs) for cs in self.predicates.values())


class Solution(Mapping[str, Term]):
    """One answer: query variable name -> fully substituted term."""

    def __init__(self, bindings: Dict[str, Term], ctx: ConversionContext):
        self._bindings = bindings
        self._ctx = ctx

    def __getitem__(self, name: str) -> Term:
        return self._bindings[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __repr__(self) -> str:
        return f"Solution({self.render()})"

    def referent(self, name: str) -> Any:
        """Referent of the reference (or association key) bound to ``name``."""
        return self._ctx.registry.referent_of(self._bindings[name])

    def to_object(self, name: str, target: Optional[type] = None) -> Any:
        return self._ctx.from_term(self._bindings[name], target)

    def render(self) -> str:
        """``Name = term`` pairs; variables left unbound are omitted, ``true`` if none remain."""
        pairs = [f"{k} = {print_term(v, 699)}" for k, v in self._bindings.items()
                 if v != Var(k)]
        return ", ".join(pairs) if pairs else "true"


class _Choices:
    """Clause alternatives for one call, computed one step ahead.

    Looking ahead lets the solver drop a choice point as soon as its last
    alternative is taken, so deterministic recursion runs in constant stack.
    """

    __slots__ = ("engine", "goal", "rest", "subst", "depth", "clauses", "i", "pending")

    def __init__(self, engine: "Engine", goal: Term, rest: Goals, subst: Substitution,
                 depth: int, clauses: Tuple[Clause, ...]):
        self.engine = engine
        self.goal = goal
        self.rest = rest
        self.subst = subst
        self.depth = depth
        self.clauses = clauses
        self.i = 0
        self.pending = self._advance()

    def _advance(self) -> Optional[State]:
        engine = self.engine
        while self.i < len(self.clauses):
            clause = rename_apart(self.clauses[self.i], engine._fresh)
            self.i += 1
            s = unify(self.goal, clause.head, self.subst, engine.registry,
                      occurs_check=engine.occurs_check)
            if s is not None:
                rest = self.rest if clause.body == TRUE else (clause.body, self.rest)
                return rest, s, self.depth
        return None

    def next(self) -> Optional[State]:
        state, self.pending = self.pending, None
        if state is not None:
            self.pending = self._advance()
        return state


class _Alternative:
    __slots__ = ("pending",)

    def __init__(self, state: State):
        self.pending: Optional[State] = state

    def next(self) -> Optional[State]:
        state, self.pending = self.pending, None
        return state


class Engine:
    """An embedded logic database.

    Single-threaded: assert/retract, query iteration and collection passes on
    the shared registry must be serialised by the caller.
    """

    def __init__(self, registry: Optional[RefRegistry] = None, *,
                 depth_limit: int = DEFAULT_DEPTH_LIMIT, occurs_check: bool = True):
        self.registry = registry if registry is not None else default_registry()
        self.depth_limit = depth_limit
        self.occurs_check = occurs_check
        self.database = ClauseDatabase()
        self.default_context = DEFAULT_CONTEXT.with_registry(self.registry)
        self._fresh = FreshNames("_G")

    # -- database ----------------------------------------------------------

    def assertz(self, clause: Union[Clause, Term], body: Optional[Term] = None) -> None:
        if not isinstance(clause, Clause):
            if not isinstance(clause, (Atom, Compound)):
                raise InvalidClauseError(f"cannot assert {clause!r}: head must be an atom or compound")
            clause = Clause(clause, body if body is not None else TRUE)
        self.database.add(clause)

    def retract_all(self, head_pattern: Term) -> int:
        """Remove every clause whose head unifies with ``head_pattern``.

        Dead references in stored heads still match here, so cleaning tasks
        can retract the clauses that mention them.
        """
        key = functor_arity(head_pattern)
        if key is None:
            raise GoalTypeError(f"retract pattern must be an atom or compound: {head_pattern!r}")
        kept, removed = [], 0
        for clause in self.database.clauses(key):
            renamed = rename_apart(clause, self._fresh)
            if unify(renamed.head, head_pattern, EMPTY, self.registry,
                     occurs_check=self.occurs_check, match_dead=True) is not None:
                removed += 1
            else:
                kept.append(clause)
        if removed:
            self.database.replace(key, kept)
        return removed

    def consult(self, path: Union[str, Path]) -> int:
        text = Path(path).read_text(encoding="utf-8")
        return self.consult_text(text)

    def consult_text(self, text: str) -> int:
        clauses = parse_program(text)
        for c in clauses:
            self.assertz(c)
        return len(clauses)

    # -- queries -----------------------------------------------------------

    def query(self, goal: Term, ctx: Optional[ConversionContext] = None) -> "Query":
        if ctx is None:
            ctx = self.default_context
        elif not ctx.bound:
            ctx = ctx.with_registry(self.registry)
        return Query(self, goal, ctx)

    def solve(self, goal: Term) -> Iterator[Substitution]:
        """Answer substitutions for ``goal``, depth-first, in clause order."""
        limit = self.depth_limit
        stack: List[Any] = []
        state: Optional[State] = ((goal, None), EMPTY, 0)
        while True:
            if state is None:
                while stack and state is None:
                    top = stack[-1]
                    state = top.next()
                    if top.pending is None:
                        stack.pop()
                if state is None:
                    return
            goals, s, depth = state
            if goals is None:
                state = None
                yield s
                continue
            goal_term, rest = goals
            goal_term = s.walk(goal_term)
            if isinstance(goal_term, Var):
                raise GoalTypeError("goal is an unbound variable")
            key = functor_arity(goal_term)
            if key is None:
                raise GoalTypeError(f"goal is not callable: {print_term(s.apply(goal_term))}")
            if key == ("true", 0):
                state = (rest, s, depth)
            elif key == ("fail", 0):
                state = None
            elif key == (",", 2):
                left, right = goal_term.args
                state = ((left, (right, rest)), s, depth)
            elif key == (";", 2):
                left, right = goal_term.args
                stack.append(_Alternative(((right, rest), s, depth)))
                state = ((left, rest), s, depth)
            elif key == ("=", 2):
                left, right = goal_term.args
                s2 = unify(left, right, s, self.registry, occurs_check=self.occurs_check)
                state = None if s2 is None else (rest, s2, depth)
            else:
                if depth >= limit:
                    raise ResolutionDepthError(
                        f"resolution depth limit {limit} exceeded at {print_term(goal_term)}")
                choices = _Choices(self, goal_term, rest, s, depth + 1,
                                   self.database.snapshot(key))
                state = choices.next()
                if choices.pending is not None:
                    stack.append(choices)


class Query:
    """A lazy, single-pass handle on the solutions of one goal."""

    def __init__(self, engine: Engine, goal: Term, ctx: ConversionContext):
        if not isinstance(goal, (Atom, Compound, Var)):
            raise GoalTypeError(f"goal is not callable: {print_term(goal)}")
        self.engine = engine
        self.goal = goal
        self.context = ctx
        self._vars = [v for v in variables_of(goal) if not v.is_anonymous]
        self._cursor: Optional[Iterator[Substitution]] = None
        self._done = False

    def __iter__(self) -> Iterator[Solution]:
        if self._cursor is None:
            self._cursor = self.engine.solve(self.goal)
        while not self._done:
            try:
                s = next(self._cursor)
            except StopIteration:
                self._done = True
                return
            yield Solution({v.name: s.apply(v) for v in self._vars}, self.context)

    def close(self) -> None:
        self._done = True
        if self._cursor is not None:
            self._cursor.close()

    def first(self) -> Optional[Solution]:
        for sol in self:
            self.close()
            return sol
        return None

    def has_solution(self) -> bool:
        return self.first() is not None

    def one_solution_or_throw(self) -> Solution:
        sol = self.first()
        if sol is None:
            raise NoSolutionError(f"no solution for {print_term(self.goal)}")
        return sol

    def all_solutions(self) -> List[Solution]:
        return list(self)

    def select_object(self, var_name: str, target: Optional[type] = None) -> "ObjectSelection":
        if var_name not in {v.name for v in self._vars}:
            raise KeyError(f"{var_name} is not a variable of {print_term(self.goal)}")
        return ObjectSelection(self, var_name, target)


class ObjectSelection:
    """Solutions of a query adapted, one by one, to host objects."""

    def __init__(self, query: Query, var_name: str, target: Optional[type] = None):
        self.query = query
        self.var_name = var_name
        self.target = target

    def __iter__(self) -> Iterator[Any]:
        ctx = self.query.context
        for sol in self.query:
            yield ctx.from_term(sol[self.var_name], self.target)

    def one_solution_or_throw(self) -> Any:
        sol = self.query.one_solution_or_throw()
        return self.query.context.from_term(sol[self.var_name], self.target)

    def all_solutions(self) -> List[Any]:
        return list(self)
