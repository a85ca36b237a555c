"""Term data model: atoms, numbers, variables, compounds and foreign references."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Tuple, Union

VAR_NAME = re.compile(r"[A-Z_][A-Za-z0-9_]*\Z")


class Strength(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    SOFT = "soft"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RefHandle:
    """Identity token of a registered foreign object.

    Equality and hashing look at ``id`` only: the strength of an id never
    changes after creation.
    """

    id: int
    strength: Strength = field(default=Strength.STRONG, compare=False)

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("handle id must be non-negative")


class Term:
    """Base class of every logic datum."""

    __slots__ = ()

    def __str__(self) -> str:
        from termbridge.syntax import print_term

        return print_term(self)


@dataclass(frozen=True, repr=False)
class Atom(Term):
    name: str

    def __repr__(self) -> str:
        return f"Atom({self.name!r})"


@dataclass(frozen=True, repr=False)
class IntTerm(Term):
    value: int

    def __post_init__(self) -> None:
        # bool is an int subclass; True must not sneak in as 1
        if type(self.value) is not int:
            raise TypeError(f"IntTerm needs an int, got {type(self.value).__name__}")

    def __repr__(self) -> str:
        return f"IntTerm({self.value})"


@dataclass(frozen=True, repr=False)
class FloatTerm(Term):
    value: float

    def __post_init__(self) -> None:
        if type(self.value) is not float:
            object.__setattr__(self, "value", float(self.value))

    def __repr__(self) -> str:
        return f"FloatTerm({self.value!r})"


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str

    def __post_init__(self) -> None:
        if not VAR_NAME.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")

    @property
    def is_anonymous(self) -> bool:
        return self.name == "_"

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False, eq=False)
class Compound(Term):
    functor: str
    args: Tuple[Term, ...]

    def __init__(self, functor: str, args: Iterable[Term]):
        args = tuple(args)
        if not args:
            raise ValueError("a compound needs at least one argument; use Atom")
        for a in args:
            if not isinstance(a, Term):
                raise TypeError(f"compound argument is not a term: {a!r}")
        object.__setattr__(self, "functor", functor)
        object.__setattr__(self, "args", args)
        # children hash in O(1) thanks to their own cache, so deep terms
        # never recurse here
        object.__setattr__(self, "_hash", hash((functor, args)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Compound):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, Compound):
                if not (isinstance(b, Compound) and a._hash == b._hash
                        and a.functor == b.functor and len(a.args) == len(b.args)):
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                return False
        return True

    @property
    def arity(self) -> int:
        return len(self.args)

    def arg(self, i: int) -> Term:
        """1-based argument access."""
        return self.args[i - 1]

    def __repr__(self) -> str:
        return f"Compound({self.functor!r}, {list(self.args)!r})"


@dataclass(frozen=True, repr=False)
class ForeignRef(Term):
    """A term wrapping a host object by handle.

    The referent itself lives in a ``RefRegistry``; two ForeignRef terms are
    equal iff their handle ids coincide.
    """

    handle: RefHandle

    @property
    def id(self) -> int:
        return self.handle.id

    @property
    def strength(self) -> Strength:
        return self.handle.strength

    def __repr__(self) -> str:
        return f"ForeignRef({self.handle.id}, {self.handle.strength})"


ANONYMOUS_VAR = Var("_")
TRUE = Atom("true")
FAIL = Atom("fail")
NIL = Atom("[]")


def functor_arity(t: Term) -> Optional[Tuple[str, int]]:
    if isinstance(t, Atom):
        return (t.name, 0)
    if isinstance(t, Compound):
        return (t.functor, len(t.args))
    return None


def term_equal(a: Term, b: Term) -> bool:
    # dataclass equality is structural and class-sensitive; ForeignRef
    # compares handles, and handles compare ids only
    return a == b


def iter_subterms(t: Term) -> Iterator[Term]:
    """Pre-order, left to right."""
    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, Compound):
            stack.extend(reversed(cur.args))


def variables_of(t: Term) -> list:
    seen = {}
    for sub in iter_subterms(t):
        if isinstance(sub, Var) and sub not in seen:
            seen[sub] = None
    return list(seen)


def is_ground(t: Term) -> bool:
    return not any(isinstance(sub, Var) for sub in iter_subterms(t))


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    items = list(items)
    result = tail
    for item in reversed(items):
        result = Compound(".", (item, result))
    return result


def list_items(t: Term) -> Optional[Tuple[list, Term]]:
    """Split a ``'.'/2`` chain into its items and final tail.

    Returns None if ``t`` is not a list cell or ``[]``.
    """
    if t == NIL:
        return [], NIL
    if not (isinstance(t, Compound) and t.functor == "." and len(t.args) == 2):
        return None
    items = []
    while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def transform(t: Term, pre: Callable[[Term], Term]) -> Term:
    """Rebuild ``t`` bottom-up without recursion.

    ``pre`` maps each subterm before it is visited; when it returns a
    compound, that compound is traversed in turn.  Unchanged subterms are
    shared with the input.
    """
    top = pre(t)
    if not isinstance(top, Compound):
        return top
    # frame: [original, node, arg iterator, rebuilt args, changed]
    stack = [[t, top, iter(top.args), [], top is not t]]
    while True:
        frame = stack[-1]
        for a in frame[2]:
            r = pre(a)
            if isinstance(r, Compound):
                stack.append([a, r, iter(r.args), [], r is not a])
                break
            frame[3].append(r)
            if r is not a:
                frame[4] = True
        else:
            stack.pop()
            orig, node, _, built, changed = frame
            new = Compound(node.functor, built) if changed else node
            if not stack:
                return new
            parent = stack[-1]
            parent[3].append(new)
            if new is not orig:
                parent[4] = True


def compound(functor: str, *args: Term) -> Union[Atom, Compound]:
    """Build ``functor(args...)``, falling back to an atom for zero arguments."""
    if not args:
        return Atom(functor)
    return Compound(functor, args)
