"""Substitutions, unification and clause renaming."""

from __future__ import annotations

import itertools
from typing import TYPE_CHECKING, Callable, Dict, Iterator, Mapping, Optional

from termbridge.syntax import Clause
from termbridge.terms import Atom, Compound, FloatTerm, ForeignRef, IntTerm, Term, Var, transform

if TYPE_CHECKING:
    from termbridge.refbridge import RefRegistry


class Substitution(Mapping[Var, Term]):
    """An immutable variable binding map.

    Bindings are stored triangularly (a bound term may mention other bound
    variables) and resolved on access, so ``apply`` is idempotent and every
    read through the mapping interface sees fully substituted terms.
    """

    __slots__ = ("_map",)

    def __init__(self, bindings: Optional[Mapping[Var, Term]] = None):
        self._map: Dict[Var, Term] = {}
        for v, t in (bindings or {}).items():
            if t != v:
                self._map[v] = t

    @classmethod
    def _raw(cls, m: Dict[Var, Term]) -> "Substitution":
        s = cls.__new__(cls)
        s._map = m
        return s

    def __getitem__(self, v: Var) -> Term:
        if v not in self._map:
            raise KeyError(v)
        return self.apply(v)

    def __iter__(self) -> Iterator[Var]:
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v.name}: {t}" for v, t in self.bindings.items())
        return f"Substitution({{{inner}}})"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Substitution):
            return self.bindings == other.bindings
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    @property
    def bindings(self) -> Dict[Var, Term]:
        """Idempotent view: every value fully resolved."""
        return {v: self.apply(v) for v in self._map}

    def walk(self, t: Term) -> Term:
        m = self._map
        while isinstance(t, Var) and t in m:
            t = m[t]
        return t

    def apply(self, t: Term) -> Term:
        return apply(self, t)

    def extended(self, v: Var, t: Term) -> "Substitution":
        m = dict(self._map)
        m[v] = t
        return Substitution._raw(m)


EMPTY = Substitution()


def apply(s: Substitution, t: Term) -> Term:
    m = s._map
    if not m:
        return t
    return _resolve(m, t)


def _resolve(m: Dict[Var, Term], t: Term) -> Term:
    def walk(u: Term) -> Term:
        while isinstance(u, Var) and u in m:
            u = m[u]
        return u
    return transform(t, walk)


def _occurs(v: Var, t: Term, m: Dict[Var, Term]) -> bool:
    stack = [t]
    while stack:
        cur = stack.pop()
        while isinstance(cur, Var) and cur in m:
            cur = m[cur]
        if cur == v:
            return True
        if isinstance(cur, Compound):
            stack.extend(cur.args)
    return False


def unify(
    a: Term,
    b: Term,
    s: Optional[Substitution] = None,
    registry: Optional["RefRegistry"] = None,
    *,
    occurs_check: bool = True,
    match_dead: bool = False,
) -> Optional[Substitution]:
    """Return the most general unifier of ``a`` and ``b`` extending ``s``.

    Returns None on failure.  Foreign references unify as constants: two of
    them unify iff both referents are live and equal under the registry's
    equality contract, and a dead reference unifies with nothing (not even a
    variable or itself).  ``match_dead=True`` relaxes that last rule so that
    database maintenance can still find clauses holding dead references;
    there a dead reference matches variables and references with the same id.
    """
    if registry is None:
        from termbridge.refbridge import default_registry

        registry = default_registry()
    m = dict(s._map) if s is not None else {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        while isinstance(x, Var) and x in m:
            x = m[x]
        while isinstance(y, Var) and y in m:
            y = m[y]
        if isinstance(x, Var) or isinstance(y, Var):
            if not isinstance(x, Var):
                x, y = y, x
            if isinstance(y, ForeignRef) and not match_dead and not registry.is_live(y.id):
                return None
            if x == y or x.is_anonymous or (isinstance(y, Var) and y.is_anonymous):
                continue
            if occurs_check and _occurs(x, y, m):
                return None
            m[x] = y
        elif isinstance(x, ForeignRef) or isinstance(y, ForeignRef):
            if not (isinstance(x, ForeignRef) and isinstance(y, ForeignRef)):
                return None
            if match_dead and x.id == y.id:
                continue
            if not registry.referents_equal(x.handle, y.handle):
                return None
        elif isinstance(x, Compound):
            if not (isinstance(y, Compound) and x.functor == y.functor
                    and len(x.args) == len(y.args)):
                return None
            stack.extend(zip(reversed(x.args), reversed(y.args)))
        elif isinstance(x, (Atom, IntTerm, FloatTerm)):
            if x != y:
                return None
        else:
            raise TypeError(f"cannot unify non-term {x!r}")
    return Substitution._raw(m)


class FreshNames:
    """Source of globally fresh variable names ``_G1``, ``_G2``, ..."""

    def __init__(self, prefix: str = "_G", start: int = 1):
        self.prefix = prefix
        self._counter = itertools.count(start)

    def __call__(self) -> Var:
        return Var(f"{self.prefix}{next(self._counter)}")


_global_fresh = FreshNames()


def rename_term(t: Term, fresh: Callable[[], Var], mapping: Optional[Dict[Var, Var]] = None) -> Term:
    """Replace every variable by a fresh one, preserving sharing.

    Each anonymous ``_`` occurrence gets its own fresh variable.
    """
    if mapping is None:
        mapping = {}

    def rename(u: Term) -> Term:
        if not isinstance(u, Var):
            return u
        if u.is_anonymous:
            return fresh()
        if u not in mapping:
            mapping[u] = fresh()
        return mapping[u]
    return transform(t, rename)


def rename_apart(c: Clause, fresh: Optional[Callable[[], Var]] = None) -> Clause:
    fresh = fresh or _global_fresh
    mapping: Dict[Var, Var] = {}
    head = rename_term(c.head, fresh, mapping)
    body = rename_term(c.body, fresh, mapping)
    return Clause(head, body)

