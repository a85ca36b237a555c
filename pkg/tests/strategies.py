"""Hypothesis strategies and independent oracles shared by the test modules."""

import itertools

from hypothesis import strategies as st

from termbridge import Atom, Compound, FloatTerm, IntTerm, Term, Var
from termbridge.terms import iter_subterms

ATOM_NAMES = st.one_of(
    st.sampled_from(["a", "b", "c", "mary", "person", "[]", "true", "fail"]),
    st.sampled_from([",", ";", "=", ".", "|", "hello world", "It's", "a\\b", "\n", "{}", "é", "X"]),
    st.text(min_size=0, max_size=6),
)
FUNCTORS = st.one_of(
    st.sampled_from(["f", "g", "h", "person", "student"]),
    st.sampled_from([",", ";", "=", ".", "'", "jref", "Foo", "[]", "{}"]),
    st.text(min_size=0, max_size=4),
)
VAR_NAMES = st.sampled_from(["X", "Y", "Z", "Person", "_G7", "_Tmp", "A1"])

atoms = ATOM_NAMES.map(Atom)
ints = st.integers(min_value=-(10 ** 30), max_value=10 ** 30).map(IntTerm)
floats = st.floats(allow_nan=False, allow_infinity=False).map(FloatTerm)
variables = VAR_NAMES.map(Var)


def terms(leaves=None, max_leaves=12):
    leaves = leaves or st.one_of(atoms, ints, floats, variables)
    return st.recursive(
        leaves,
        lambda children: st.builds(Compound, FUNCTORS, st.lists(children, min_size=1, max_size=3)),
        max_leaves=max_leaves,
    )


# unification tests use a small signature so that random pairs often unify
small_leaves = st.one_of(
    st.sampled_from([Atom("a"), Atom("b"), IntTerm(1)]),
    st.sampled_from([Var("X"), Var("Y"), Var("Z"), Var("W")]),
)
small_terms = st.recursive(
    small_leaves,
    lambda children: st.one_of(
        st.builds(lambda a: Compound("f", (a,)), children),
        st.builds(lambda a, b: Compound("g", (a, b)), children, children),
    ),
    max_leaves=8,
)
ground_small_terms = st.recursive(
    st.sampled_from([Atom("a"), Atom("b"), IntTerm(1)]),
    lambda children: st.one_of(
        st.builds(lambda a: Compound("f", (a,)), children),
        st.builds(lambda a, b: Compound("g", (a, b)), children, children),
    ),
    max_leaves=8,
)


def positions(t: Term, path=()):
    yield path, t
    if isinstance(t, Compound):
        for i, a in enumerate(t.args):
            yield from positions(a, path + (i,))


def generalize(t: Term, chosen, names):
    """Replace the subterms at ``chosen`` paths by variables.

    Equal subterms get the same variable (``names`` is shared between
    calls), so every generalization has ``t`` as an instance.
    """
    def go(u, path):
        if path in chosen:
            if u not in names:
                names[u] = Var(f"V{len(names)}")
            return names[u]
        if isinstance(u, Compound):
            return Compound(u.functor, tuple(go(a, path + (i,)) for i, a in enumerate(u.args)))
        return u
    return go(t, ())


def match(pattern: Term, t: Term, binding=None):
    """One-way matching: a binding making ``pattern`` identical to ``t``, or None."""
    binding = {} if binding is None else binding
    if isinstance(pattern, Var):
        if pattern in binding:
            return binding if binding[pattern] == t else None
        binding[pattern] = t
        return binding
    if isinstance(pattern, Compound):
        if not (isinstance(t, Compound) and t.functor == pattern.functor
                and len(t.args) == len(pattern.args)):
            return None
        for p, u in zip(pattern.args, t.args):
            if match(p, u, binding) is None:
                return None
        return binding
    return binding if pattern == t else None


def variant(a: Term, b: Term) -> bool:
    """Equal up to a bijective renaming of variables."""
    fwd, back = {}, {}

    def go(x, y):
        if isinstance(x, Var) and isinstance(y, Var):
            if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
                return False
            return True
        if isinstance(x, Compound) and isinstance(y, Compound):
            return (x.functor == y.functor and len(x.args) == len(y.args)
                    and all(go(p, q) for p, q in zip(x.args, y.args)))
        return type(x) is type(y) and x == y
    return go(a, b)


def has_var(t: Term) -> bool:
    return any(isinstance(u, Var) for u in iter_subterms(t))


# -- Datalog-like databases -------------------------------------------------

CONSTANTS = ["a", "b", "c", "d"]
EDB = {"p": 2, "q": 2, "r": 1}
RULES_TEXT = """
s(X, Z) :- p(X, Y), q(Y, Z).
t(X) :- r(X) ; p(X, X).
u(X, Y) :- s(X, Y), r(Y).
"""

facts = st.lists(
    st.sampled_from(list(EDB)).flatmap(
        lambda name: st.tuples(st.just(name), st.lists(st.sampled_from(CONSTANTS),
                                                       min_size=EDB[name], max_size=EDB[name]))),
    min_size=0, max_size=50,
)

ALL_PREDS = {**EDB, "s": 2, "t": 1, "u": 2}
query_args = st.one_of(st.sampled_from(CONSTANTS), st.sampled_from(["X", "Y", "Z"]))
query_atoms = st.sampled_from(sorted(ALL_PREDS)).flatmap(
    lambda name: st.tuples(st.just(name), st.lists(query_args, min_size=ALL_PREDS[name],
                                                   max_size=ALL_PREDS[name])))
queries = st.lists(query_atoms, min_size=1, max_size=3)


def bottom_up_model(fact_list):
    """Ground atoms true in the database, computed by direct enumeration."""
    model = {(name, tuple(args)) for name, args in fact_list}
    dom = CONSTANTS
    p = {args for name, args in model if name == "p"}
    q = {args for name, args in model if name == "q"}
    r = {args for name, args in model if name == "r"}
    s = {(x, z) for x, y, z in itertools.product(dom, repeat=3) if (x, y) in p and (y, z) in q}
    t = {(x,) for x in dom if (x,) in r or (x, x) in p}
    u = {(x, y) for x, y in itertools.product(dom, repeat=2) if (x, y) in s and (y,) in r}
    for name, rel in (("s", s), ("t", t), ("u", u)):
        model |= {(name, args) for args in rel}
    return model


def enumerate_answers(model, query):
    """Assignments of the query's variables over the constants satisfying every atom."""
    names = sorted({a for _, args in query for a in args if a[0].isupper()})
    answers = set()
    for values in itertools.product(CONSTANTS, repeat=len(names)):
        env = dict(zip(names, values))
        if all((name, tuple(env.get(a, a) for a in args)) in model for name, args in query):
            answers.add(tuple(values))
    return names, answers
