import pytest
from hypothesis import given, settings

from strategies import terms
from termbridge import (
    ANONYMOUS_VAR, Atom, Compound, FloatTerm, ForeignRef, IntTerm, RefHandle, RefRegistry,
    Strength, Var, functor_arity, is_ground, term_equal, variables_of,
)
from termbridge.demo import Person


def test_functor_arity():
    assert functor_arity(Atom("student")) == ("student", 0)
    assert functor_arity(Compound("person", [Atom("mary")])) == ("person", 1)
    assert functor_arity(Var("Person")) is None
    assert functor_arity(IntTerm(3)) is None
    assert functor_arity(ForeignRef(RefHandle(1))) is None


def test_term_equal_examples():
    assert term_equal(Compound("person", [Atom("mary")]), Compound("person", [Atom("mary")]))
    assert not term_equal(IntTerm(3), FloatTerm(3.0))
    assert not term_equal(Atom("a"), Var("A"))


def test_foreign_refs_compare_id_tokens_not_referents():
    reg = RefRegistry()
    a, b = reg.make_jref(Person("mary")), reg.make_jref(Person("mary"))
    assert a.id != b.id
    assert not term_equal(a, b)
    assert term_equal(a, ForeignRef(RefHandle(a.id, Strength.WEAK)))


def test_variables_of():
    X, Y = Var("X"), Var("Y")
    assert variables_of(Compound("student", [Var("Person")])) == [Var("Person")]
    assert variables_of(Compound("f", [X, Compound("g", [Y, X])])) == [X, Y]
    assert variables_of(Atom("a")) == []


def test_compound_needs_arguments():
    with pytest.raises(ValueError):
        Compound("f", [])


def test_var_names_are_validated():
    with pytest.raises(ValueError):
        Var("lower")
    assert ANONYMOUS_VAR.is_anonymous


def test_int_rejects_bool():
    with pytest.raises(TypeError):
        IntTerm(True)


def test_big_integers():
    assert IntTerm(2 ** 100).value == 2 ** 100


@settings(max_examples=200, deadline=None)
@given(terms(), terms(), terms())
def test_equality_is_an_equivalence(a, b, c):
    assert term_equal(a, a)
    assert term_equal(a, b) == term_equal(b, a)
    if term_equal(a, b) and term_equal(b, c):
        assert term_equal(a, c)


@settings(max_examples=200, deadline=None)
@given(terms())
def test_no_variables_iff_ground(t):
    assert (variables_of(t) == []) == is_ground(t)
