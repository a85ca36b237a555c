import pytest
from hypothesis import given, settings

from strategies import RULES_TEXT, bottom_up_model, enumerate_answers, facts, queries
from termbridge import (
    ANONYMOUS_VAR, Atom, Compound, ContextBuilder, ConversionError, Engine, GoalTypeError,
    InvalidClauseError, IntTerm, NoSolutionError, ParseError, RefRegistry, ResolutionDepthError,
    Var, parse_term, print_term,
)
from termbridge.demo import Person, PersonConverter


def student(arg):
    return Compound("student", [arg])


def answers(engine, goal_text, var="X"):
    return [print_term(s[var]) for s in engine.query(parse_term(goal_text)).all_solutions()]


class TestAssertRetract:
    def test_assert_fact(self, engine):
        engine.assertz(parse_term("student(person(mary))"))
        assert len(engine.database.clauses(("student", 1))) == 1

    def test_assert_foreign_ref_argument_is_stored_verbatim(self, engine, registry):
        r = registry.jref(Person("mary"))
        engine.assertz(student(r))
        (clause,) = engine.database.clauses(("student", 1))
        assert clause.head.args[0] == r

    @pytest.mark.parametrize("head", [Var("X"), IntTerm(3)])
    def test_invalid_heads(self, engine, head):
        with pytest.raises(InvalidClauseError):
            engine.assertz(head)

    def test_foreign_ref_head_is_invalid(self, engine, registry):
        with pytest.raises(InvalidClauseError):
            engine.assertz(registry.jref(object()))

    def test_retract_all_with_anonymous(self, engine):
        engine.consult_text("student(person(mary)). student(person(bob)). other(x).")
        assert engine.retract_all(student(ANONYMOUS_VAR)) == 2
        assert engine.database.clauses(("student", 1)) == []
        assert len(engine.database) == 1

    def test_retract_all_without_match(self, engine):
        engine.consult_text("student(person(mary)).")
        assert engine.retract_all(parse_term("student(person(bob))")) == 0
        assert engine.retract_all(parse_term("nothing(here)")) == 0

    def test_retract_pattern_bindings_do_not_leak_between_clauses(self, engine):
        engine.consult_text("p(a, a). p(a, b). p(b, b).")
        assert engine.retract_all(parse_term("p(X, X)")) == 2
        assert answers(engine, "p(a, X)") == ["b"]

    def test_assert_then_retract_is_a_no_op(self, engine):
        engine.consult_text("p(a). q(b).")
        before = engine.database.clauses()
        engine.assertz(parse_term("r(c)"))
        engine.retract_all(parse_term("r(c)"))
        assert engine.database.clauses() == before


class TestResolution:
    def test_single_solution(self, engine):
        engine.assertz(parse_term("student(person(mary))"))
        sol = engine.query(student(Var("Person"))).one_solution_or_throw()
        assert dict(sol) == {"Person": parse_term("person(mary)")}

    def test_disjunction_follows_clause_order(self, engine):
        engine.consult_text("p(a). q(b).")
        assert answers(engine, "p(X) ; q(X)") == ["a", "b"]

    def test_fail_and_true(self, engine):
        assert engine.query(Atom("fail")).all_solutions() == []
        assert engine.query(Atom("true")).has_solution()

    def test_unify_builtin(self, engine):
        sol = engine.query(parse_term("X = a")).one_solution_or_throw()
        assert sol["X"] == Atom("a")
        assert not engine.query(parse_term("f(X) = g(X)")).has_solution()

    def test_conjunction_and_rules(self, engine):
        engine.consult_text("""
            parent(tom, bob). parent(bob, ann). parent(bob, pat).
            grandparent(X, Z) :- parent(X, Y), parent(Y, Z).
        """)
        assert answers(engine, "grandparent(tom, X)") == ["ann", "pat"]

    def test_member_recursion_matches_enumeration(self, engine):
        engine.consult_text("""
            member(X, [X|_]).
            member(X, [_|T]) :- member(X, T).
        """)
        items = ["a", "b", "c"]
        assert answers(engine, "member(X, [a,b,c])") == list(items)

    def test_insertion_order(self, engine):
        engine.consult_text("p(a). p(b).")
        assert answers(engine, "p(X)") == ["a", "b"]

    def test_unknown_predicate_has_no_solutions(self, engine):
        assert not engine.query(parse_term("nope(X)")).has_solution()
        assert not engine.query(student(ANONYMOUS_VAR)).has_solution()

    def test_no_solution_error(self, engine):
        with pytest.raises(NoSolutionError):
            engine.query(student(Var("Person"))).one_solution_or_throw()

    def test_solution_binds_every_goal_variable(self, engine):
        engine.consult_text("p(a, Y).")
        sol = engine.query(parse_term("p(X, Z)")).one_solution_or_throw()
        assert set(sol) == {"X", "Z"}
        assert isinstance(sol["Z"], Var)

    def test_handles_are_single_pass(self, engine):
        engine.consult_text("p(a). p(b).")
        q = engine.query(parse_term("p(X)"))
        assert q.has_solution()
        assert q.all_solutions() == []
        assert len(engine.query(parse_term("p(X)")).all_solutions()) == 2

    def test_logical_update_view(self, engine):
        engine.consult_text("p(a). p(b).")
        seen = []
        for sol in engine.query(parse_term("p(X)")):
            seen.append(print_term(sol["X"]))
            engine.assertz(parse_term("p(z)"))
        assert seen == ["a", "b"]
        assert answers(engine, "p(X)") == ["a", "b", "z", "z"]

    def test_query_does_not_mutate_database(self, engine):
        engine.consult_text("p(X) :- q(X). q(a). q(b).")
        before = engine.database.clauses()
        engine.query(parse_term("p(Y)")).all_solutions()
        assert engine.database.clauses() == before

    def test_depth_limit_is_a_resource_error(self, registry):
        engine = Engine(registry, depth_limit=500)
        engine.consult_text("loop :- loop.")
        with pytest.raises(ResolutionDepthError):
            engine.query(Atom("loop")).has_solution()

    def test_deterministic_recursion_runs_without_stack_growth(self, registry):
        engine = Engine(registry)
        engine.consult_text("count(z). count(s(N)) :- count(N).")
        t = Atom("z")
        for _ in range(3000):
            t = Compound("s", [t])
        engine.assertz(Compound("deep", [t]))
        assert engine.query(parse_term("deep(T), count(T)")).has_solution()

    def test_unbound_goal_is_an_error(self, engine):
        with pytest.raises(GoalTypeError):
            engine.query(parse_term("X = Y, X")).has_solution()

    def test_consult_file(self, engine, tmp_path):
        path = tmp_path / "prog.pl"
        path.write_text("% demo\nstudent(person(mary)).\nq(X) :- student(X).\n", encoding="utf-8")
        assert engine.consult(path) == 2
        assert answers(engine, "q(X)") == ["person(mary)"]

    def test_consult_syntax_error(self, engine):
        with pytest.raises(ParseError):
            engine.consult_text("p(a). q(")


class TestSelectObject:
    def test_equal_not_identical_through_converter(self, engine, person_ctx):
        mary = Person("mary")
        engine.assertz(student(person_ctx.to_term(mary)))
        got = engine.query(student(Var("Person")), person_ctx).select_object("Person").one_solution_or_throw()
        assert got == mary and got is not mary

    def test_identity_through_association(self, engine, person_ctx):
        mary = Person("mary")
        engine.assertz(student(person_ctx.new_ref_term(mary, person_ctx.to_term(mary))))
        got = engine.query(student(Var("Person")), person_ctx).select_object("Person").one_solution_or_throw()
        assert got is mary

    def test_conversion_error_without_converter(self, engine):
        engine.assertz(parse_term("student(person(mary))"))
        sel = engine.query(student(Var("Person"))).select_object("Person")
        with pytest.raises(ConversionError):
            sel.one_solution_or_throw()

    def test_lazy_per_element_errors(self, engine, person_ctx):
        engine.consult_text("student(person(mary)). student(person(X)).")
        it = iter(engine.query(student(Var("P")), person_ctx).select_object("P"))
        assert next(it) == Person("mary")
        with pytest.raises(ConversionError):
            next(it)

    def test_unknown_variable(self, engine):
        with pytest.raises(KeyError):
            engine.query(student(Var("P"))).select_object("Q")

    def test_unbound_context_adopts_engine_registry(self, registry):
        engine = Engine(registry)
        ctx = ContextBuilder.create().register(PersonConverter()).build()
        mary = Person("mary")
        key = registry.new_ref_term(mary, Compound("person", [Atom("mary")]))
        engine.assertz(student(key))
        got = engine.query(student(Var("P")), ctx).select_object("P").one_solution_or_throw()
        assert got is mary


def run_datalog_check(fact_list, query):
    engine = Engine(RefRegistry())
    engine.consult_text(RULES_TEXT)
    for name, args in fact_list:
        engine.assertz(Compound(name, [Atom(a) for a in args]))
    goal_text = ", ".join(f"{name}({', '.join(args)})" for name, args in query)
    names, expected = enumerate_answers(bottom_up_model(fact_list), query)
    got = set()
    for sol in engine.query(parse_term(goal_text)).all_solutions():
        got.add(tuple(sol[n].name for n in names))
    assert got == expected


@settings(max_examples=200, deadline=None)
@given(facts, queries)
def test_sld_matches_ground_enumeration(fact_list, query):
    run_datalog_check(fact_list, query)
