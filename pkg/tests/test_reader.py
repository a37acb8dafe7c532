import pytest
from hypothesis import given, strategies as st

from lintab.reader import ParseError, parse_program, parse_query, program_to_text
from lintab.terms import Functor, Struct, Var, functor, term_tokens, variant

PATH_PROG = (
    ":- table path/2.\n"
    "path(X,Z) :- edge(X,Y), path(Y,Z).\n"
    "path(X,Z) :- edge(X,Z)."
)


def clause_sig(c):
    wrapper = functor("clause sig", 1 + len(c.body))
    return term_tokens(Struct(wrapper, (c.head,) + c.body))


def program_sig(prog):
    preds = {
        repr(f): [clause_sig(c) for c in cs] for f, cs in prog.predicates.items()
    }
    tabled = sorted(repr(f) for f in prog.tabled)
    return preds, tabled


def test_parse_path_program():
    prog = parse_program(PATH_PROG)
    assert functor("path", 2) in prog.tabled
    assert len(prog.tabled) == 1
    assert len(prog.clauses(functor("path", 2))) == 2
    assert prog.clauses(functor("edge", 2)) == []
    assert functor("edge", 2) in prog.predicates
    c0, c1 = prog.clauses(functor("path", 2))
    assert (c0.source_index, c1.source_index) == (0, 1)
    assert len(c0.body) == 2 and len(c1.body) == 1


def test_parse_single_fact():
    prog = parse_program("p(a).")
    assert prog.tabled == set()
    (c,) = prog.clauses(functor("p", 1))
    assert c.body == ()
    assert variant(c.head, Struct(functor("p", 1), (functor("a", 0),)))


def test_atom_fact_and_zero_arity():
    prog = parse_program("go.\ngo :- p(1).")
    cs = prog.clauses(functor("go", 0))
    assert len(cs) == 2
    assert cs[0].head is functor("go", 0)


def test_dangling_neck_is_error():
    with pytest.raises(ParseError):
        parse_program("p(a) :-")


def test_error_carries_position():
    try:
        parse_program("p(a).\nq(b) :- ,")
        assert False, "should not parse"
    except ParseError as e:
        assert e.line == 2
        assert e.col == 9


def test_unexpected_character_position():
    try:
        parse_program("p(a).\n\nq(#).")
        assert False
    except ParseError as e:
        assert (e.line, e.col) == (3, 3)


def test_duplicate_table_directive_idempotent():
    prog = parse_program(":- table p/1.\n:- table p/1.\np(1).")
    assert prog.tabled == {functor("p", 1)}


def test_unsupported_directive():
    with pytest.raises(ParseError):
        parse_program(":- dynamic p/1.")


def test_variables_scoped_per_clause():
    prog = parse_program("p(X) :- q(X), r(X).\np(X).")
    c0, c1 = prog.clauses(functor("p", 1))
    x_head = c0.head.args[0]
    assert c0.body[0].args[0] is x_head
    assert c0.body[1].args[0] is x_head
    assert c1.head.args[0] is not x_head


def test_anonymous_vars_distinct():
    prog = parse_program("p(_, _).")
    (c,) = prog.clauses(functor("p", 2))
    a, b = c.head.args
    assert isinstance(a, Var) and isinstance(b, Var) and a is not b


def test_comments_and_whitespace():
    prog = parse_program("% intro\np(a). % trailing\n% last line")
    assert len(prog.clauses(functor("p", 1))) == 1


def test_quoted_atom():
    prog = parse_program("p('hello world').")
    (c,) = prog.clauses(functor("p", 1))
    assert c.head.args[0] is functor("hello world", 0)


def test_integers_parse():
    prog = parse_program("edge(1,2).\nedge(2,3).")
    cs = prog.clauses(functor("edge", 2))
    assert cs[0].head.args == (1, 2)
    assert cs[1].head.args == (2, 3)


def test_head_must_be_callable():
    with pytest.raises(ParseError):
        parse_program("7.")
    with pytest.raises(ParseError):
        parse_program("X :- p(a).")


def test_parse_query_single():
    goals = parse_query("path(X,Y).")
    assert len(goals) == 1
    assert goals[0].functor is functor("path", 2)


def test_parse_query_conjunction_shares_vars():
    g1, g2 = parse_query("edge(1,X), path(X,Y).")
    assert g1.args[1] is g2.args[0]


def test_parse_query_empty_is_error():
    with pytest.raises(ParseError):
        parse_query("")
    with pytest.raises(ParseError):
        parse_query("   % nothing\n")


def test_parse_query_requires_period():
    with pytest.raises(ParseError):
        parse_query("path(X,Y)")


def test_parse_query_rejects_trailing_text():
    with pytest.raises(ParseError):
        parse_query("p(X). q(Y).")


def test_roundtrip_path_program():
    prog1 = parse_program(PATH_PROG)
    prog2 = parse_program(program_to_text(prog1))
    assert program_sig(prog1) == program_sig(prog2)


# --- property: print/parse round-trip ---------------------------------

_atoms = st.sampled_from(["a", "b", "c", "nil", "hello world", "q'd"])
_vnames = st.sampled_from(["X", "Y", "Z", "_", "_Acc"])

def _atom_text(n):
    if n.isidentifier() and n[0].islower():
        return n
    return "'" + n.replace("\\", "\\\\").replace("'", "\\'") + "'"


_term_text = st.recursive(
    st.integers(0, 99).map(str) | _atoms.map(_atom_text) | _vnames,
    lambda ch: st.tuples(
        st.sampled_from(["f", "g", "p"]), st.lists(ch, min_size=1, max_size=3)
    ).map(lambda t: f"{t[0]}({','.join(t[1])})"),
    max_leaves=6,
)

_callable_text = st.tuples(
    st.sampled_from(["p", "q", "r"]), st.lists(_term_text, min_size=1, max_size=3)
).map(lambda t: f"{t[0]}({','.join(t[1])})")

_clause_text = st.one_of(
    _callable_text.map(lambda h: h + "."),
    st.tuples(_callable_text, st.lists(_callable_text, min_size=1, max_size=3)).map(
        lambda t: f"{t[0]} :- {', '.join(t[1])}."
    ),
)

_program_text = st.tuples(
    st.booleans(), st.lists(_clause_text, min_size=1, max_size=6)
).map(lambda t: (":- table p/2.\n" if t[0] else "") + "\n".join(t[1]))


@given(_program_text)
def test_prop_roundtrip(text):
    prog1 = parse_program(text)
    prog2 = parse_program(program_to_text(prog1))
    assert program_sig(prog1) == program_sig(prog2)


@given(_program_text)
def test_prop_clause_order_dense(text):
    prog = parse_program(text)
    for cs in prog.predicates.values():
        assert [c.source_index for c in cs] == list(range(len(cs)))
