"""Tests for the relational translation and the abstraction check."""

import pytest

from rcic import (
    App,
    Constr,
    Context,
    ErrorKind,
    Ind,
    Lam,
    PROP,
    Prod,
    SortT,
    TypeCheckError,
    Var,
    abstraction_check,
    alpha_eq,
    app,
    arrow,
    beta_normalize,
    check,
    elaborate,
    infer,
    infer_sort,
    parse_file,
    prime,
    primed,
    print_definition,
    print_inductive,
    print_term,
    relation_name,
    relation_sort,
    set_sort,
    translate_context,
    translate_definition,
    translate_inductive,
    translate_term,
    type_sort,
    witness,
)
from rcic.frontend import DInductive
from rcic.param import NameTriple, is_reserved

from conftest import fresh_prelude_env, load_declarations, term_in

NAT = Ind("Nat")


# ---------------------------------------------------------------------------
# Name scheme


def test_name_scheme():
    assert primed("x") == "x'"
    assert witness("x") == "x_R"
    assert relation_name("Nat") == "Nat_R"
    assert is_reserved("x'")
    assert is_reserved("plus_R")
    assert not is_reserved("plain")
    triple = NameTriple.from_base("n")
    assert (triple.base, triple.copy, triple.rel) == ("n", "n'", "n_R")


def test_prime():
    t = Lam("x", NAT, App(Var("f"), Var("x")))
    # Both the binder and free variables are renamed.
    assert prime(t) == Lam("x'", NAT, App(Var("f'"), Var("x'")))
    # Globals keep their names.
    assert prime(t, frozenset({"f"})) == Lam("x'", NAT, App(Var("f"), Var("x'")))
    # A binder shadowing a global is still renamed, and so are its uses.
    shadow = Lam("f", NAT, App(Var("f"), Var("y")))
    assert prime(shadow, frozenset({"f"})) == Lam("f'", NAT,
                                                  App(Var("f'"), Var("y'")))


def test_relation_sort():
    assert relation_sort(PROP) == PROP
    assert relation_sort(set_sort(0)) == PROP
    assert relation_sort(set_sort(3)) == PROP
    assert relation_sort(type_sort(2)) == type_sort(2)


# ---------------------------------------------------------------------------
# Clause-level translation


def test_translate_sort_clause(fresh_env):
    out = print_term(translate_term(fresh_env, SortT(PROP)), fresh_env)
    assert out == "fun (x x' : Prop) => x -> x' -> Prop"
    out = print_term(translate_term(fresh_env, SortT(set_sort(0))), fresh_env)
    assert out == "fun (x x' : Set0) => x -> x' -> Prop"
    # Type sorts keep their level.
    out = print_term(translate_term(fresh_env, SortT(type_sort(2))), fresh_env)
    assert out == "fun (x x' : Type2) => x -> x' -> Type2"


def test_translate_variable_and_globals(fresh_env):
    rel = translate_term(fresh_env, term_in(fresh_env, "succ"))
    assert rel == Constr("succ_R")
    rel = translate_term(fresh_env, NAT)
    assert rel == Ind("Nat_R")
    rel = translate_term(fresh_env, Var("double"))
    assert rel == Var("double_R")
    assert fresh_env.definition("double_R") is not None


def test_translate_product_clause(fresh_env):
    rel = beta_normalize(app(translate_term(fresh_env, arrow(NAT, NAT)),
                             Var("plus"), Var("plus")))
    # Elaborate the expectation with reserved names allowed.
    want = elaborate(fresh_env, parse_file(
        "check forall (x : Nat) (x' : Nat), Nat_R x x' "
        "-> Nat_R (plus x) (plus x').", allow_reserved=True).decls[0].term)
    assert alpha_eq(rel, want)


def test_translated_relation_sort_is_prop(fresh_env):
    # Small types translate to Prop-valued relations.
    for source in ("Nat", "Nat -> Nat", "List Nat", "Bool -> Nat -> Bool"):
        ty = term_in(fresh_env, source)
        rel = beta_normalize(app(translate_term(fresh_env, ty),
                                 Var("a"), Var("b")))
        ctx = Context().extend("a", ty).extend("b", ty)
        assert infer(fresh_env, ctx, rel) == SortT(PROP)


# ---------------------------------------------------------------------------
# Inductive translation goldens


def _golden_inductive(env, text):
    decl = parse_file(text, allow_reserved=True).decls[0]
    assert isinstance(decl, DInductive)
    arity = elaborate(env, decl.arity)
    constructors = tuple((c, elaborate(env, cty)) for c, cty in decl.constructors)
    return decl.name, decl.params, arity, constructors


def _assert_matches_golden(env, name, golden_text):
    registered = env.inductive(relation_name(name))
    gname, gparams, garity, gctors = _golden_inductive(env, golden_text)
    assert gname == registered.name
    assert gparams == registered.params
    assert alpha_eq(garity, registered.arity)
    assert len(gctors) == len(registered.constructors)
    for (gc, gty), (rc, rty) in zip(gctors, registered.constructors):
        assert gc == rc
        assert alpha_eq(gty, rty)


def test_bool_relation_golden(translated_env):
    _assert_matches_golden(translated_env, "Bool", """
        inductive Bool_R : Bool -> Bool -> Prop :=
          true_R : Bool_R true true
        | false_R : Bool_R false false.
    """)


def test_nat_relation_golden(translated_env):
    _assert_matches_golden(translated_env, "Nat", """
        inductive Nat_R : Nat -> Nat -> Prop :=
          zero_R : Nat_R zero zero
        | succ_R : forall (n : Nat) (n' : Nat),
            Nat_R n n' -> Nat_R (succ n) (succ n').
    """)


def test_list_relation_golden(translated_env):
    # One source parameter becomes three, and the relation lands in Prop
    # because the relation space of a Set0 is a Prop.
    _assert_matches_golden(translated_env, "List", """
        inductive List_R (A : Set0) (A' : Set0) (A_R : A -> A' -> Prop)
            : List A -> List A' -> Prop :=
          nil_R : List_R A A' A_R (nil A) (nil A')
        | cons_R : forall (h : A) (h' : A'), A_R h h' ->
            forall (t : List A) (t' : List A'), List_R A A' A_R t t' ->
            List_R A A' A_R (cons A h t) (cons A' h' t').
    """)


def test_unit_and_empty_relations(translated_env):
    _assert_matches_golden(translated_env, "Unit", """
        inductive Unit_R : Unit -> Unit -> Prop := tt_R : Unit_R tt tt.
    """)
    empty_r = translated_env.inductive("Empty_R")
    assert empty_r.constructors == ()
    assert alpha_eq(empty_r.arity,
                    arrow(Ind("Empty"), arrow(Ind("Empty"), SortT(PROP))))


def test_indexed_relation(fresh_env):
    load_declarations(fresh_env, """
        inductive Vec (A : Set0) : Nat -> Set0 :=
          vnil : Vec A zero
        | vcons : forall (n : Nat), A -> Vec A n -> Vec A (succ n).
    """)
    rel = translate_inductive(fresh_env, fresh_env.inductive("Vec")).relation
    # Three parameters, then a triple per index, then the two scrutinees.
    assert rel.params == 3
    golden = """
        inductive Vec_R (A : Set0) (A' : Set0) (A_R : A -> A' -> Prop)
            : forall (n : Nat) (n' : Nat), Nat_R n n' ->
              Vec A n -> Vec A' n' -> Prop :=
          vnil_R : Vec_R A A' A_R zero zero zero_R (vnil A) (vnil A')
        | vcons_R : forall (n : Nat) (n' : Nat) (n_R : Nat_R n n')
            (h : A) (h' : A'), A_R h h' ->
            forall (t : Vec A n) (t' : Vec A' n'),
            Vec_R A A' A_R n n' n_R t t' ->
            Vec_R A A' A_R (succ n) (succ n') (succ_R n n' n_R)
                  (vcons A n h t) (vcons A' n' h' t').
    """
    _assert_matches_golden(fresh_env, "Vec", golden)


def test_translate_inductive_idempotent(fresh_env):
    first = translate_inductive(fresh_env, fresh_env.inductive("Nat"))
    again = translate_inductive(fresh_env, fresh_env.inductive("Nat"))
    assert first.relation is again.relation
    assert first.constructors == (("zero", "zero_R"), ("succ", "succ_R"))


def test_translated_inductives_kernel_check(translated_env):
    # Redeclaring the produced relation in a fresh environment passes the
    # full inductive wellformedness check.
    env = fresh_prelude_env()
    for name in ("Bool", "Nat", "List", "Unit", "Empty"):
        translate_inductive(env, env.inductive(name))
        assert env.inductive(relation_name(name)) is not None


# ---------------------------------------------------------------------------
# Definition translation


def test_translate_definition_id(translated_env):
    d = translated_env.definition("id_R")
    golden = elaborate(translated_env, parse_file(
        "check forall (A : Set0) (A' : Set0) (A_R : A -> A' -> Prop) "
        "(x : A) (x' : A'), A_R x x' -> A_R (id A x) (id A' x').",
        allow_reserved=True).decls[0].term)
    assert alpha_eq(d.type, golden)


def test_translate_definition_fix(translated_env):
    d = translated_env.definition("plus_R")
    # The decreasing argument moves to the witness slot of its triple.
    assert d.body.decreasing == 2
    # The witness type relates plus to itself.
    golden = elaborate(translated_env, parse_file(
        "check forall (n : Nat) (n' : Nat), Nat_R n n' -> "
        "forall (m : Nat) (m' : Nat), Nat_R m m' -> "
        "Nat_R (plus n m) (plus n' m').", allow_reserved=True).decls[0].term)
    assert alpha_eq(d.type, golden)
    check(translated_env, Context(), d.body, d.type)


def test_translate_definition_unknown(fresh_env):
    with pytest.raises(TypeCheckError) as err:
        translate_definition(fresh_env, "nope")
    assert err.value.kind == ErrorKind.UNBOUND_VARIABLE
    with pytest.raises(TypeCheckError):
        translate_definition(fresh_env, "Nat")


def test_translate_definition_idempotent(fresh_env):
    first = translate_definition(fresh_env, "negb")
    again = translate_definition(fresh_env, "negb")
    assert first is again


def test_translate_rejects_reserved_input(fresh_env):
    with pytest.raises(ValueError):
        translate_term(fresh_env, Var("x'"))
    with pytest.raises(ValueError):
        translate_term(fresh_env, Lam("x_R", NAT, Var("x_R")))


def test_translated_definitions_check(translated_env):
    for name in list(translated_env.names()):
        d = translated_env.definition(name)
        if d is None or not name.endswith("_R"):
            continue
        check(translated_env, Context(), d.body, d.type)


# ---------------------------------------------------------------------------
# Context translation and the abstraction check


def test_translate_context(fresh_env):
    ctx = Context().extend("A", SortT(set_sort(0))).extend("x", Var("A"))
    out = list(translate_context(fresh_env, ctx))
    names = [n for n, _ in out]
    assert names == ["A", "A'", "A_R", "x", "x'", "x_R"]
    tys = dict(out)
    assert tys["A'"] == SortT(set_sort(0))
    assert alpha_eq(tys["A_R"], arrow(Var("A"), arrow(Var("A'"), SortT(PROP))))
    assert tys["x'"] == Var("A'")
    assert tys["x_R"] == app(Var("A_R"), Var("x"), Var("x'"))


def test_abstraction_check_prelude(translated_env):
    for name in ("id", "const", "compose", "negb", "plus", "rev"):
        d = translated_env.definition(name)
        assert abstraction_check(translated_env, Context(), Var(name), d.type)


def test_abstraction_check_open_term(translated_env):
    ctx = Context().extend("A", SortT(set_sort(0))).extend("x", Var("A"))
    assert abstraction_check(translated_env, ctx, Var("x"), Var("A"))
    assert abstraction_check(translated_env, ctx,
                             term_in(translated_env, "fun (y : A) => x"),
                             term_in(translated_env, "A -> A"))


def test_abstraction_check_rejects_ill_typed(translated_env):
    assert not abstraction_check(translated_env, Context(),
                                 Constr("zero"), Ind("Bool"))
    assert not abstraction_check(translated_env, Context(),
                                 Var("missing"), NAT)


def test_abstraction_check_rejects_reserved_names(translated_env):
    assert not abstraction_check(translated_env, Context(), Var("x'"), NAT)


# ---------------------------------------------------------------------------
# Round-trip of generated declarations


def test_generated_declarations_round_trip(translated_env):
    env = translated_env
    relation_names = [n for n in env.names() if n.endswith("_R")]
    assert len(relation_names) == 35
    for name in relation_names:
        ind = env.inductive(name)
        if ind is not None:
            text = print_inductive(ind, env)
            gname, gparams, garity, gctors = _golden_inductive(env, text)
            assert gname == name and gparams == ind.params
            assert alpha_eq(garity, ind.arity)
            for (gc, gty), (rc, rty) in zip(gctors, ind.constructors):
                assert gc == rc and alpha_eq(gty, rty)
        else:
            d = env.definition(name)
            text = print_definition(d, env)
            decl = parse_file(text, allow_reserved=True).decls[0]
            assert alpha_eq(elaborate(env, decl.type), d.type)
            assert alpha_eq(elaborate(env, decl.body), d.body)
