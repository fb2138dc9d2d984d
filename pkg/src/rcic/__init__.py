"""A small dependently typed kernel with a binary relational translation.

The pieces:

- syntax: terms, sorts, declarations, contexts, substitution
- kernel: reduction, conversion, type checking, inductive and guard checks
- param: the relational translation and the abstraction check
- frontend: concrete syntax, parsing, elaboration
- printer: rendering terms and declarations back to concrete syntax
- cli: the rcic command
"""

from pathlib import Path

from .syntax import (
    PROP,
    App,
    Case,
    Constr,
    Context,
    Definition,
    DuplicateNameError,
    Fix,
    GlobalEnv,
    Ind,
    InductiveDecl,
    Lam,
    Prod,
    Sort,
    SortT,
    Term,
    UniverseError,
    Var,
    alpha_eq,
    app,
    arrow,
    free_vars,
    lams,
    prods,
    set_sort,
    subst,
    type_sort,
)
from .kernel import (
    FULL,
    STAR,
    CicSort,
    EliminationMode,
    ErrorKind,
    TypeCheckError,
    axiom_sort,
    beta_normalize,
    check,
    check_inductive,
    conv,
    declare_definition,
    declare_inductive,
    embed_sort,
    infer,
    infer_sort,
    is_small,
    one_step_reducts,
    sort_of_product,
    subsort,
    subtype,
    whnf,
)
from .param import (
    NameTriple,
    TranslatedInductive,
    abstraction_check,
    prime,
    primed,
    relation_name,
    relation_sort,
    translate_context,
    translate_definition,
    translate_inductive,
    translate_term,
    witness,
)
from .frontend import ParseError, elaborate, parse_file, parse_term
from .printer import print_definition, print_inductive, print_term


def prelude_path() -> Path:
    """The bundled standard prelude of inductives and definitions."""
    return Path(__file__).with_name("prelude.rcic")


__all__ = [
    "PROP",
    "App",
    "Case",
    "CicSort",
    "Constr",
    "Context",
    "Definition",
    "DuplicateNameError",
    "EliminationMode",
    "ErrorKind",
    "FULL",
    "Fix",
    "GlobalEnv",
    "Ind",
    "InductiveDecl",
    "Lam",
    "NameTriple",
    "ParseError",
    "Prod",
    "STAR",
    "Sort",
    "SortT",
    "Term",
    "TranslatedInductive",
    "TypeCheckError",
    "UniverseError",
    "Var",
    "abstraction_check",
    "alpha_eq",
    "app",
    "arrow",
    "axiom_sort",
    "beta_normalize",
    "check",
    "check_inductive",
    "conv",
    "declare_definition",
    "declare_inductive",
    "elaborate",
    "embed_sort",
    "free_vars",
    "infer",
    "infer_sort",
    "is_small",
    "lams",
    "one_step_reducts",
    "parse_file",
    "parse_term",
    "prelude_path",
    "prime",
    "primed",
    "print_definition",
    "print_inductive",
    "print_term",
    "prods",
    "relation_name",
    "relation_sort",
    "set_sort",
    "sort_of_product",
    "subsort",
    "subst",
    "subtype",
    "translate_context",
    "translate_definition",
    "translate_inductive",
    "translate_term",
    "type_sort",
    "whnf",
    "witness",
]
