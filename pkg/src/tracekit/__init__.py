"""tracekit: exact-arithmetic trace semantics for finite automata.

Three interchangeable engines (forward/determinised, logical, least-fixpoint
trace sets) over finite machines with powerset or rational-subdistribution
branching, plus pointwise checkers for the distributive laws that make the
engines agree, and partial-trace strategies for I/O transition systems.
"""

from tracekit.kernel import (
    CHECK,
    STAR,
    Done,
    FiniteFunc,
    Modality,
    MonadKind,
    MonadValue,
    Move,
    Universe,
    algebra_eval,
    double_pow,
    functor_map,
    kappa_moore,
    lambda_generative,
    monad_bind,
    monad_unit,
    pow_value,
    strength,
    sub_dist,
)

__all__ = [
    "CHECK",
    "STAR",
    "Done",
    "FiniteFunc",
    "Modality",
    "MonadKind",
    "MonadValue",
    "Move",
    "Universe",
    "algebra_eval",
    "double_pow",
    "functor_map",
    "kappa_moore",
    "lambda_generative",
    "monad_bind",
    "monad_unit",
    "pow_value",
    "strength",
    "sub_dist",
]
