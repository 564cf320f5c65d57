"""Small standard machines used by the test suite and the CLI."""

from __future__ import annotations

from fractions import Fraction

from tracekit.engines import (
    GeneralizedCoalgebra,
    GenerativeCoalgebra,
    MooreCoalgebra,
    StrangeCoalgebra,
    TreeCoalgebra,
)
from tracekit.kernel import (
    CHECK,
    STAR,
    Done,
    Modality,
    MonadKind,
    Move,
    Universe,
    double_pow,
    pow_value,
    sub_dist,
)
from tracekit.languages import TruncatedLanguage
from tracekit.strategies import IOSignature, IOSystem


def nda_exists() -> MooreCoalgebra:
    """Two-state nondeterministic acceptor: accepts words matching a+b*... from q0."""
    return MooreCoalgebra(
        states=Universe(["q0", "q1"]),
        alphabet=Universe(["a", "b"]),
        kind=MonadKind.POW,
        alg=Modality.JOIN,
        out={"q0": False, "q1": True},
        trans={
            "q0": {"a": pow_value(["q0", "q1"]), "b": pow_value([])},
            "q1": {"a": pow_value([]), "b": pow_value(["q1"])},
        },
    )


def pa_chain() -> MooreCoalgebra:
    """Two-state probabilistic machine: u leaks half its mass to the sink v."""
    return MooreCoalgebra(
        states=Universe(["u", "v"]),
        alphabet=Universe(["a"]),
        kind=MonadKind.SUBDIST,
        alg=Modality.EXPECT,
        out={"u": Fraction(0), "v": Fraction(1)},
        trans={
            "u": {"a": sub_dist({"u": Fraction(1, 2), "v": Fraction(1, 2)})},
            "v": {"a": sub_dist({"v": Fraction(1)})},
        },
    )


def generative_ab() -> GenerativeCoalgebra:
    """Emits an `a` then any number of `a`s/`b`s along p -> q, terminating at q."""
    return GenerativeCoalgebra(
        states=Universe(["p", "q"]),
        labels=Universe(["a", "b"]),
        kind=MonadKind.POW,
        c={
            "p": pow_value([Move("a", "p"), Move("a", "q")]),
            "q": pow_value([Done(CHECK), Move("b", "q")]),
        },
    )


def generative_half() -> GenerativeCoalgebra:
    """Subdistribution variant: each state flips a fair coin between emitting and stopping."""
    return GenerativeCoalgebra(
        states=Universe(["p", "q"]),
        labels=Universe(["a"]),
        kind=MonadKind.SUBDIST,
        c={
            "p": sub_dist({Move("a", "q"): Fraction(1, 2), Done(CHECK): Fraction(1, 2)}),
            "q": sub_dist({Move("a", "q"): Fraction(1, 2), Done(CHECK): Fraction(1, 2)}),
        },
    )


def alternating_single() -> MooreCoalgebra:
    """Alternating machine whose only move conjoins an accepting and a rejecting state."""
    return MooreCoalgebra(
        states=Universe(["x", "y", "z"]),
        alphabet=Universe(["a"]),
        kind=MonadKind.DOUBLE_POW,
        alg=Modality.JOIN_MEET,
        out={"x": False, "y": True, "z": False},
        trans={
            "x": {"a": double_pow([["y", "z"]])},
            "y": {"a": double_pow([])},
            "z": {"a": double_pow([])},
        },
    )


def tree_fc() -> TreeCoalgebra:
    """Tree acceptor for f(c, c): x demands an f-node with two y-children, y demands c."""
    return TreeCoalgebra(
        states=Universe(["x", "y"]),
        signature={"c": 0, "f": 2},
        kind=MonadKind.POW,
        alg=Modality.JOIN,
        c={
            "x": pow_value([("f", ("y", "y"))]),
            "y": pow_value([("c", ())]),
        },
    )


def strange_pair() -> StrangeCoalgebra:
    """Both states can stop outright; only y can also keep running."""
    return StrangeCoalgebra(
        states=Universe(["x", "y"]),
        c={
            "x": pow_value([STAR]),
            "y": pow_value([STAR, "y"]),
        },
    )


def io_self_loop() -> IOSystem:
    """One operation with two answers; both continuations loop back to s."""
    sig = IOSignature(Universe(["k"]), {"k": Universe([0, 1])})
    return IOSystem(
        states=Universe(["s"]),
        signature=sig,
        mode="generative",
        trans={"s": frozenset([("k", ("s", "s"))])},
    )


def io_reactive_echo() -> IOSystem:
    """Reactive: answers 0 to k from s0, nothing from the sink s1."""
    sig = IOSignature(Universe(["k"]), {"k": Universe([0, 1])})
    return IOSystem(
        states=Universe(["s0", "s1"]),
        signature=sig,
        mode="reactive",
        trans={
            "s0": {"k": frozenset([(0, "s1")])},
            "s1": {"k": frozenset()},
        },
    )


def generalized_lookup() -> GeneralizedCoalgebra:
    """One ordinary state feeding a semantic state that accepts exactly `b`."""
    alphabet = Universe(["a", "b"])
    lang = TruncatedLanguage.tabulate(alphabet, 2, lambda w: w == ("b",))
    return GeneralizedCoalgebra(
        states=Universe(["s0", "sL"]),
        alphabet=alphabet,
        kind=MonadKind.POW,
        alg=Modality.JOIN,
        c={
            "s0": ("node", (False, {"a": pow_value(["sL"]), "b": pow_value([])})),
            "sL": ("lang", lang),
        },
    )
