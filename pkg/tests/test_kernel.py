"""Kernel value semantics: units, binds, strength, modalities, law components."""

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracekit.kernel import (
    CHECK,
    AlgebraMismatchError,
    Done,
    FiniteFunc,
    FunctorOnlyError,
    MassError,
    Modality,
    MonadKind,
    Move,
    Universe,
    UniverseError,
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

F = Fraction


# ---------------------------------------------------------------------------
# units, binds, maps: pinned examples


def test_unit_pow():
    assert monad_unit(MonadKind.POW, "q0") == pow_value(["q0"])


def test_unit_subdist():
    assert monad_unit(MonadKind.SUBDIST, "u") == sub_dist({"u": 1})


def test_unit_doublepow_rejected():
    with pytest.raises(FunctorOnlyError):
        monad_unit(MonadKind.DOUBLE_POW, "x")


def test_bind_pow_union_of_images():
    f = {("q0", "a"): pow_value(["q0", "q1"]), ("q1", "a"): pow_value([])}
    got = monad_bind(MonadKind.POW, pow_value(["q0", "q1"]), lambda q: f[(q, "a")])
    assert got == pow_value(["q0", "q1"])


def test_bind_subdist_weighted_sum():
    t = sub_dist({"u": F(1, 2), "v": F(1, 2)})
    k = {"u": sub_dist({"u": F(1, 2), "v": F(1, 2)}), "v": sub_dist({"v": 1})}
    assert monad_bind(MonadKind.SUBDIST, t, k.__getitem__) == sub_dist(
        {"u": F(1, 4), "v": F(3, 4)})


def test_bind_pow_empty():
    got = monad_bind(MonadKind.POW, pow_value([]), lambda q: pow_value(["q0"]))
    assert got == pow_value([])


def test_functor_map_pow_image():
    got = functor_map(MonadKind.POW, lambda q: q == "q1", pow_value(["q0", "q1"]))
    assert got == pow_value([False, True])


def test_functor_map_subdist_merges_collisions():
    got = functor_map(MonadKind.SUBDIST, lambda _: "v", sub_dist({"u": F(1, 2), "v": F(1, 2)}))
    assert got == sub_dist({"v": 1})


def test_functor_map_doublepow_identity():
    v = double_pow([["y", "z"]])
    assert functor_map(MonadKind.DOUBLE_POW, lambda x: x, v) == v


def test_strength_pointwise():
    g = FiniteFunc({"a": "x"})
    h = FiniteFunc({"a": "y"})
    fam = strength(MonadKind.POW, pow_value([g, h]), Universe(["a"]))
    assert fam == {"a": pow_value(["x", "y"])}


def test_strength_point_mass():
    g = FiniteFunc({"a": "x", "b": "y"})
    fam = strength(MonadKind.SUBDIST, sub_dist({g: 1}), Universe(["a", "b"]))
    assert fam == {"a": sub_dist({"x": 1}), "b": sub_dist({"y": 1})}


def test_strength_empty():
    fam = strength(MonadKind.POW, pow_value([]), Universe(["a"]))
    assert fam == {"a": pow_value([])}


# ---------------------------------------------------------------------------
# modalities


def test_algebra_join():
    assert algebra_eval(Modality.JOIN, pow_value([False, True])) is True
    assert algebra_eval(Modality.JOIN, pow_value([])) is False


def test_algebra_meet_empty_is_top():
    assert algebra_eval(Modality.MEET, pow_value([])) is True


def test_algebra_expect():
    v = sub_dist({F(0): F(1, 2), F(1): F(1, 2)})
    assert algebra_eval(Modality.EXPECT, v) == F(1, 2)


def test_algebra_joinmeet():
    assert algebra_eval(Modality.JOIN_MEET, double_pow([[True, False]])) is False
    assert algebra_eval(Modality.JOIN_MEET, double_pow([])) is False
    assert algebra_eval(Modality.JOIN_MEET, double_pow([[]])) is True


def test_algebra_mismatch():
    with pytest.raises(AlgebraMismatchError):
        algebra_eval(Modality.EXPECT, pow_value([True]))


# ---------------------------------------------------------------------------
# kappa / lambda components


def test_kappa_join_pair():
    g = FiniteFunc({"a": "x"})
    h = FiniteFunc({"a": "y"})
    om, fam = kappa_moore(MonadKind.POW, Modality.JOIN,
                          pow_value([(False, g), (True, h)]), Universe(["a"]))
    assert om is True
    assert fam == {"a": pow_value(["x", "y"])}


def test_kappa_empty():
    om, fam = kappa_moore(MonadKind.POW, Modality.JOIN, pow_value([]), Universe(["a"]))
    assert om is False and fam == {"a": pow_value([])}


def test_kappa_point_mass():
    g = FiniteFunc({"a": "x"})
    om, fam = kappa_moore(MonadKind.SUBDIST, Modality.EXPECT,
                          sub_dist({(F(1), g): 1}), Universe(["a"]))
    assert om == F(1) and fam == {"a": sub_dist({"x": 1})}


def test_kappa_doublepow_rejected():
    with pytest.raises(FunctorOnlyError):
        kappa_moore(MonadKind.DOUBLE_POW, Modality.JOIN_MEET, double_pow([]), Universe(["a"]))


def test_lambda_move():
    got = lambda_generative(MonadKind.POW, Move("a", pow_value(["x", "y"])))
    assert got == pow_value([Move("a", "x"), Move("a", "y")])


def test_lambda_done():
    assert lambda_generative(MonadKind.POW, Done(CHECK)) == pow_value([Done(CHECK)])


def test_lambda_subdist():
    got = lambda_generative(MonadKind.SUBDIST, Move("a", sub_dist({"x": F(1, 3)})))
    assert got == sub_dist({Move("a", "x"): F(1, 3)})


def test_lambda_doublepow_rejected():
    with pytest.raises(FunctorOnlyError):
        lambda_generative(MonadKind.DOUBLE_POW, Done(CHECK))


# ---------------------------------------------------------------------------
# canonicality and validation


def test_pow_canonical_order_and_dedup():
    assert pow_value(["b", "a", "b"]) == pow_value(["a", "b"])
    assert pow_value(["b", "a"]).payload == ("a", "b")


def test_subdist_drops_zeros_and_checks_mass():
    assert sub_dist({"a": 0, "b": F(1, 2)}) == sub_dist({"b": F(1, 2)})
    with pytest.raises(MassError):
        sub_dist({"a": F(3, 4), "b": F(1, 2)})
    with pytest.raises(MassError):
        sub_dist({"a": F(-1, 2)})


def test_doublepow_canonical():
    assert double_pow([["z", "y"], ["y", "z"]]) == double_pow([["y", "z"]])


def test_universe_rejects_duplicates():
    with pytest.raises(UniverseError):
        Universe(["a", "a"])


# ---------------------------------------------------------------------------
# monad laws, exhaustively for small powersets


def _all_subsets(elems):
    out = []
    for n in range(len(elems) + 1):
        out.extend(pow_value(c) for c in itertools.combinations(elems, n))
    return out


def _all_pow_kleislis(elems):
    values = _all_subsets(elems)
    return [dict(zip(elems, choice)).__getitem__
            for choice in itertools.product(values, repeat=len(elems))]


@pytest.mark.parametrize("n", [1, 2])
def test_pow_monad_laws_exhaustive_small(n):
    elems = [f"e{i}" for i in range(n)]
    K = MonadKind.POW
    for t in _all_subsets(elems):
        for k in _all_pow_kleislis(elems):
            assert monad_bind(K, t, lambda y: monad_unit(K, y)) == t
            for x in elems:
                assert monad_bind(K, monad_unit(K, x), k) == k(x)
            for k2 in _all_pow_kleislis(elems):
                lhs = monad_bind(K, monad_bind(K, t, k), k2)
                rhs = monad_bind(K, t, lambda y: monad_bind(K, k(y), k2))
                assert lhs == rhs


def test_pow_monad_laws_four_elements_sampled_continuations():
    import random
    rng = random.Random(42)
    elems = [f"e{i}" for i in range(4)]
    K = MonadKind.POW
    values = _all_subsets(elems)
    for t in values:
        assert monad_bind(K, t, lambda y: monad_unit(K, y)) == t
    for _ in range(40):
        k = {x: rng.choice(values) for x in elems}
        k2 = {x: rng.choice(values) for x in elems}
        for x in elems:
            assert monad_bind(K, monad_unit(K, x), k.__getitem__) == k[x]
        for t in values:
            lhs = monad_bind(K, monad_bind(K, t, k.__getitem__), k2.__getitem__)
            rhs = monad_bind(K, t, lambda y: monad_bind(K, k[y], k2.__getitem__))
            assert lhs == rhs


# ---------------------------------------------------------------------------
# monad laws on random subdistributions


ELEMS = ["e0", "e1", "e2", "e3"]
GRID = [F(1, 4), F(1, 3), F(1, 2), F(1)]


@st.composite
def subdists(draw):
    support = draw(st.lists(st.sampled_from(ELEMS), unique=True, max_size=3))
    weights = [draw(st.sampled_from(GRID)) for _ in support]
    total = sum(weights, F(0))
    if total > 1:
        weights = [w / total for w in weights]
    return sub_dist(zip(support, weights))


@st.composite
def subdist_kleislis(draw):
    table = {x: draw(subdists()) for x in ELEMS}
    return table.__getitem__


@settings(max_examples=200, derandomize=True, deadline=None)
@given(subdists(), subdist_kleislis(), subdist_kleislis(), st.sampled_from(ELEMS))
def test_subdist_monad_laws(t, k, k2, x):
    K = MonadKind.SUBDIST
    assert monad_bind(K, t, lambda y: monad_unit(K, y)) == t
    assert monad_bind(K, monad_unit(K, x), k) == k(x)
    lhs = monad_bind(K, monad_bind(K, t, k), k2)
    rhs = monad_bind(K, t, lambda y: monad_bind(K, k(y), k2))
    assert lhs == rhs


@settings(max_examples=200, derandomize=True, deadline=None)
@given(subdists(), subdist_kleislis())
def test_subdist_mass_never_increases(t, k):
    bound = monad_bind(MonadKind.SUBDIST, t, k)
    assert bound.mass() <= t.mass()
    mapped = functor_map(MonadKind.SUBDIST, lambda y: (y, "tag"), t)
    assert mapped.mass() == t.mass()


# ---------------------------------------------------------------------------
# strength naturality and modality additivity


@pytest.mark.parametrize("kind", [MonadKind.POW, MonadKind.SUBDIST])
def test_strength_naturality_small(kind):
    import random
    rng = random.Random(7)
    A = Universe(["a", "b"])
    xs = ["x0", "x1"]
    ys = ["y0", "y1", "y2"]
    funcs = [FiniteFunc({"a": g0, "b": g1}) for g0 in xs for g1 in xs]
    post = {x: rng.choice(ys) for x in xs}

    def lift(g: FiniteFunc) -> FiniteFunc:
        return FiniteFunc({a: post[g(a)] for a in A})

    if kind is MonadKind.POW:
        values = _all_subsets(funcs)
    else:
        values = [sub_dist({g: F(1, 4) for g in rng.sample(funcs, 2)}) for _ in range(30)]
    for t in values:
        side_a = strength(kind, functor_map(kind, lift, t), A)
        side_b = {a: functor_map(kind, post.__getitem__, mv)
                  for a, mv in strength(kind, t, A).items()}
        assert side_a == side_b


def test_join_meet_additive_over_union():
    subsets = _all_subsets([False, True])
    for s in subsets:
        for s2 in subsets:
            union = pow_value(s.payload + s2.payload)
            assert algebra_eval(Modality.JOIN, union) == (
                algebra_eval(Modality.JOIN, s) or algebra_eval(Modality.JOIN, s2))
            assert algebra_eval(Modality.MEET, union) == (
                algebra_eval(Modality.MEET, s) and algebra_eval(Modality.MEET, s2))


def test_expect_additive_over_disjoint_support():
    d1 = sub_dist({F(1, 2): F(1, 4)})
    d2 = sub_dist({F(1): F(1, 2)})
    merged = sub_dist(list(d1.payload) + list(d2.payload))
    assert (algebra_eval(Modality.EXPECT, merged)
            == algebra_eval(Modality.EXPECT, d1) + algebra_eval(Modality.EXPECT, d2))
