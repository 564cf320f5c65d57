"""Engine semantics on the pinned machines plus randomized cross-checks."""

from fractions import Fraction

import pytest

from tests import gen, oracles
from tracekit import zoo
from tracekit.engines import (
    cia_eval,
    compare_semantics,
    determinise_bt,
    em_eval_bt,
    em_eval_ta,
    em_language_bt,
    em_language_ta,
    kbar,
    kleisli_iterates,
    kleisli_traces,
    logic_eval_generative,
    logic_eval_strange,
    logic_eval_tree,
    logic_eval_word,
    logic_language_word,
    strange_to_generative,
)
from tracekit.kernel import (
    CHECK,
    KernelError,
    Modality,
    MonadKind,
    MonadValue,
    Universe,
    pow_value,
    sub_dist,
)
from tracekit.languages import Tree, enumerate_words, language_equal

F = Fraction


# ---------------------------------------------------------------------------
# forward engine on the pinned machines


def test_em_nda_examples():
    n1 = zoo.nda_exists()
    assert em_eval_bt(n1, "q0", ("a", "b")) is True
    assert em_eval_bt(n1, "q0", ()) is False


def test_em_nda_language_depth2():
    lang = em_language_bt(zoo.nda_exists(), "q0", 2)
    assert dict(lang.items()) == {
        (): False, ("a",): True, ("b",): False,
        ("a", "a"): True, ("a", "b"): True, ("b", "a"): False, ("b", "b"): False,
    }


def test_em_language_depth0_is_output():
    n1 = zoo.nda_exists()
    assert dict(em_language_bt(n1, "q1", 0).items()) == {(): True}


def test_em_pa_examples():
    p1 = zoo.pa_chain()
    assert em_eval_bt(p1, "u", ("a", "a")) == F(3, 4)
    assert dict(em_language_bt(p1, "u", 1).items()) == {(): F(0), ("a",): F(1, 2)}


def test_em_unknown_state_and_letter():
    n1 = zoo.nda_exists()
    with pytest.raises(KernelError):
        em_eval_bt(n1, "nope", ())
    with pytest.raises(KernelError):
        em_eval_bt(n1, "q0", ("z",))


# ---------------------------------------------------------------------------
# determinisation


def test_determinise_nda_reachable_subsets():
    det = determinise_bt(zoo.nda_exists())
    got = {frozenset(s) for s in det.subsets}
    # {q1} is reachable: {q0} -a-> {q0,q1} -b-> {q1}
    assert got == {frozenset(["q0"]), frozenset(["q0", "q1"]),
                   frozenset(["q1"]), frozenset()}


def test_determinise_language_matches_forward():
    n1 = zoo.nda_exists()
    det = determinise_bt(n1)
    for x in n1.states:
        for d in range(4):
            eq, _ = language_equal(det.language(frozenset([x]), d),
                                   em_language_bt(n1, x, d))
            assert eq


def test_determinise_deterministic_input_stays_singleton():
    base = zoo.nda_exists()
    first = list(base.states)[0]
    single = {x: {a: pow_value([first]) for a in base.alphabet} for x in base.states}
    from tracekit.engines import MooreCoalgebra
    dm = MooreCoalgebra(base.states, base.alphabet, MonadKind.POW, Modality.JOIN,
                        dict(base.out), single)
    det = determinise_bt(dm)
    assert all(len(u) <= 1 for u in det.subsets)


def test_determinise_rejects_subdist():
    with pytest.raises(KernelError):
        determinise_bt(zoo.pa_chain())


# ---------------------------------------------------------------------------
# generative engines


def test_em_ta_examples():
    g1 = zoo.generative_ab()
    assert em_eval_ta(g1, "p", ("a", "b")) is True
    assert em_eval_ta(g1, "p", ()) is False
    assert em_eval_ta(g1, "q", ()) is True


def test_kleisli_traces_examples():
    g1 = zoo.generative_ab()
    ts = kleisli_traces(g1, "p", 2)
    assert ts.payload == pow_value([(("a",), CHECK), (("a", "a"), CHECK),
                                    (("a", "b"), CHECK)])
    assert kleisli_traces(g1, "q", 0).payload == pow_value([((), CHECK)])


def test_kleisli_traces_subdist_exact():
    gh = zoo.generative_half()
    ts = kleisli_traces(gh, "p", 1)
    assert ts.payload == sub_dist({((), CHECK): F(1, 2), (("a",), CHECK): F(1, 4)})
    assert ts.retained_mass() == F(3, 4)


def test_kbar_characteristic():
    g1 = zoo.generative_ab()
    lang = kbar(kleisli_traces(g1, "p", 2), g1.labels, 2)
    true_words = {w for w, v in lang.items() if v}
    assert true_words == {("a",), ("a", "a"), ("a", "b")}


def test_kbar_empty_trace_set():
    from tracekit.languages import TruncatedTraceSet
    ts = TruncatedTraceSet(MonadKind.POW, 2, pow_value([]))
    lang = kbar(ts, Universe(["a"]), 2)
    assert all(v is False for _, v in lang.items())


def test_kbar_triangle_with_forward_engine():
    g1 = zoo.generative_ab()
    eq, _ = language_equal(kbar(kleisli_traces(g1, "p", 2), g1.labels, 2),
                           em_language_ta(g1, "p", 2))
    assert eq


def test_kbar_rejects_foreign_terminal():
    from tracekit.languages import TruncatedTraceSet
    ts = TruncatedTraceSet(MonadKind.POW, 1, pow_value([((), "other")]))
    with pytest.raises(KernelError):
        kbar(ts, Universe(["a"]), 1)


def test_kbar_is_a_join_morphism():
    g1 = zoo.generative_ab()
    A = g1.labels
    s1 = kleisli_traces(g1, "p", 2)
    s2 = kleisli_traces(g1, "q", 2)
    from tracekit.languages import TruncatedTraceSet
    union = TruncatedTraceSet(MonadKind.POW, 2,
                              pow_value(s1.payload.payload + s2.payload.payload))
    joined = kbar(union, A, 2)
    l1, l2 = kbar(s1, A, 2), kbar(s2, A, 2)
    for w in enumerate_words(A, 2):
        assert joined.value(w) == (l1.value(w) or l2.value(w))


def test_kbar_respects_convex_combination():
    gh = zoo.generative_half()
    A = gh.labels
    s1 = kleisli_traces(gh, "p", 2)
    s2 = kleisli_traces(gh, "q", 2)
    half = F(1, 2)
    mixed = sub_dist([(t, half * w) for t, w in s1.payload.payload]
                     + [(t, half * w) for t, w in s2.payload.payload])
    from tracekit.languages import TruncatedTraceSet
    l_mixed = kbar(TruncatedTraceSet(MonadKind.SUBDIST, 2, mixed), A, 2)
    l1, l2 = kbar(s1, A, 2), kbar(s2, A, 2)
    for w in enumerate_words(A, 2):
        assert l_mixed.value(w) == half * l1.value(w) + half * l2.value(w)


# ---------------------------------------------------------------------------
# logical engine


def test_logic_alternating_machine():
    aa = zoo.alternating_single()
    assert logic_eval_word(aa, "x", ("a",)) is False
    assert logic_eval_word(aa, "x", ()) is False
    assert logic_eval_word(aa, "y", ()) is True


def test_logic_matches_forward_on_nda():
    n1 = zoo.nda_exists()
    assert logic_eval_word(n1, "q0", ("a", "b")) is True
    for x in n1.states:
        eq, _ = language_equal(logic_language_word(n1, x, 3), em_language_bt(n1, x, 3))
        assert eq


def test_logic_epsilon_is_output():
    n1 = zoo.nda_exists()
    for x in n1.states:
        assert logic_eval_word(n1, x, ()) == n1.out[x]


def test_logic_memoized_equals_plain():
    n1 = zoo.nda_exists()
    for x in n1.states:
        for w in enumerate_words(n1.alphabet, 3):
            assert logic_eval_word(n1, x, w, memoize=True) == \
                logic_eval_word(n1, x, w, memoize=False)


def test_logic_tree_examples():
    t1 = zoo.tree_fc()
    fcc = Tree("f", (Tree("c"), Tree("c")))
    assert logic_eval_tree(t1, "x", fcc) is True
    assert logic_eval_tree(t1, "x", Tree("c")) is False
    assert logic_eval_tree(t1, "y", Tree("c")) is True


def test_logic_tree_arity_mismatch():
    t1 = zoo.tree_fc()
    with pytest.raises(KernelError):
        logic_eval_tree(t1, "x", Tree("f", (Tree("c"),)))


def test_logic_generative_examples():
    g1 = zoo.generative_ab()
    assert logic_eval_generative(g1, "p", ("a", "b")) is True
    assert logic_eval_generative(g1, "q", ()) is True
    assert logic_eval_generative(g1, "p", ("b",)) is False


def test_logic_strange_examples():
    sr = zoo.strange_pair()
    assert logic_eval_strange(sr, "x", 5) is True
    assert logic_eval_strange(sr, "y", 0) is True


def test_strange_separation():
    sr = zoo.strange_pair()
    gc = strange_to_generative(sr)
    for n in range(7):
        assert logic_eval_strange(sr, "x", n) == logic_eval_strange(sr, "y", n)
    for d in range(1, 7):
        assert kleisli_traces(gc, "x", d).payload != kleisli_traces(gc, "y", d).payload
    assert kleisli_traces(gc, "x", 6).payload == pow_value([((), CHECK)])
    assert kleisli_traces(gc, "y", 6).payload == pow_value(
        [(("a",) * k, CHECK) for k in range(7)])


# ---------------------------------------------------------------------------
# completely-iterative evaluation


def test_cia_direct_lookup():
    g = zoo.generalized_lookup()
    assert cia_eval(g, "sL", ("b",)) is True
    assert cia_eval(g, "sL", ("a",)) is False


def test_cia_one_step_then_lookup():
    g = zoo.generalized_lookup()
    assert cia_eval(g, "s0", ("a", "b")) is True
    assert cia_eval(g, "s0", ("a", "a")) is False


def test_cia_depth_underflow():
    g = zoo.generalized_lookup()
    # residual of length 2 still fits the depth-2 semantic language
    assert cia_eval(g, "s0", ("a", "b", "b")) is False
    with pytest.raises(KernelError):
        cia_eval(g, "s0", ("a", "a", "a", "a"))
    with pytest.raises(KernelError):
        cia_eval(g, "sL", ("a", "a", "a"))


def test_cia_conservative_without_semantic_states():
    for seed in range(10):
        for config in gen.CONFIGS:
            m = gen.random_moore(seed, config)
            g = gen.random_generalized(seed, config, 3)
            ordinary = [x for x in g.states if g.c[x][0] == "node"]
            if not any(g.c[x][0] == "lang" for x in g.states):
                for x in ordinary:
                    for w in enumerate_words(m.alphabet, 3):
                        assert cia_eval(g, x, w) == em_eval_bt(m, x, w)


# ---------------------------------------------------------------------------
# Kleene iteration shape


def _leq(kind, a: MonadValue, b: MonadValue) -> bool:
    if kind is MonadKind.POW:
        return set(a.payload) <= set(b.payload)
    return all(b.weight(x) >= w for x, w in a.payload)


def test_kleisli_iterates_monotone_and_stable():
    g1 = zoo.generative_ab()
    depth = 3
    chain = kleisli_iterates(g1, depth, depth + 3)
    for k in range(len(chain) - 1):
        for x in g1.states:
            assert _leq(g1.kind, chain[k][x], chain[k + 1][x])
    for m in range(depth + 1):
        stable = [{x: _restrict(chain[k][x], m) for x in g1.states}
                  for k in range(m + 1, len(chain))]
        assert all(s == stable[0] for s in stable)


def _restrict(mv: MonadValue, m: int) -> MonadValue:
    if mv.kind is MonadKind.POW:
        return pow_value([t for t in mv.payload if len(t[0]) <= m])
    return sub_dist([(t, w) for t, w in mv.payload if len(t[0]) <= m])


# ---------------------------------------------------------------------------
# comparison reports


def test_compare_moore_all_equal():
    rep = compare_semantics(zoo.nda_exists(), 3)
    assert rep.all_equal and set(rep.engines) == {"em", "logic"}


def test_compare_generative_all_equal():
    rep = compare_semantics(zoo.generative_ab(), 3)
    assert rep.all_equal
    assert set(rep.engines) == {"em", "logic", "kleisli"}
    assert rep.collapse_injective is True


def test_compare_subdist_reports_mass():
    rep = compare_semantics(zoo.generative_half(), 2)
    assert rep.all_equal
    assert rep.retained_mass["p"] == F(7, 8)


def test_compare_strange_flags_collapse():
    rep = compare_semantics(zoo.strange_pair(), 6)
    assert not rep.all_equal
    assert rep.collapse_witnesses == [("x", "y")]
    assert rep.collapse_injective is False


# ---------------------------------------------------------------------------
# randomized agreement carried by the oracles


@pytest.mark.parametrize("config", gen.CONFIGS)
def test_random_moore_engines_and_oracle(config):
    for seed in range(25):
        m = gen.random_moore(seed, config)
        for x in m.states:
            for w in enumerate_words(m.alphabet, 3):
                em = em_eval_bt(m, x, w)
                assert em == logic_eval_word(m, x, w)
                assert em == oracles.moore_value(m, x, w)


@pytest.mark.parametrize("kind", [MonadKind.POW, MonadKind.SUBDIST])
def test_random_generative_engines_and_oracle(kind):
    for seed in range(25):
        g = gen.random_generative(seed, kind)
        traces = {x: kleisli_traces(g, x, 3) for x in g.states}
        for x in g.states:
            lang = kbar(traces[x], g.labels, 3)
            for w in enumerate_words(g.labels, 3):
                em = em_eval_ta(g, x, w)
                assert em == logic_eval_generative(g, x, w)
                assert em == lang.value(w)
                if kind is MonadKind.POW:
                    assert em == oracles.generative_value(g, x, w)


def test_random_tree_oracle():
    from tracekit.languages import enumerate_trees
    for seed in range(20):
        tc = gen.random_tree_automaton(seed)
        for x in tc.states:
            for t in enumerate_trees(tc.signature, 3):
                assert logic_eval_tree(tc, x, t) == oracles.tree_run_exists(tc, x, t)
