"""The three trace-semantics engines and the maps comparing them.

* forward engine: run the branching state forward (generalised subset /
  distribution construction) and collapse outputs at the end;
* logical engine: evaluate one word/tree as a test, recursing on suffixes;
* fixpoint engine: Kleene-iterate the complete-trace equations from bottom.

All three produce exactly equal truncated languages on the machine classes
where the connecting laws hold; `compare_semantics` materialises that check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from tracekit.kernel import (
    CHECK,
    STAR,
    AlgebraMismatchError,
    Done,
    KernelError,
    Modality,
    MonadKind,
    MonadValue,
    Move,
    Universe,
    algebra_eval,
    functor_map,
    monad_bind,
    monad_unit,
    omega_bot,
    omega_meet,
    pow_value,
    sub_dist,
)
from tracekit.languages import (
    Tree,
    TruncatedLanguage,
    TruncatedTraceSet,
    language_equal,
)

#: kind/modality pairs a machine may declare
_ALLOWED = {
    (MonadKind.POW, Modality.JOIN),
    (MonadKind.POW, Modality.MEET),
    (MonadKind.SUBDIST, Modality.EXPECT),
    (MonadKind.DOUBLE_POW, Modality.JOIN_MEET),
}


def _check_output(alg: Modality, value, where: str):
    if alg is Modality.EXPECT:
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise KernelError(f"{where}: output {value!r} is not a rational")
        value = Fraction(value)
        if not 0 <= value <= 1:
            raise KernelError(f"{where}: output {value} outside [0, 1]")
        return value
    if not isinstance(value, bool):
        raise KernelError(f"{where}: output {value!r} is not a boolean")
    return value


# ---------------------------------------------------------------------------
# machine types


@dataclass
class MooreCoalgebra:
    """Finite machine with an output per state and branching successors per letter."""

    states: Universe
    alphabet: Universe
    kind: MonadKind
    alg: Modality
    out: dict
    trans: dict  # state -> letter -> MonadValue over states

    def __post_init__(self):
        if (self.kind, self.alg) not in _ALLOWED:
            raise AlgebraMismatchError(f"{self.alg.value} does not evaluate {self.kind.value}")
        for x in self.states:
            if x not in self.out:
                raise KernelError(f"missing output for state {x!r}")
            self.out[x] = _check_output(self.alg, self.out[x], f"out[{x!r}]")
            row = self.trans.get(x)
            if row is None:
                raise KernelError(f"missing transitions for state {x!r}")
            for a in self.alphabet:
                mv = row.get(a)
                if mv is None:
                    raise KernelError(f"missing transition ({x!r}, {a!r})")
                if mv.kind is not self.kind:
                    raise KernelError(f"transition ({x!r}, {a!r}) has kind {mv.kind.value}")
                for y in _base_states(mv):
                    self.states.require(y)

    def succ(self, x, a) -> MonadValue:
        self.states.require(x)
        self.alphabet.require(a)
        return self.trans[x][a]


def _base_states(mv: MonadValue):
    if mv.kind is MonadKind.DOUBLE_POW:
        return [y for s in mv.payload for y in s]
    return list(mv.support)


@dataclass
class GenerativeCoalgebra:
    """Machine whose single branching value per state mixes moves and terminals."""

    states: Universe
    labels: Universe
    kind: MonadKind
    c: dict  # state -> MonadValue over Move/Done
    terminals: Universe = field(default_factory=lambda: Universe([CHECK]))

    def __post_init__(self):
        if self.kind not in (MonadKind.POW, MonadKind.SUBDIST):
            raise KernelError("generative machines need a monad: pow or subdist")
        for x in self.states:
            mv = self.c.get(x)
            if mv is None:
                raise KernelError(f"missing behaviour for state {x!r}")
            if mv.kind is not self.kind:
                raise KernelError(f"behaviour of {x!r} has kind {mv.kind.value}")
            for u in mv.support:
                if isinstance(u, Move):
                    self.labels.require(u.label)
                    self.states.require(u.target)
                elif isinstance(u, Done):
                    self.terminals.require(u.terminal)
                else:
                    raise KernelError(f"behaviour of {x!r} contains {u!r}")

    @property
    def alg(self) -> Modality:
        return Modality.JOIN if self.kind is MonadKind.POW else Modality.EXPECT


@dataclass
class TreeCoalgebra:
    """Top-down tree machine: each state branches over (symbol, child states) nodes."""

    states: Universe
    signature: dict  # symbol -> arity
    kind: MonadKind
    alg: Modality
    c: dict  # state -> MonadValue over (symbol, tuple-of-states)

    def __post_init__(self):
        if (self.kind, self.alg) not in _ALLOWED:
            raise AlgebraMismatchError(f"{self.alg.value} does not evaluate {self.kind.value}")
        for x in self.states:
            mv = self.c.get(x)
            if mv is None:
                raise KernelError(f"missing behaviour for state {x!r}")
            for u in _base_states(mv) if self.kind is MonadKind.DOUBLE_POW else mv.support:
                sym, kids = u
                if sym not in self.signature:
                    raise KernelError(f"undeclared symbol {sym!r}")
                if len(kids) != self.signature[sym]:
                    raise KernelError(f"arity mismatch at {sym!r}: {kids!r}")
                for y in kids:
                    self.states.require(y)


@dataclass
class StrangeCoalgebra:
    """Plain branching over successors-or-stop, read by the always-true stop logic."""

    states: Universe
    c: dict  # state -> MonadValue(POW) over states and STAR

    def __post_init__(self):
        for x in self.states:
            mv = self.c.get(x)
            if mv is None or mv.kind is not MonadKind.POW:
                raise KernelError(f"behaviour of {x!r} must be a powerset value")
            for u in mv.support:
                if u != STAR:
                    self.states.require(u)


@dataclass
class GeneralizedCoalgebra:
    """Moore machine in which some states are replaced by ready-made languages."""

    states: Universe
    alphabet: Universe
    kind: MonadKind
    alg: Modality
    c: dict  # state -> ("lang", TruncatedLanguage) | ("node", (output, {letter: MonadValue}))

    def __post_init__(self):
        if (self.kind, self.alg) not in _ALLOWED:
            raise AlgebraMismatchError(f"{self.alg.value} does not evaluate {self.kind.value}")
        for x in self.states:
            entry = self.c.get(x)
            if entry is None:
                raise KernelError(f"missing behaviour for state {x!r}")
            tag, body = entry
            if tag == "lang":
                if body.alphabet != self.alphabet:
                    raise KernelError(f"semantic state {x!r} uses a different alphabet")
            elif tag == "node":
                om, fam = body
                _check_output(self.alg, om, f"out[{x!r}]")
                for a in self.alphabet:
                    for y in _base_states(fam[a]):
                        self.states.require(y)
            else:
                raise KernelError(f"behaviour of {x!r} tagged {tag!r}")

    def semantic_states(self) -> list:
        return [x for x in self.states if self.c[x][0] == "lang"]


# ---------------------------------------------------------------------------
# forward (determinising) engine


def em_eval_bt(m: MooreCoalgebra, x, word) -> object:
    """Run the branching state forward through `word`, then collapse outputs."""
    if m.kind is MonadKind.DOUBLE_POW:
        raise KernelError("forward evaluation needs a monad; use the logical engine")
    u = monad_unit(m.kind, m.states.require(x))
    for a in word:
        m.alphabet.require(a)
        u = monad_bind(m.kind, u, lambda y: m.trans[y][a])
    return algebra_eval(m.alg, functor_map(m.kind, lambda y: m.out[y], u))


def em_language_bt(m: MooreCoalgebra, x, depth: int) -> TruncatedLanguage:
    """Tabulated forward semantics, sharing the running value across prefixes."""
    if m.kind is MonadKind.DOUBLE_POW:
        raise KernelError("forward evaluation needs a monad; use the logical engine")
    table: dict = {}

    def walk(prefix: tuple, u: MonadValue):
        table[prefix] = algebra_eval(m.alg, functor_map(m.kind, lambda y: m.out[y], u))
        if len(prefix) == depth:
            return
        for a in m.alphabet:
            walk(prefix + (a,), monad_bind(m.kind, u, lambda y: m.trans[y][a]))

    walk((), monad_unit(m.kind, m.states.require(x)))
    return TruncatedLanguage(m.alphabet, depth, table)


@dataclass
class DeterminisedMoore:
    """Subset machine produced from a powerset Moore machine."""

    alphabet: Universe
    alg: Modality
    subsets: list  # reachable frozensets, discovery order
    out: dict  # frozenset -> output
    trans: dict  # (frozenset, letter) -> frozenset

    def eval_word(self, start: frozenset, word) -> object:
        u = start
        for a in word:
            u = self.trans[(u, a)]
        return self.out[u]

    def language(self, start: frozenset, depth: int) -> TruncatedLanguage:
        return TruncatedLanguage.tabulate(self.alphabet, depth,
                                          lambda w: self.eval_word(start, w))


def determinise_bt(m: MooreCoalgebra) -> DeterminisedMoore:
    """Subset construction from every singleton; outputs collapse by the modality."""
    if m.kind is not MonadKind.POW:
        raise KernelError("only powerset machines determinise to a finite subset machine")
    agenda = [frozenset([x]) for x in m.states]
    subsets: list = []
    out: dict = {}
    trans: dict = {}
    while agenda:
        u = agenda.pop(0)
        if u in subsets:
            continue
        subsets.append(u)
        out[u] = algebra_eval(m.alg, pow_value(m.out[y] for y in u))
        for a in m.alphabet:
            succ = frozenset(z for y in u for z in m.trans[y][a].elements)
            trans[(u, a)] = succ
            if succ not in subsets:
                agenda.append(succ)
    return DeterminisedMoore(m.alphabet, m.alg, subsets, out, trans)


# ---------------------------------------------------------------------------
# forward engine for generative machines


def _step_value(gc: GenerativeCoalgebra, y, label) -> MonadValue:
    """Successor branching of `y` restricted to moves emitting `label`."""
    mv = gc.c[y]
    if gc.kind is MonadKind.POW:
        return pow_value(u.target for u in mv.payload
                         if isinstance(u, Move) and u.label == label)
    return sub_dist((u.target, w) for u, w in mv.payload
                    if isinstance(u, Move) and u.label == label)


def _accept_value(gc: GenerativeCoalgebra, y):
    mv = gc.c[y]
    if gc.kind is MonadKind.POW:
        return any(isinstance(u, Done) for u in mv.payload)
    return sum((w for u, w in mv.payload if isinstance(u, Done)), Fraction(0))


def em_eval_ta(gc: GenerativeCoalgebra, x, word) -> object:
    """Forward run over emitted labels, collapsed by the termination weight."""
    u = monad_unit(gc.kind, gc.states.require(x))
    for a in word:
        gc.labels.require(a)
        u = monad_bind(gc.kind, u, lambda y: _step_value(gc, y, a))
    return algebra_eval(gc.alg, functor_map(gc.kind, lambda y: _accept_value(gc, y), u))


def em_language_ta(gc: GenerativeCoalgebra, x, depth: int) -> TruncatedLanguage:
    table: dict = {}

    def walk(prefix: tuple, u: MonadValue):
        table[prefix] = algebra_eval(gc.alg,
                                     functor_map(gc.kind, lambda y: _accept_value(gc, y), u))
        if len(prefix) == depth:
            return
        for a in gc.labels:
            walk(prefix + (a,), monad_bind(gc.kind, u, lambda y: _step_value(gc, y, a)))

    walk((), monad_unit(gc.kind, gc.states.require(x)))
    return TruncatedLanguage(gc.labels, depth, table)


# ---------------------------------------------------------------------------
# fixpoint (complete-trace) engine


def _prepend_traces(kind: MonadKind, label, traces: MonadValue, depth: int) -> MonadValue:
    """Prefix every trace with `label`, discarding traces that would exceed depth."""
    if kind is MonadKind.POW:
        return pow_value(((label,) + w, s) for w, s in traces.payload if len(w) < depth)
    return sub_dist((((label,) + w, s), m) for (w, s), m in traces.payload if len(w) < depth)


def kleisli_iterates(gc: GenerativeCoalgebra, depth: int, n_iters: int) -> list[dict]:
    """Kleene chain of per-state trace approximations, from the bottom element.

    Traces longer than `depth` are dropped as they arise, so every iterate
    stays bounded.
    """
    bottom = pow_value([]) if gc.kind is MonadKind.POW else sub_dist([])
    current = {x: bottom for x in gc.states}
    chain = [dict(current)]
    for _ in range(n_iters):
        def step(u, prev=current):
            if isinstance(u, Done):
                return monad_unit(gc.kind, ((), u.terminal))
            return _prepend_traces(gc.kind, u.label, prev[u.target], depth)
        current = {x: monad_bind(gc.kind, gc.c[x], step) for x in gc.states}
        chain.append(dict(current))
    return chain


def kleisli_traces(gc: GenerativeCoalgebra, x, depth: int) -> TruncatedTraceSet:
    """Exact set/subdistribution of complete traces of length <= depth from x."""
    gc.states.require(x)
    chain = kleisli_iterates(gc, depth, depth + 1)
    return TruncatedTraceSet(gc.kind, depth, chain[depth + 1][x])


def kbar(ts: TruncatedTraceSet, alphabet: Universe, depth: int,
         terminal=CHECK) -> TruncatedLanguage:
    """Collapse a trace set to the language of words that terminate.

    Only single-terminal machines are supported: the table is the
    characteristic function (powerset) or per-word termination mass
    (subdistribution) of traces ending in `terminal`.
    """
    for _w, s in ts.payload.support:
        if s != terminal:
            raise KernelError(f"trace terminal {s!r} is not {terminal!r}; "
                              "multi-terminal trace sets have no language collapse")
    if ts.kind is MonadKind.POW:
        members = {w for w, _ in ts.payload.elements}
        fn = lambda w: w in members
    else:
        masses = {w: m for (w, _), m in ts.payload.payload}
        fn = lambda w: masses.get(w, Fraction(0))
    return TruncatedLanguage.tabulate(alphabet, depth, fn)


# ---------------------------------------------------------------------------
# logical engine


def logic_eval_word(m: MooreCoalgebra, x, word, memoize: bool = True) -> object:
    """Evaluate one word as a test: recurse on the suffix under the modality.

    Works for any branching kind, including double powerset.
    """
    m.states.require(x)
    word = tuple(m.alphabet.require(a) for a in word)
    memo: dict = {}

    def ev(y, suffix: tuple):
        key = (y, suffix)
        if memoize and key in memo:
            return memo[key]
        if not suffix:
            val = m.out[y]
        else:
            a, rest = suffix[0], suffix[1:]
            val = algebra_eval(m.alg, functor_map(m.kind, lambda z: ev(z, rest),
                                                  m.trans[y][a]))
        if memoize:
            memo[key] = val
        return val

    return ev(x, word)


def logic_language_word(m: MooreCoalgebra, x, depth: int) -> TruncatedLanguage:
    memo: dict = {}

    def ev(y, suffix: tuple):
        key = (y, suffix)
        if key not in memo:
            if not suffix:
                memo[key] = m.out[y]
            else:
                a, rest = suffix[0], suffix[1:]
                memo[key] = algebra_eval(m.alg, functor_map(m.kind, lambda z: ev(z, rest),
                                                            m.trans[y][a]))
        return memo[key]

    return TruncatedLanguage.tabulate(m.alphabet, depth, lambda w: ev(x, w))


def logic_eval_tree(tc: TreeCoalgebra, x, tree: Tree) -> object:
    """Evaluate one tree as a test: match root symbols, meet over children."""
    if tree.symbol not in tc.signature or len(tree.children) != tc.signature[tree.symbol]:
        raise KernelError(f"tree node {tree.symbol!r} does not fit the signature")
    bot = omega_bot(tc.alg)

    def match(node, t: Tree):
        sym, kids = node
        if sym != t.symbol:
            return bot
        return omega_meet(tc.alg, (ev(kid, sub) for kid, sub in zip(kids, t.children)))

    def ev(y, t: Tree):
        if t.symbol not in tc.signature or len(t.children) != tc.signature[t.symbol]:
            raise KernelError(f"tree node {t.symbol!r} does not fit the signature")
        return algebra_eval(tc.alg, functor_map(tc.kind, lambda node: match(node, t), tc.c[y]))

    return ev(tc.states.require(x), tree)


def logic_eval_generative(gc: GenerativeCoalgebra, x, word) -> object:
    """Test a word against a generative machine: match labels, end on a terminal."""
    gc.states.require(x)
    word = tuple(gc.labels.require(a) for a in word)
    bot = omega_bot(gc.alg)
    top = Fraction(1) if gc.alg is Modality.EXPECT else True
    memo: dict = {}

    def ev(y, suffix: tuple):
        key = (y, suffix)
        if key not in memo:
            if not suffix:
                memo[key] = algebra_eval(
                    gc.alg, functor_map(gc.kind,
                                        lambda u: top if isinstance(u, Done) else bot,
                                        gc.c[y]))
            else:
                a, rest = suffix[0], suffix[1:]
                memo[key] = algebra_eval(
                    gc.alg, functor_map(gc.kind,
                                        lambda u: (ev(u.target, rest)
                                                   if isinstance(u, Move) and u.label == a
                                                   else bot),
                                        gc.c[y]))
        return memo[key]

    return ev(x, word)


def logic_language_generative(gc: GenerativeCoalgebra, x, depth: int) -> TruncatedLanguage:
    return TruncatedLanguage.tabulate(gc.labels, depth,
                                      lambda w: logic_eval_generative(gc, x, w))


def logic_eval_strange(sc: StrangeCoalgebra, x, n: int) -> bool:
    """True iff the state can stop outright, or some successor can within n steps."""
    if n < 0:
        raise KernelError("step count must be >= 0")
    sc.states.require(x)
    memo: dict = {}

    def ev(y, k: int) -> bool:
        key = (y, k)
        if key not in memo:
            succ = sc.c[y].elements
            memo[key] = STAR in succ or (
                k > 0 and any(ev(z, k - 1) for z in succ if z != STAR))
        return memo[key]

    return ev(x, n)


def strange_to_generative(sc: StrangeCoalgebra, label: str = "a") -> GenerativeCoalgebra:
    """Embed over a one-letter alphabet: successors emit the letter, STAR terminates."""
    c = {x: pow_value([Done(CHECK) if u == STAR else Move(label, u)
                       for u in sc.c[x].elements])
         for x in sc.states}
    return GenerativeCoalgebra(sc.states, Universe([label]), MonadKind.POW, c)


# ---------------------------------------------------------------------------
# evaluator for machines with semantic states


def cia_eval(gen: GeneralizedCoalgebra, x, word) -> object:
    """Unfold ordinary states one letter at a time; look the rest of the word
    up as soon as a semantic state is reached."""
    gen.states.require(x)
    word = tuple(gen.alphabet.require(a) for a in word)
    memo: dict = {}

    def ev(y, suffix: tuple):
        key = (y, suffix)
        if key not in memo:
            tag, body = gen.c[y]
            if tag == "lang":
                if len(suffix) > body.depth:
                    raise KernelError(
                        f"semantic state {y!r} (depth {body.depth}) cannot answer "
                        f"a residual word of length {len(suffix)}")
                memo[key] = body.value(suffix)
            elif not suffix:
                memo[key] = body[0]
            else:
                a, rest = suffix[0], suffix[1:]
                memo[key] = algebra_eval(gen.alg,
                                         functor_map(gen.kind, lambda z: ev(z, rest),
                                                     body[1][a]))
        return memo[key]

    return ev(x, word)


def cia_language(gen: GeneralizedCoalgebra, x, depth: int) -> TruncatedLanguage:
    return TruncatedLanguage.tabulate(gen.alphabet, depth, lambda w: cia_eval(gen, x, w))


# ---------------------------------------------------------------------------
# comparison report


@dataclass
class PairVerdict:
    engine_a: str
    engine_b: str
    state: object
    equal: bool
    first_difference: Optional[tuple]  # word, or step count for strange machines


@dataclass
class SemanticsReport:
    machine_kind: str
    depth: int
    engines: list[str]
    languages: dict  # engine -> state -> TruncatedLanguage (or {state: values})
    verdicts: list[PairVerdict]
    all_equal: bool
    trace_sets: dict = field(default_factory=dict)  # state -> TruncatedTraceSet
    retained_mass: dict = field(default_factory=dict)  # state -> Fraction
    collapse_witnesses: list = field(default_factory=list)  # (x, y) equal-language, distinct-trace pairs
    collapse_injective: Optional[bool] = None


def _pairwise(engines: list[str], langs: dict, states) -> list[PairVerdict]:
    verdicts = []
    for i, ea in enumerate(engines):
        for eb in engines[i + 1:]:
            for x in states:
                eq, word = language_equal(langs[ea][x], langs[eb][x])
                verdicts.append(PairVerdict(ea, eb, x, eq, word))
    return verdicts


def compare_semantics(machine, depth: int) -> SemanticsReport:
    """Run every engine that applies to the machine and compare the results.

    Moore machines run the forward and logical engines.  Generative machines
    run forward, logical and the trace-set engine collapsed to a language;
    their report also says whether the collapse is injective on this machine
    (states with equal languages but different trace sets witness that it
    is not).  Strange machines compare the stop-logic against trace sets.
    """
    if isinstance(machine, MooreCoalgebra):
        if machine.kind is MonadKind.DOUBLE_POW:
            langs = {"logic": {x: logic_language_word(machine, x, depth)
                               for x in machine.states}}
            return SemanticsReport("moore", depth, ["logic"], langs, [], True)
        langs = {
            "em": {x: em_language_bt(machine, x, depth) for x in machine.states},
            "logic": {x: logic_language_word(machine, x, depth) for x in machine.states},
        }
        verdicts = _pairwise(["em", "logic"], langs, machine.states)
        return SemanticsReport("moore", depth, ["em", "logic"], langs, verdicts,
                               all(v.equal for v in verdicts))

    if isinstance(machine, GenerativeCoalgebra):
        if len(machine.terminals) != 1:
            raise KernelError("language comparison needs a single terminal")
        terminal = machine.terminals.elements[0]
        traces = {x: kleisli_traces(machine, x, depth) for x in machine.states}
        langs = {
            "em": {x: em_language_ta(machine, x, depth) for x in machine.states},
            "logic": {x: logic_language_generative(machine, x, depth)
                      for x in machine.states},
            "kleisli": {x: kbar(traces[x], machine.labels, depth, terminal)
                        for x in machine.states},
        }
        verdicts = _pairwise(["em", "logic", "kleisli"], langs, machine.states)
        retained = {}
        if machine.kind is MonadKind.SUBDIST:
            retained = {x: traces[x].retained_mass() for x in machine.states}
        witnesses = _collapse_witnesses(machine.states, langs["em"],
                                        {x: traces[x].payload for x in machine.states})
        return SemanticsReport("generative", depth, ["em", "logic", "kleisli"], langs,
                               verdicts, all(v.equal for v in verdicts),
                               trace_sets=traces, retained_mass=retained,
                               collapse_witnesses=witnesses,
                               collapse_injective=not witnesses)

    if isinstance(machine, StrangeCoalgebra):
        gc = strange_to_generative(machine)
        logic_tables = {x: tuple(logic_eval_strange(machine, x, n) for n in range(depth + 1))
                        for x in machine.states}
        traces = {x: kleisli_traces(gc, x, depth) for x in machine.states}
        witnesses = []
        verdicts = []
        states = list(machine.states)
        for i, x in enumerate(states):
            for y in states[i + 1:]:
                log_eq = logic_tables[x] == logic_tables[y]
                kl_eq = traces[x].payload == traces[y].payload
                if log_eq and not kl_eq:
                    witnesses.append((x, y))
                verdicts.append(PairVerdict("logic", "kleisli", (x, y), log_eq == kl_eq,
                                            None))
        return SemanticsReport("strange", depth, ["logic", "kleisli"],
                               {"logic": logic_tables}, verdicts,
                               all(v.equal for v in verdicts),
                               trace_sets=traces,
                               collapse_witnesses=witnesses,
                               collapse_injective=not witnesses)

    raise KernelError(f"cannot compare semantics of {type(machine).__name__}")


def _collapse_witnesses(states: Universe, langs: dict, trace_payloads: dict) -> list:
    """State pairs with equal languages but different trace sets."""
    out = []
    elems = list(states)
    for i, x in enumerate(elems):
        for y in elems[i + 1:]:
            eq, _ = language_equal(langs[x], langs[y])
            if eq and trace_payloads[x] != trace_payloads[y]:
                out.append((x, y))
    return out
