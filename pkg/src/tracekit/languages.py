"""Word and tree universes, and depth-truncated languages.

A truncated language is a total table from all words (trees) up to a fixed
depth to output values; it is the finite stand-in for the infinite language
spaces the engines converge to.  The truncation depth is always an explicit
parameter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from tracekit.kernel import KernelError, MonadKind, MonadValue, Universe, canon_key

#: Hard ceiling on enumerated objects, shared by words and trees.
DEFAULT_GUARD = 20_000


class SizeGuardError(KernelError):
    """An enumeration would exceed the configured object bound."""


class ShapeMismatchError(KernelError):
    """Two languages with different alphabet/depth/signature were compared."""


# ---------------------------------------------------------------------------
# words

Word = tuple  # a word is a tuple of letters


def enumerate_words(alphabet: Universe, depth: int, guard: int = DEFAULT_GUARD) -> list[tuple]:
    """All words of length <= depth, in length-then-alphabet order."""
    if depth < 0:
        raise KernelError("depth must be >= 0")
    count = sum(len(alphabet) ** i for i in range(depth + 1))
    if count > guard:
        raise SizeGuardError(f"{count} words exceeds guard {guard}")
    words: list[tuple] = [()]
    level: list[tuple] = [()]
    for _ in range(depth):
        level = [w + (a,) for w in level for a in alphabet]
        words.extend(level)
    return words


# ---------------------------------------------------------------------------
# trees


@dataclass(frozen=True)
class Tree:
    """A finite node-labelled tree over an operation/arity signature."""

    symbol: str
    children: tuple = ()

    def _canon_key_(self):
        return (12, canon_key(self.symbol), canon_key(self.children))

    @property
    def height(self) -> int:
        if not self.children:
            return 1
        return 1 + max(c.height for c in self.children)

    def __repr__(self):
        if not self.children:
            return str(self.symbol)
        return f"{self.symbol}({', '.join(repr(c) for c in self.children)})"


def enumerate_trees(signature: Mapping[str, int], depth: int, guard: int = DEFAULT_GUARD) -> list[Tree]:
    """All trees of height <= depth, in a deterministic structural order.

    Empty when the signature has no nullary symbol.
    """
    if depth < 1:
        raise KernelError("tree depth must be >= 1")
    symbols = sorted(signature, key=canon_key)
    trees: list[Tree] = [Tree(s) for s in symbols if signature[s] == 0]
    for _ in range(depth - 1):
        layer = list(trees)
        for s in symbols:
            n = signature[s]
            if n == 0:
                continue
            stack: list[list[Tree]] = [[]]
            for _slot in range(n):
                stack = [partial + [t] for partial in stack for t in layer]
            for children in stack:
                cand = Tree(s, tuple(children))
                if cand not in trees:
                    trees.append(cand)
        if len(trees) > guard:
            raise SizeGuardError(f"{len(trees)} trees exceeds guard {guard}")
    return sorted(trees, key=canon_key)


# ---------------------------------------------------------------------------
# truncated languages


@dataclass
class TruncatedLanguage:
    """Total map from words of length <= depth to output values."""

    alphabet: Universe
    depth: int
    table: dict

    def __post_init__(self):
        expected = enumerate_words(self.alphabet, self.depth)
        missing = [w for w in expected if w not in self.table]
        if missing or len(self.table) != len(expected):
            raise ShapeMismatchError(
                f"table must be total on words of length <= {self.depth}"
            )

    @classmethod
    def tabulate(cls, alphabet: Universe, depth: int, fn: Callable[[tuple], object]):
        return cls(alphabet, depth, {w: fn(w) for w in enumerate_words(alphabet, depth)})

    def value(self, word: tuple):
        try:
            return self.table[tuple(word)]
        except KeyError:
            raise KernelError(f"word {word!r} beyond truncation depth {self.depth}") from None

    def items(self):
        for w in enumerate_words(self.alphabet, self.depth):
            yield w, self.table[w]


def language_equal(l1: TruncatedLanguage, l2: TruncatedLanguage):
    """Table equality; on failure also return the first differing word."""
    if l1.alphabet != l2.alphabet or l1.depth != l2.depth:
        raise ShapeMismatchError("languages have different alphabet or depth")
    for w in enumerate_words(l1.alphabet, l1.depth):
        if l1.table[w] != l2.table[w]:
            return False, w
    return True, None


@dataclass
class TruncatedTreeLanguage:
    """Total map from trees of height <= depth to output values."""

    signature: dict
    depth: int
    table: dict

    def __post_init__(self):
        expected = enumerate_trees(self.signature, self.depth)
        if set(self.table) != set(expected):
            raise ShapeMismatchError(f"table must be total on trees of height <= {self.depth}")

    @classmethod
    def tabulate(cls, signature: Mapping[str, int], depth: int, fn: Callable[[Tree], object]):
        return cls(dict(signature), depth, {t: fn(t) for t in enumerate_trees(signature, depth)})


@dataclass
class TruncatedTraceSet:
    """Branching value over complete traces (word, terminal) of length <= depth."""

    kind: MonadKind
    depth: int
    payload: MonadValue

    def __post_init__(self):
        if self.payload.kind is not self.kind:
            raise ShapeMismatchError("trace payload kind disagrees with declared kind")
        for word, _terminal in self.payload.support:
            if len(word) > self.depth:
                raise ShapeMismatchError(f"trace {word!r} longer than depth {self.depth}")

    def retained_mass(self):
        """Total mass kept after truncation (subdistributions only)."""
        return self.payload.mass()
