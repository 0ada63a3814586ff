"""Platform groups: free groups, symmetric groups and braid groups.

Every platform exposes the same small contract over :class:`~conjsec.words.Word`
values: a canonical word per group element (:func:`normal_form`), equality,
length of the canonical word, and a generator list.  Braid groups use the
Garside left normal form; symmetric groups reduce to permutations; free groups
use free reduction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from . import garside
from .words import (
    Letter,
    Word,
    WordError,
    concat,
    conjugate,
    cyclic_reduce,
    free_reduce,
    invert,
)

KINDS = {"free": "free", "sym": "symmetric", "symmetric": "symmetric", "braid": "braid"}
_SHORT = {"free": "free", "symmetric": "sym", "braid": "braid"}

MAX_SYMMETRIC_DEGREE = 8


class PlatformError(ValueError):
    pass


@dataclass(frozen=True)
class PlatformDescriptor:
    kind: str
    rank: int

    def __post_init__(self) -> None:
        if self.kind not in ("free", "symmetric", "braid"):
            raise PlatformError(f"unknown platform kind {self.kind!r}")
        if self.rank < 2:
            raise PlatformError(f"rank must be at least 2, got {self.rank}")
        if self.kind == "symmetric" and self.rank > MAX_SYMMETRIC_DEGREE:
            raise PlatformError(f"symmetric platform limited to n <= {MAX_SYMMETRIC_DEGREE}")

    @property
    def alphabet_size(self) -> int:
        return self.rank if self.kind == "free" else self.rank - 1

    @classmethod
    def parse(cls, text: str) -> PlatformDescriptor:
        """Parse ``free:r``, ``sym:n`` or ``braid:n``."""
        kind, sep, rank = text.partition(":")
        if not sep or kind not in KINDS or not rank.isdigit():
            raise PlatformError(f"bad platform {text!r}; expected free:r, sym:n or braid:n")
        return cls(KINDS[kind], int(rank))

    def __str__(self) -> str:
        return f"{_SHORT[self.kind]}:{self.rank}"

    def generators(self) -> tuple[Word, ...]:
        n = self.alphabet_size
        return tuple(Word((Letter(i, 1),), n, reduced=True) for i in range(1, n + 1))

    def word(self, ints: Sequence[int]) -> Word:
        return Word.from_ints(ints, self.alphabet_size)

    def identity(self) -> Word:
        return Word.identity(self.alphabet_size)


@dataclass(frozen=True)
class Permutation:
    """A permutation of ``{1..n}`` in one-line notation."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(self.mapping) != list(range(1, len(self.mapping) + 1)):
            raise PlatformError(f"{self.mapping} is not a permutation")

    @property
    def n(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, *cycles: Sequence[int]) -> Permutation:
        m = list(range(1, n + 1))
        for cyc in cycles:
            c = list(cyc)
            for a, b in zip(c, c[1:] + c[:1]):
                m[a - 1] = b
        return cls(tuple(m))

    @classmethod
    def from_zero_based(cls, p: Sequence[int]) -> Permutation:
        return cls(tuple(i + 1 for i in p))

    def zero_based(self) -> tuple[int, ...]:
        return tuple(i - 1 for i in self.mapping)

    def __call__(self, k: int) -> int:
        return self.mapping[k - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        """Composition ``self ∘ other`` (``other`` acts first)."""
        return Permutation(tuple(self.mapping[j - 1] for j in other.mapping))

    def inverse(self) -> Permutation:
        return Permutation.from_zero_based(garside.inverse(self.zero_based()))

    def cycle_type(self) -> tuple[int, ...]:
        seen, lengths = set(), []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            k, cur = 0, start
            while cur not in seen:
                seen.add(cur)
                cur = self(cur)
                k += 1
            lengths.append(k)
        return tuple(sorted(lengths))


def _check(p: PlatformDescriptor, *words: Word) -> None:
    for w in words:
        if w.alphabet_size != p.alphabet_size:
            raise PlatformError(
                f"word over {w.alphabet_size} generators used on {p} "
                f"({p.alphabet_size} generators)")


@lru_cache(maxsize=1 << 16)
def _braid_nf(n: int, letters: tuple[int, ...]) -> tuple[int, ...]:
    return garside.to_letters(garside.from_letters(n, letters))


def garside_form(p: PlatformDescriptor, w: Word) -> garside.NormalForm:
    if p.kind != "braid":
        raise PlatformError("Garside normal form needs a braid platform")
    _check(p, w)
    return garside.from_letters(p.rank, w.to_ints())


def normal_form(p: PlatformDescriptor, w: Word) -> Word:
    """Canonical word: equal outputs exactly for equal group elements."""
    _check(p, w)
    if p.kind == "free":
        return free_reduce(w)
    if p.kind == "symmetric":
        perm = garside.permutation_of(p.rank, w.to_ints())
        letters = garside.simple_word(perm)
    else:
        letters = _braid_nf(p.rank, free_reduce(w).to_ints())
    return Word(tuple(Letter(abs(i), 1 if i > 0 else -1) for i in letters),
                p.alphabet_size, reduced=True)


def equal(p: PlatformDescriptor, u: Word, v: Word) -> bool:
    if p.kind in ("braid", "symmetric") and \
            garside.permutation_of(p.rank, u.to_ints()) != garside.permutation_of(p.rank, v.to_ints()):
        return False
    return normal_form(p, u) == normal_form(p, v)


def word_length(p: PlatformDescriptor, w: Word) -> int:
    return len(normal_form(p, w))


def multiply(p: PlatformDescriptor, *words: Word) -> Word:
    return normal_form(p, concat(*words))


def permutation_image(p: PlatformDescriptor, w: Word) -> Permutation:
    if p.kind == "free":
        raise PlatformError("free groups have no permutation image")
    _check(p, w)
    return Permutation.from_zero_based(garside.permutation_of(p.rank, w.to_ints()))


def free_conjugacy_search(a: Word, b: Word) -> Optional[Word]:
    """Exact conjugacy search in a free group.

    ``a`` and ``b`` are conjugate iff their cyclically reduced cores are cyclic
    rotations of each other.  With ``a = u c u^-1``, ``b = v d v^-1`` and
    ``c = P Q``, ``d = Q P``, the witness is ``v P^-1 u^-1``.
    """
    if a.alphabet_size != b.alphabet_size:
        raise WordError("alphabet mismatch")
    core_a, conj_a = cyclic_reduce(a)
    core_b, conj_b = cyclic_reduce(b)
    if len(core_a) != len(core_b):
        return None
    k = len(core_a)
    ca, cb = core_a.letters, core_b.letters
    for shift in range(max(k, 1)):
        if ca[shift:] + ca[:shift] == cb:
            prefix = Word(ca[:shift], a.alphabet_size)
            return free_reduce(concat(conj_b, invert(prefix), invert(conj_a)))
    return None


def finite_conjugacy_search(n: int, a: Permutation, b: Permutation) -> Optional[Permutation]:
    """Try every ``x`` in ``S_n`` (lexicographic order) for ``x a x^-1 = b``."""
    if not 1 <= n <= MAX_SYMMETRIC_DEGREE:
        raise PlatformError(f"n must be in 1..{MAX_SYMMETRIC_DEGREE}, got {n}")
    if a.n != n or b.n != n:
        raise PlatformError("permutation degree mismatch")
    for m in itertools.permutations(range(1, n + 1)):
        x = Permutation(m)
        if x * a * x.inverse() == b:
            return x
    return None


def permutation_word(p: PlatformDescriptor, perm: Permutation) -> Word:
    """A positive word in the adjacent transpositions mapping to ``perm``."""
    letters = garside.simple_word(perm.zero_based())
    return p.word(letters)


def group_conjugate(p: PlatformDescriptor, a: Word, x: Word) -> Word:
    """Normal form of ``x a x^-1`` in the platform group."""
    return normal_form(p, conjugate(a, x))
