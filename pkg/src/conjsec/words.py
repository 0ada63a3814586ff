"""Free-group word algebra.

A word is an immutable sequence of signed generator letters over a fixed
alphabet ``g1 .. gN``.  The empty word is the identity everywhere; there is no
separate identity object.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence


class WordError(ValueError):
    """Malformed word text, bad letter, or alphabet mismatch."""


class Letter(NamedTuple):
    index: int  # 1-based generator index
    sign: int  # +1 or -1

    def inverse(self) -> Letter:
        return Letter(self.index, -self.sign)

    def __str__(self) -> str:
        return f"g{self.index}" if self.sign == 1 else f"g{self.index}^-1"


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...]
    alphabet_size: int
    reduced: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if self.alphabet_size < 1:
            raise WordError(f"alphabet size must be positive, got {self.alphabet_size}")
        for let in self.letters:
            if not 1 <= let.index <= self.alphabet_size or let.sign not in (1, -1):
                shown = f"g{let.index}" + ("" if let.sign == 1 else f"^{let.sign}")
                raise WordError(f"letter {shown} outside alphabet of size {self.alphabet_size}")

    @classmethod
    def identity(cls, alphabet_size: int) -> Word:
        return cls((), alphabet_size, reduced=True)

    @classmethod
    def from_ints(cls, ints: Iterable[int], alphabet_size: int) -> Word:
        """Build from signed integers: ``3`` is g3, ``-3`` is g3^-1."""
        letters = []
        for i in ints:
            if i == 0:
                raise WordError("0 is not a letter")
            letters.append(Letter(abs(i), 1 if i > 0 else -1))
        return cls(tuple(letters), alphabet_size)

    def to_ints(self) -> tuple[int, ...]:
        return tuple(let.index * let.sign for let in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: Word) -> Word:
        _check_same_alphabet(self, other)
        return Word(self.letters + other.letters, self.alphabet_size)

    def __str__(self) -> str:
        return format_word(self)


def _check_same_alphabet(*words: Word) -> None:
    sizes = {w.alphabet_size for w in words}
    if len(sizes) > 1:
        raise WordError(f"words over different alphabets: {sorted(sizes)}")


def free_reduce(w: Word) -> Word:
    if w.reduced:
        return w
    stack: list[Letter] = []
    for let in w.letters:
        if stack and stack[-1].index == let.index and stack[-1].sign == -let.sign:
            stack.pop()
        else:
            stack.append(let)
    return Word(tuple(stack), w.alphabet_size, reduced=True)


def invert(w: Word) -> Word:
    return Word(tuple(Letter(l.index, -l.sign) for l in reversed(w.letters)),
                w.alphabet_size, reduced=w.reduced)


def concat(*words: Word) -> Word:
    if not words:
        raise WordError("concat needs at least one word")
    _check_same_alphabet(*words)
    letters: tuple[Letter, ...] = ()
    for w in words:
        letters += w.letters
    return Word(letters, words[0].alphabet_size)


def conjugate(a: Word, x: Word) -> Word:
    """Return the reduced form of ``x a x^-1``."""
    return free_reduce(concat(x, a, invert(x)))


def commutator(x: Word, y: Word) -> Word:
    """``x y x^-1 y^-1``, freely reduced."""
    return free_reduce(concat(x, y, invert(x), invert(y)))


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split a reduced word as ``conjugator * core * conjugator^-1``.

    The core is cyclically reduced: its last letter is not the inverse of its
    first.
    """
    w = free_reduce(w)
    letters = w.letters
    lo, hi = 0, len(letters)
    while hi - lo >= 2 and letters[lo].index == letters[hi - 1].index \
            and letters[lo].sign == -letters[hi - 1].sign:
        lo += 1
        hi -= 1
    n = w.alphabet_size
    return Word(letters[lo:hi], n, reduced=True), Word(letters[:lo], n, reduced=True)


def substitute(template: Word, images: Sequence[Word]) -> Word:
    """Replace each letter ``g_i^s`` of ``template`` by ``images[i-1]^s``."""
    if template.alphabet_size != len(images):
        raise WordError(
            f"template alphabet has {template.alphabet_size} letters "
            f"but {len(images)} images were given")
    if not images:
        raise WordError("no images")
    _check_same_alphabet(*images)
    inverses = [invert(im) for im in images]
    letters: list[Letter] = []
    for let in template.letters:
        im = images[let.index - 1] if let.sign == 1 else inverses[let.index - 1]
        letters.extend(im.letters)
    return free_reduce(Word(tuple(letters), images[0].alphabet_size))


_TOKEN = re.compile(r"g([1-9][0-9]*)(\^-1)?")


def parse_word(text: str, alphabet_size: int) -> Word:
    """Parse ``"g1 g2^-1 g1"``.  The empty string is the identity."""
    letters = []
    for tok in text.split():
        m = _TOKEN.fullmatch(tok)
        if m is None:
            raise WordError(f"unknown token {tok!r}")
        letters.append(Letter(int(m.group(1)), -1 if m.group(2) else 1))
    return Word(tuple(letters), alphabet_size)


def format_word(w: Word) -> str:
    return " ".join(str(let) for let in w.letters)


def reduced_words(alphabet_size: int, length: int) -> Iterator[Word]:
    """All freely reduced words of exactly ``length`` letters.

    Order is lexicographic on letters ranked ``g1, g1^-1, g2, g2^-1, ...``.
    """
    alphabet = [Letter(i, s) for i in range(1, alphabet_size + 1) for s in (1, -1)]

    def extend(prefix: list[Letter]) -> Iterator[Word]:
        if len(prefix) == length:
            yield Word(tuple(prefix), alphabet_size, reduced=True)
            return
        for let in alphabet:
            if prefix and prefix[-1].index == let.index and prefix[-1].sign == -let.sign:
                continue
            prefix.append(let)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def random_reduced_word(rng: random.Random, length: int, alphabet_size: int,
                        indices: Sequence[int] | None = None) -> Word:
    """Uniform sample among reduced words of exactly ``length`` letters.

    Letters come from ``indices`` (default: the whole alphabet).  The first
    letter is uniform over all signed letters, each later one over the letters
    that do not cancel its predecessor, so equal-length words are equiprobable.
    """
    pool = list(indices) if indices is not None else list(range(1, alphabet_size + 1))
    if length > 0 and not pool:
        raise WordError("cannot sample from an empty generator set")
    signed = [Letter(i, s) for i in pool for s in (1, -1)]
    letters: list[Letter] = []
    for _ in range(length):
        if letters:
            banned = letters[-1].inverse()
            choices = [l for l in signed if l != banned]
        else:
            choices = signed
        letters.append(rng.choice(choices))
    return Word(tuple(letters), alphabet_size, reduced=True)
