"""Left normal form for braid groups.

A braid is held as ``Δ^inf · A_1 ⋯ A_k`` where each ``A_j`` is a permutation
braid, stored as a 0-based permutation tuple in one-line notation.  The Artin
generator ``σ_i`` maps to the transposition of positions ``i-1`` and ``i``; the
permutation of a positive word ``σ_{i_1} ⋯ σ_{i_k}`` is the composite
``s_{i_1} ∘ ⋯ ∘ s_{i_k}``.

Invariants of a normal form: no factor is the identity or Δ, and every adjacent
pair ``(A, B)`` is left-weighted, meaning the starting set of ``B`` (its left
descents) lies inside the finishing set of ``A`` (its right descents).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Perm = tuple[int, ...]


def compose(p: Perm, q: Perm) -> Perm:
    """``p ∘ q`` (apply ``q`` first)."""
    return tuple([p[j] for j in q])


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def identity(n: int) -> Perm:
    return tuple(range(n))


def transposition(n: int, i: int) -> Perm:
    """Image of ``σ_i`` (1-based) in ``S_n``."""
    p = list(range(n))
    p[i - 1], p[i] = p[i], p[i - 1]
    return tuple(p)


@lru_cache(maxsize=1 << 16)
def right_descents(p: Perm) -> frozenset[int]:
    """Generators ``i`` with ``A = A' σ_i``: the finishing set."""
    return frozenset(i + 1 for i in range(len(p) - 1) if p[i] > p[i + 1])


@lru_cache(maxsize=1 << 16)
def left_descents(p: Perm) -> frozenset[int]:
    """Generators ``i`` with ``A = σ_i A'``: the starting set."""
    return right_descents(inverse(p))


@lru_cache(maxsize=1 << 16)
def tau(p: Perm) -> Perm:
    """Conjugation by Δ: ``Δ A Δ^-1``."""
    n = len(p)
    return tuple([n - 1 - p[n - 1 - i] for i in range(n)])


@lru_cache(maxsize=1 << 12)
def simple_word(p: Perm) -> tuple[int, ...]:
    """Positive Artin word of a permutation braid, peeling the smallest
    right descent each time."""
    letters: list[int] = []
    cur = list(p)
    while True:
        for i in range(len(cur) - 1):
            if cur[i] > cur[i + 1]:
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
                letters.append(i + 1)
                break
        else:
            break
    return tuple(reversed(letters))


@lru_cache(maxsize=1 << 20)
def left_weight(a: Perm, b: Perm) -> tuple[Perm, Perm]:
    """Rewrite the product ``A·B`` of two permutation braids as a left-weighted
    pair by moving generators from the front of ``B`` to the back of ``A``."""
    while True:
        movable = left_descents(b) - right_descents(a)
        if not movable:
            return a, b
        i = min(movable)
        a = tuple([a[j] for j in transposition(len(a), i)])
        b = compose(transposition(len(b), i), b)


@dataclass(frozen=True)
class NormalForm:
    n: int
    inf: int
    factors: tuple[Perm, ...]

    @classmethod
    def identity(cls, n: int) -> NormalForm:
        return cls(n, 0, ())

    def is_valid(self) -> bool:
        ident, delta = identity(self.n), _delta(self.n)
        for f in self.factors:
            if len(f) != self.n or sorted(f) != list(range(self.n)):
                return False
            if f == ident or f == delta:
                return False
        return all(left_descents(b) <= right_descents(a)
                   for a, b in zip(self.factors, self.factors[1:]))

    def canonical_length(self) -> int:
        return len(self.factors)


@lru_cache(maxsize=None)
def _delta(n: int) -> Perm:
    return tuple(range(n - 1, -1, -1))


def _strip(inf: int, factors: list[Perm], n: int) -> tuple[int, list[Perm]]:
    delta, ident = _delta(n), identity(n)
    lo = 0
    while lo < len(factors) and factors[lo] == delta:
        lo += 1
    hi = len(factors)
    while hi > lo and factors[hi - 1] == ident:
        hi -= 1
    return inf + lo, factors[lo:hi]


def _normalise(inf: int, factors: list[Perm], n: int) -> tuple[int, list[Perm]]:
    """Full left-weighting by repeated sweeps, for the rare cases where a single
    backward pass leaves an identity or Δ stranded mid-sequence."""
    ident = identity(n)
    while True:
        changed = False
        for i in range(len(factors) - 1):
            a, b = left_weight(factors[i], factors[i + 1])
            if a != factors[i]:
                factors[i], factors[i + 1] = a, b
                changed = True
        factors = [f for f in factors if f != ident]
        inf, factors = _strip(inf, factors, n)
        if not changed:
            return inf, factors


class _Tables:
    """Permutations of one degree interned as small integers, with memoised
    left-weighting and Δ-conjugation on the integer ids."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.perms: list[Perm] = []
        self.index: dict[Perm, int] = {}
        self.ident = self.intern(identity(n))
        self.delta = self.intern(_delta(n))
        self._lw: dict[int, tuple[int, int]] = {}
        self._rmul: dict[int, int] = {}
        self._lmul: dict[int, int] = {}
        self._lcomp: dict[int, int] = {}
        self._tau: dict[int, int] = {}

    def intern(self, p: Perm) -> int:
        i = self.index.get(p)
        if i is None:
            i = self.index[p] = len(self.perms)
            self.perms.append(p)
        return i

    def tau(self, i: int) -> int:
        r = self._tau.get(i)
        if r is None:
            r = self._tau[i] = self.intern(tau(self.perms[i]))
        return r

    def right_mul(self, a: int, g: int) -> int:
        """``A σ_g`` if that is still a permutation braid, else -1."""
        key = (a << 4) | g
        r = self._rmul.get(key)
        if r is None:
            p = self.perms[a]
            if p[g - 1] > p[g]:
                r = -1
            else:
                r = self.intern(compose(p, transposition(self.n, g)))
            self._rmul[key] = r
        return r

    def left_mul(self, a: int, g: int) -> int:
        """``σ_g A`` if that is still a permutation braid, else -1."""
        key = (a << 4) | g
        r = self._lmul.get(key)
        if r is None:
            p = self.perms[a]
            if g in left_descents(p):
                r = -1
            else:
                r = self.intern(compose(transposition(self.n, g), p))
            self._lmul[key] = r
        return r

    def left_complement(self, a: int) -> int:
        """The simple ``*A`` with ``*A · A = Δ``."""
        r = self._lcomp.get(a)
        if r is None:
            r = self._lcomp[a] = self.intern(compose(_delta(self.n), inverse(self.perms[a])))
        return r

    def left_weight(self, a: int, b: int) -> tuple[int, int]:
        key = (a << 16) | b
        r = self._lw.get(key)
        if r is None:
            pa, pb = left_weight(self.perms[a], self.perms[b])
            r = self._lw[key] = (self.intern(pa), self.intern(pb))
        return r


@lru_cache(maxsize=None)
def _tables(n: int) -> _Tables:
    return _Tables(n)


def _append(t: _Tables, factors: list[int], s: int) -> int:
    """Append ``s`` to a left-weighted factor list in place, restoring
    left-weightedness.  Returns how many leading Δ factors were removed."""
    factors.append(s)
    lw = t.left_weight
    ident = t.ident
    stranded = False
    j = len(factors) - 2
    while j >= 0:
        a, b = lw(factors[j], factors[j + 1])
        if a == factors[j]:
            break
        factors[j] = a
        factors[j + 1] = b
        if b == ident and j + 2 < len(factors):
            stranded = True
        j -= 1
    if stranded:
        lifted, rest = _normalise(0, [t.perms[f] for f in factors], t.n)
        factors[:] = [t.intern(f) for f in rest]
        return lifted
    while factors and factors[-1] == ident:
        factors.pop()
    lifted = 0
    while lifted < len(factors) and factors[lifted] == t.delta:
        lifted += 1
    if lifted:
        del factors[:lifted]
    return lifted


def append_simple(nf: NormalForm, s: Perm) -> NormalForm:
    """Right-multiply a normal form by one permutation braid."""
    t = _tables(nf.n)
    factors = [t.intern(f) for f in nf.factors]
    lifted = _append(t, factors, t.intern(s))
    return NormalForm(nf.n, nf.inf + lifted, tuple(t.perms[f] for f in factors))


def multiply_letter(nf: NormalForm, letter: int) -> NormalForm:
    return from_letters(nf.n, (letter,), start=nf)


def from_letters(n: int, letters: Iterable[int],
                 start: NormalForm | None = None) -> NormalForm:
    """Normal form of ``start`` times the signed Artin word ``letters``.

    Runs of positive letters are cut greedily into permutation braids.  A run
    of negative letters is cut the same way into inverses ``B^-1``, and
    ``B^-1 = Δ^-1 · *B``; moving ``Δ^-1`` to the front conjugates every earlier
    factor by Δ.  That conjugation is applied lazily: stored factors are the
    true ones twisted by ``τ^parity``, and left-weighting commutes with τ.
    """
    t = _tables(n)
    seq = list(letters)
    inf = start.inf if start is not None else 0
    factors = [t.intern(f) for f in start.factors] if start is not None else []
    parity = 0
    ident = t.ident
    i, size = 0, len(seq)
    while i < size:
        cur = ident
        if seq[i] > 0:
            while i < size and seq[i] > 0:
                nxt = t.right_mul(cur, seq[i])
                if nxt < 0:
                    break
                cur = nxt
                i += 1
        else:
            # σ_a^-1 σ_b^-1 ... is the inverse of the positive word ... σ_b σ_a
            while i < size and seq[i] < 0:
                nxt = t.left_mul(cur, -seq[i])
                if nxt < 0:
                    break
                cur = nxt
                i += 1
            inf -= 1
            parity ^= 1
            cur = t.left_complement(cur)
        inf += _append(t, factors, t.tau(cur) if parity else cur)
    if parity:
        factors = [t.tau(f) for f in factors]
    return NormalForm(n, inf, tuple(t.perms[f] for f in factors))


def to_letters(nf: NormalForm) -> tuple[int, ...]:
    """Canonical signed Artin word of a normal form, freely reduced.

    With ``inf = -m < 0`` the first ``r = min(m, k)`` factors absorb one
    ``Δ^-1`` each: ``Δ^-r A_1 ⋯ A_r = ∏ Δ^-1 τ^{r-i}(A_i)`` and
    ``Δ^-1 S = (S^-1 Δ)^-1``, so the word reads ``Δ^-(m-r) N^-1 P``.
    """
    n = nf.n
    delta = _delta(n)
    delta_word = simple_word(delta)
    raw: list[int] = []
    factors = list(nf.factors)
    if nf.inf >= 0:
        raw.extend(delta_word * nf.inf)
    else:
        m = -nf.inf
        r = min(m, len(factors))
        raw.extend([-i for i in reversed(delta_word)] * (m - r))
        for i, a in enumerate(factors[:r]):
            s = a
            for _ in range((r - 1 - i) % 2):
                s = tau(s)
            comp = compose(inverse(s), delta)
            raw.extend(-x for x in reversed(simple_word(comp)))
        factors = factors[r:]
    for f in factors:
        raw.extend(simple_word(f))
    out: list[int] = []
    for x in raw:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def permutation_of(n: int, letters: Sequence[int]) -> Perm:
    p = list(range(n))
    # right-multiplying by s_i swaps the entries at positions i-1, i
    for x in letters:
        i = abs(x)
        p[i - 1], p[i] = p[i], p[i - 1]
    return tuple(p)
