"""Conjugation-based key exchange: Ko-Lee and Anshel-Anshel-Goldfeld.

Both parties' randomness is an explicit :class:`random.Random`, so every run is
a pure function of its seeds.  :class:`Transcript` holds only what an
eavesdropper sees and is the interchange object for :mod:`conjsec.attacks`.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Union

from .platform import PlatformDescriptor, equal, normal_form
from .words import (
    Word,
    concat,
    conjugate,
    format_word,
    invert,
    parse_word,
    random_reduced_word,
    substitute,
)

Role = Literal["alice", "bob"]


class ProtocolError(ValueError):
    pass


def default_pools(p: PlatformDescriptor) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Commuting generator pools split around the middle strand.

    Alice gets ``σ_1 .. σ_{h-1}``, Bob ``σ_{h+1} .. σ_{n-1}`` with ``h = n // 2``.
    """
    if p.kind == "free":
        raise ProtocolError("free groups have no commuting generator pools")
    h = p.rank // 2
    return tuple(range(1, h)), tuple(range(h + 1, p.rank))


@dataclass(frozen=True)
class KoLeeConfig:
    platform: PlatformDescriptor
    base: Word
    alice_generators: tuple[int, ...]
    bob_generators: tuple[int, ...]
    secret_length: int

    def __post_init__(self) -> None:
        p = self.platform
        if self.base.alphabet_size != p.alphabet_size:
            raise ProtocolError("base word is not over the platform alphabet")
        if self.secret_length < 0:
            raise ProtocolError("secret_length must be nonnegative")
        if set(self.alice_generators) & set(self.bob_generators):
            raise ProtocolError("generator pools must be disjoint")
        for i in (*self.alice_generators, *self.bob_generators):
            if not 1 <= i <= p.alphabet_size:
                raise ProtocolError(f"generator {i} outside platform alphabet")
        for i in self.alice_generators:
            for j in self.bob_generators:
                gi, gj = p.word([i]), p.word([j])
                if not equal(p, gi * gj, gj * gi):
                    raise ProtocolError(f"generators g{i} and g{j} do not commute")

    @classmethod
    def default(cls, platform: PlatformDescriptor, rng: random.Random,
                base_length: int = 8, secret_length: int = 20) -> KoLeeConfig:
        alice, bob = default_pools(platform)
        base = random_reduced_word(rng, base_length, platform.alphabet_size)
        return cls(platform, base, alice, bob, secret_length)

    def pool(self, role: Role) -> tuple[int, ...]:
        return self.alice_generators if role == "alice" else self.bob_generators


@dataclass(frozen=True)
class AAGConfig:
    platform: PlatformDescriptor
    alice_public: tuple[Word, ...]
    bob_public: tuple[Word, ...]
    secret_length: int

    def __post_init__(self) -> None:
        if not self.alice_public or not self.bob_public:
            raise ProtocolError("both public tuples must be nonempty")
        for w in (*self.alice_public, *self.bob_public):
            if w.alphabet_size != self.platform.alphabet_size:
                raise ProtocolError("public word is not over the platform alphabet")
        if self.secret_length < 0:
            raise ProtocolError("secret_length must be nonnegative")

    @classmethod
    def default(cls, platform: PlatformDescriptor, rng: random.Random, k: int = 5, m: int = 5,
                word_length: int = 8, secret_length: int = 20) -> AAGConfig:
        n = platform.alphabet_size
        alice = tuple(random_reduced_word(rng, word_length, n) for _ in range(k))
        bob = tuple(random_reduced_word(rng, word_length, n) for _ in range(m))
        return cls(platform, alice, bob, secret_length)


ProtocolConfig = Union[KoLeeConfig, AAGConfig]


@dataclass(frozen=True)
class Transcript:
    """Public view of one exchange.

    For AAG ``published`` is ``a_1..a_k`` followed by ``b_1..b_m``; ``k`` is
    ``len(alice_tokens)``.  Ko-Lee transcripts carry the public generator pools.
    """

    protocol: str
    platform: PlatformDescriptor
    published: tuple[Word, ...]
    alice_tokens: tuple[Word, ...]
    bob_tokens: tuple[Word, ...]
    pools: Optional[tuple[tuple[int, ...], tuple[int, ...]]] = None

    def to_dict(self) -> dict:
        d = {
            "protocol": self.protocol,
            "platform": str(self.platform),
            "published": [format_word(w) for w in self.published],
            "alice_tokens": [format_word(w) for w in self.alice_tokens],
            "bob_tokens": [format_word(w) for w in self.bob_tokens],
        }
        if self.pools is not None:
            d["pools"] = [list(self.pools[0]), list(self.pools[1])]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> Transcript:
        try:
            protocol = d["protocol"]
            p = PlatformDescriptor.parse(d["platform"])
            n = p.alphabet_size
            words = {key: tuple(parse_word(s, n) for s in d[key])
                     for key in ("published", "alice_tokens", "bob_tokens")}
            pools = None
            if "pools" in d:
                pools = (tuple(d["pools"][0]), tuple(d["pools"][1]))
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            raise ProtocolError(f"malformed transcript: {exc}") from exc
        if protocol not in ("kolee", "aag"):
            raise ProtocolError(f"unknown protocol {protocol!r}")
        t = cls(protocol, p, words["published"], words["alice_tokens"], words["bob_tokens"], pools)
        if protocol == "kolee" and (len(t.published) != 1 or len(t.alice_tokens) != 1
                                    or len(t.bob_tokens) != 1):
            raise ProtocolError("Ko-Lee transcript needs one published word and one token each")
        if protocol == "aag" and len(t.published) != len(t.alice_tokens) + len(t.bob_tokens):
            raise ProtocolError("AAG transcript token counts do not match the published tuple")
        return t

    @classmethod
    def from_json(cls, text: str) -> Transcript:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed transcript: {exc}") from exc
        if not isinstance(d, dict):
            raise ProtocolError("malformed transcript: not a JSON object")
        return cls.from_dict(d)


def canonical_bytes(p: PlatformDescriptor, w: Word) -> bytes:
    return f"{p}|{format_word(normal_form(p, w))}".encode()


def derive_key(p: PlatformDescriptor, shared: Word) -> bytes:
    """SHA-256 of the canonical serialization; equal elements give equal keys."""
    return hashlib.sha256(canonical_bytes(p, shared)).digest()


# Ko-Lee

def kolee_commit(cfg: KoLeeConfig, role: Role, rng: random.Random) -> tuple[Word, Word]:
    pool = cfg.pool(role)
    if not pool:
        raise ProtocolError(f"{role}'s generator pool is empty on {cfg.platform}")
    secret = random_reduced_word(rng, cfg.secret_length, cfg.platform.alphabet_size, pool)
    return secret, normal_form(cfg.platform, conjugate(cfg.base, secret))


def kolee_shared(cfg: KoLeeConfig, secret: Word, peer_token: Word) -> Word:
    return normal_form(cfg.platform, conjugate(peer_token, secret))


# AAG

def _public_for(cfg: AAGConfig, role: Role) -> tuple[tuple[Word, ...], tuple[Word, ...]]:
    """(words the role's secret is built from, words the role conjugates)."""
    if role == "alice":
        return cfg.bob_public, cfg.alice_public
    return cfg.alice_public, cfg.bob_public


def aag_commit(cfg: AAGConfig, role: Role,
               rng: random.Random) -> tuple[Word, Word, tuple[Word, ...]]:
    """Returns ``(template, secret, tokens)``.

    ``template`` is over an abstract alphabet indexing the opposite party's
    public words; ``secret`` is its substitution into them.
    """
    building, conjugated = _public_for(cfg, role)
    template = random_reduced_word(rng, cfg.secret_length, len(building))
    secret = substitute(template, building)
    tokens = tuple(normal_form(cfg.platform, conjugate(a, secret)) for a in conjugated)
    return template, secret, tokens


def aag_shared(cfg: AAGConfig, role: Role, template: Word, own_secret: Word,
               peer_tokens: Sequence[Word]) -> Word:
    """Both roles return the commutator ``x y x^-1 y^-1``."""
    building, _ = _public_for(cfg, role)
    if len(peer_tokens) != len(building):
        raise ProtocolError(f"expected {len(building)} peer tokens, got {len(peer_tokens)}")
    # substituting the peer's tokens conjugates our secret by the peer's secret
    conj = substitute(template, list(peer_tokens))
    if role == "alice":
        return normal_form(cfg.platform, invert(concat(conj, invert(own_secret))))
    return normal_form(cfg.platform, concat(conj, invert(own_secret)))


@dataclass
class ExchangeResult:
    transcript: Transcript
    alice_shared: Word
    bob_shared: Word
    alice_key: bytes
    bob_key: bytes
    # private material, kept for diagnostics and tests only
    alice_secret: Optional[Word] = field(repr=False, default=None)
    bob_secret: Optional[Word] = field(repr=False, default=None)
    alice_template: Optional[Word] = field(repr=False, default=None)
    bob_template: Optional[Word] = field(repr=False, default=None)


def party_rng(seed: object, role: Role, round_index: int = 0) -> random.Random:
    return random.Random(f"{seed}:round{round_index}:{role}")


def run_kolee(cfg: KoLeeConfig, alice_rng: random.Random, bob_rng: random.Random) -> ExchangeResult:
    x, token_a = kolee_commit(cfg, "alice", alice_rng)
    y, token_b = kolee_commit(cfg, "bob", bob_rng)
    k_a = kolee_shared(cfg, x, token_b)
    k_b = kolee_shared(cfg, y, token_a)
    p = cfg.platform
    t = Transcript("kolee", p, (cfg.base,), (token_a,), (token_b,),
                   (cfg.alice_generators, cfg.bob_generators))
    return ExchangeResult(t, k_a, k_b, derive_key(p, k_a), derive_key(p, k_b), x, y)


def run_aag(cfg: AAGConfig, alice_rng: random.Random, bob_rng: random.Random) -> ExchangeResult:
    tx, x, tokens_a = aag_commit(cfg, "alice", alice_rng)
    ty, y, tokens_b = aag_commit(cfg, "bob", bob_rng)
    k_a = aag_shared(cfg, "alice", tx, x, tokens_b)
    k_b = aag_shared(cfg, "bob", ty, y, tokens_a)
    p = cfg.platform
    t = Transcript("aag", p, cfg.alice_public + cfg.bob_public, tokens_a, tokens_b)
    return ExchangeResult(t, k_a, k_b, derive_key(p, k_a), derive_key(p, k_b), x, y, tx, ty)


def run_exchange(cfg: ProtocolConfig, seed: object, round_index: int = 0) -> ExchangeResult:
    alice_rng = party_rng(seed, "alice", round_index)
    bob_rng = party_rng(seed, "bob", round_index)
    if isinstance(cfg, KoLeeConfig):
        return run_kolee(cfg, alice_rng, bob_rng)
    return run_aag(cfg, alice_rng, bob_rng)


def combine_keys(p: PlatformDescriptor, shared: Sequence[Word]) -> bytes:
    """Digest of the length-framed canonical serializations of every round."""
    h = hashlib.sha256()
    for w in shared:
        blob = canonical_bytes(p, w)
        h.update(len(blob).to_bytes(4, "big"))
        h.update(blob)
    return h.digest()


@dataclass
class MultiRoundResult:
    rounds: list[ExchangeResult]
    alice_key: bytes
    bob_key: bytes

    @property
    def transcripts(self) -> list[Transcript]:
        return [r.transcript for r in self.rounds]


def multi_round(cfg: ProtocolConfig, rounds: int, seed: object) -> MultiRoundResult:
    """Run ``rounds`` independent exchanges and combine their shared elements."""
    if rounds < 1:
        raise ProtocolError("rounds must be at least 1")
    results = [run_exchange(cfg, seed, i) for i in range(rounds)]
    p = cfg.platform
    return MultiRoundResult(
        results,
        combine_keys(p, [r.alice_shared for r in results]),
        combine_keys(p, [r.bob_shared for r in results]),
    )


def make_config(protocol: str, platform: PlatformDescriptor, seed: object, *,
                secret_length: int = 20, base_length: int = 8, k: int = 5, m: int = 5,
                word_length: int = 8) -> ProtocolConfig:
    """Public parameters drawn from a seed separate from the parties' own."""
    rng = random.Random(f"{seed}:public")
    if protocol == "kolee":
        return KoLeeConfig.default(platform, rng, base_length, secret_length)
    if protocol == "aag":
        return AAGConfig.default(platform, rng, k, m, word_length, secret_length)
    raise ProtocolError(f"unknown protocol {protocol!r}")
