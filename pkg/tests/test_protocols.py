import hashlib
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from conjsec.attacks import ConjugacyInstance, brute_force_search, kolee_shared_from
from conjsec.platform import PlatformDescriptor, equal, normal_form
from conjsec.protocols import (
    AAGConfig,
    KoLeeConfig,
    ProtocolError,
    Transcript,
    aag_commit,
    aag_shared,
    canonical_bytes,
    combine_keys,
    default_pools,
    derive_key,
    kolee_commit,
    kolee_shared,
    make_config,
    multi_round,
    party_rng,
    run_exchange,
)
from conjsec.words import Word, conjugate, format_word, substitute

B3 = PlatformDescriptor.parse("braid:3")
B4 = PlatformDescriptor.parse("braid:4")
B8 = PlatformDescriptor.parse("braid:8")
F2 = PlatformDescriptor.parse("free:2")

# sha256(b"braid:3|"), the key of the identity element
IDENTITY_KEY_B3 = "a5a828a477d0dd196872c94f9d472934e0703e3aa621492e88f4268ec3ef4d73"


def kolee_b4(base, secret_length=1):
    return KoLeeConfig(B4, B4.word(base), (1,), (3,), secret_length)


def test_default_pools():
    assert default_pools(B8) == ((1, 2, 3), (5, 6, 7))
    assert default_pools(B4) == ((1,), (3,))
    with pytest.raises(ProtocolError):
        default_pools(F2)


def test_kolee_config_validation():
    with pytest.raises(ProtocolError):
        KoLeeConfig(B4, B4.word([2]), (1, 2), (2,), 3)
    with pytest.raises(ProtocolError):
        KoLeeConfig(B4, B4.word([2]), (1,), (2,), 3)  # g1, g2 do not commute
    with pytest.raises(ProtocolError):
        KoLeeConfig(B4, B4.word([2]), (1,), (4,), 3)


def test_kolee_commit_examples():
    cfg = kolee_b4([2, 1], secret_length=0)
    secret, token = kolee_commit(cfg, "alice", random.Random(0))
    assert secret == B4.identity() and token == normal_form(B4, cfg.base)
    cfg = kolee_b4([2])
    for s in range(20):
        secret, token = kolee_commit(cfg, "alice", random.Random(s))
        if secret == B4.word([1]):
            assert token == normal_form(B4, B4.word([1, 2, -1]))
            break
    else:
        pytest.fail("no seed produced the secret g1")
    a = kolee_commit(cfg, "bob", party_rng(9, "bob"))
    assert a == kolee_commit(cfg, "bob", party_rng(9, "bob"))


def test_kolee_shared_examples():
    cfg = kolee_b4([2])
    e = B4.identity()
    assert kolee_shared(cfg, e, normal_form(B4, cfg.base)) == normal_form(B4, cfg.base)
    x, y = B4.word([1]), B4.word([3])
    token_a = normal_form(B4, conjugate(cfg.base, x))
    token_b = normal_form(B4, conjugate(cfg.base, y))
    expected = normal_form(B4, B4.word([1, 3, 2, -3, -1]))
    assert kolee_shared(cfg, x, token_b) == expected
    assert kolee_shared(cfg, y, token_a) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 16))
def test_kolee_correctness(seed, secret_length):
    cfg = make_config("kolee", PlatformDescriptor.parse("braid:6"), seed,
                      secret_length=secret_length)
    r = run_exchange(cfg, seed)
    assert equal(cfg.platform, r.alice_shared, r.bob_shared)
    assert r.alice_key == r.bob_key


def free_aag():
    p, q = F2.word([1]), F2.word([2])
    return AAGConfig(F2, (p,), (q,), 1), p, q


def test_aag_commit_examples():
    cfg, p, q = free_aag()
    zero = AAGConfig(F2, cfg.alice_public, cfg.bob_public, 0)
    template, secret, tokens = aag_commit(zero, "alice", random.Random(1))
    assert len(template) == 0 and secret == F2.identity() and tokens == (p,)
    template = Word.from_ints([1], 1)
    x = substitute(template, cfg.bob_public)
    assert x == q
    assert normal_form(F2, conjugate(cfg.alice_public[0], x)) == F2.word([2, 1, -2])


def test_aag_shared_examples():
    cfg, p, q = free_aag()
    t = Word.from_ints([1], 1)
    x, y = q, p
    alice_tokens = (normal_form(F2, conjugate(p, x)),)
    bob_tokens = (normal_form(F2, conjugate(q, y)),)
    expected = F2.word([2, 1, -2, -1])
    assert aag_shared(cfg, "alice", t, x, bob_tokens) == expected
    assert aag_shared(cfg, "bob", t, y, alice_tokens) == expected
    # a trivial secret makes the commutator trivial
    e = Word.identity(1)
    assert aag_shared(cfg, "alice", e, F2.identity(), bob_tokens) == F2.identity()


def test_aag_tokens_differ_from_secret():
    cfg = make_config("aag", B4, 3, secret_length=6)
    for s in range(20):
        _, secret, tokens = aag_commit(cfg, "alice", random.Random(s))
        if len(normal_form(B4, secret)):
            assert all(format_word(t) != format_word(secret) for t in tokens)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_aag_correctness(seed):
    p = PlatformDescriptor.parse("braid:5")
    cfg = make_config("aag", p, seed, secret_length=8, k=3, m=3, word_length=6)
    r = run_exchange(cfg, seed)
    assert equal(p, r.alice_shared, r.bob_shared) and r.alice_key == r.bob_key


def test_aag_rejects_wrong_token_count():
    cfg, p, q = free_aag()
    with pytest.raises(ProtocolError):
        aag_shared(cfg, "alice", Word.from_ints([1], 1), q, (p, p))


def test_derive_key_examples():
    assert derive_key(B3, B3.identity()).hex() == IDENTITY_KEY_B3
    assert derive_key(B3, B3.word([1, 2, 1])) == derive_key(B3, B3.word([2, 1, 2]))
    assert derive_key(B3, B3.word([1, -1, 2])) == derive_key(B3, B3.word([2]))
    assert derive_key(B3, B3.word([1])) != derive_key(B3, B3.word([2]))


def test_multi_round_single_round_framing():
    cfg = make_config("kolee", B4, 0, secret_length=5)
    res = multi_round(cfg, 1, 0)
    blob = canonical_bytes(B4, res.rounds[0].alice_shared)
    assert res.alice_key == hashlib.sha256(len(blob).to_bytes(4, "big") + blob).digest()
    assert combine_keys(B4, [res.rounds[0].alice_shared]) == res.alice_key
    with pytest.raises(ProtocolError):
        multi_round(cfg, 0, 0)


def test_multi_round_agreement():
    p = PlatformDescriptor.parse("braid:6")
    for seed in range(20):
        cfg = make_config("kolee" if seed % 2 else "aag", p, seed, secret_length=10,
                          k=3, m=3, word_length=6)
        res = multi_round(cfg, 5, seed)
        assert res.alice_key == res.bob_key
        assert all(r.alice_key == r.bob_key for r in res.rounds)


def test_round_transcripts_distinct():
    cfg = make_config("kolee", B8, 0, secret_length=10)
    res = multi_round(cfg, 100, 0)
    dumps = [t.to_json() for t in res.transcripts]
    assert len(set(dumps)) == 100


def test_transcript_round_trip():
    for proto in ("kolee", "aag"):
        t = run_exchange(make_config(proto, B4, 2, secret_length=4), 2).transcript
        assert Transcript.from_json(t.to_json()) == t
        d = json.loads(t.to_json())
        assert {"protocol", "platform", "published", "alice_tokens", "bob_tokens"} <= set(d)


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"protocol": "kolee"}',
    '{"protocol": "rsa", "platform": "braid:4", "published": [], "alice_tokens": [], "bob_tokens": []}',
    '{"protocol": "kolee", "platform": "braid:4", "published": ["g7"], "alice_tokens": ["g1"], "bob_tokens": ["g1"]}',
    '{"protocol": "kolee", "platform": "braid:4", "published": ["g1", "g2"], "alice_tokens": ["g1"], "bob_tokens": ["g1"]}',
    '{"protocol": "aag", "platform": "braid:4", "published": ["g1"], "alice_tokens": ["g1"], "bob_tokens": ["g1"]}',
])
def test_malformed_transcripts(text):
    with pytest.raises(ProtocolError):
        Transcript.from_json(text)


def test_transcript_contains_no_private_word():
    for proto in ("kolee", "aag"):
        for seed in range(10):
            cfg = make_config(proto, B8, seed, secret_length=12)
            r = run_exchange(cfg, seed)
            blob = r.transcript.to_json()
            for secret in (r.alice_secret, r.bob_secret):
                assert format_word(secret) not in blob
                assert format_word(normal_form(B8, secret)) not in blob


def test_eavesdropper_sufficiency():
    # any valid witness, not just Alice's secret, reproduces the key
    cfg = KoLeeConfig(B4, B4.word([2, 1, 3, -2]), (1,), (3,), 3)
    for seed in range(5):
        r = run_exchange(cfg, seed)
        t = r.transcript
        inst = ConjugacyInstance(B4, ((t.published[0], t.alice_tokens[0]),),
                                 generators=(B4.word([1]),))
        out = brute_force_search(inst)
        assert derive_key(B4, kolee_shared_from(t, out.witness)) == r.alice_key


def test_same_seed_same_exchange():
    for proto in ("kolee", "aag"):
        a = run_exchange(make_config(proto, B8, 7), 7)
        b = run_exchange(make_config(proto, B8, 7), 7)
        assert a.transcript.to_json() == b.transcript.to_json()
        assert a.alice_key == b.alice_key
