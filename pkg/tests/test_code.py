import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from causalcodes.code import (CodeRangeError, CodeSpec, PositionError, chunk_distances, chunk_table,
                              derive_chunk, encode, sample_secrets, split_mega)


def _spec(seed=1, n=16, chunks=4, mb=3, sb=2, family="prf"):
    return CodeSpec(seed, n, chunks, mb, sb, family)


def test_determinism():
    s = _spec()
    assert np.array_equal(derive_chunk(s, 2, 5, 3), derive_chunk(s, 2, 5, 3))
    a = _spec(family="affine")
    assert np.array_equal(derive_chunk(a, 2, 5, 3), derive_chunk(a, 2, 5, 3))


def test_ranges():
    s = _spec()
    for args in [(0, 0, 0), (5, 0, 0), (1, 8, 0), (1, 0, 4), (1, -1, 0)]:
        with pytest.raises(CodeRangeError):
            derive_chunk(s, *args)
    with pytest.raises(CodeRangeError):
        CodeSpec(2**64, 16, 4, 1, 1)
    with pytest.raises(CodeRangeError):
        CodeSpec(0, 15, 4, 1, 1)
    with pytest.raises(CodeRangeError):
        encode(s, 0, [0, 0])


def test_secret_changes_output():
    # P(two chunks of 8 bits collide) = 2^-8 over seeds
    L = 8
    hits = 0
    trials = 10_000
    for seed in range(trials):
        s = CodeSpec(seed, L, 1, 2, 2)
        hits += np.array_equal(derive_chunk(s, 1, 1, 0), derive_chunk(s, 1, 1, 1))
    expected = trials * 2.0**-L
    assert abs(hits - expected) < 5 * np.sqrt(expected) + 1


def test_per_bit_uniformity():
    bits = np.stack([derive_chunk(CodeSpec(seed, 16, 1, 1, 1), 1, 0, 0) for seed in range(100_000)])
    assert np.all(np.abs(bits.mean(axis=0) - 0.5) < 0.01)


def test_chunk_bit_correlation():
    rows = np.stack([encode(CodeSpec(seed, 8, 2, 1, 1), 1, [0, 0]) for seed in range(100_000)]).astype(float)
    c = np.corrcoef(rows[:, 0], rows[:, 4])[0, 1]
    assert abs(c) < 0.01


def test_encode_structure():
    s = _spec()
    secrets = [1, 0, 3, 2]
    cw = encode(s, 6, secrets)
    assert len(cw) == 16
    for j, sj in enumerate(secrets):
        assert np.array_equal(cw[4 * j:4 * j + 4], derive_chunk(s, j + 1, 6, sj))
    one = CodeSpec(3, 8, 1, 2, 1)
    assert np.array_equal(encode(one, 2, [1]), derive_chunk(one, 1, 2, 1))


def test_full_codeword_collision_rate():
    # distinct messages, same secrets, n = 16: collision probability 2^-16
    hits = sum(np.array_equal(encode(CodeSpec(seed, 16, 4, 1, 1), 0, [0] * 4),
                              encode(CodeSpec(seed, 16, 4, 1, 1), 1, [0] * 4)) for seed in range(20_000))
    assert hits <= 20_000 * 2.0**-16 * 3 + 2


def test_split_mega():
    w = np.arange(16)
    left, right = split_mega(w, 4, 4)
    assert len(left) == 4 and len(right) == 12
    left, right = split_mega(w, 12, 4)
    assert len(right) == 4
    assert np.array_equal(np.concatenate(split_mega(w, 8, 4)), w)
    for t in (0, 3, 16):
        with pytest.raises(PositionError):
            split_mega(w, t, 4)


def test_sample_secrets():
    rng = np.random.default_rng(0)
    assert sample_secrets(rng, 5, 0) == [0] * 5
    a = sample_secrets(np.random.default_rng(42), 10, 7)
    b = sample_secrets(np.random.default_rng(42), 10, 7)
    assert a == b
    draws = sample_secrets(np.random.default_rng(7), 100_000, 3)
    counts = np.bincount(draws, minlength=8)
    assert stats.chisquare(counts).pvalue > 0.001
    wide = sample_secrets(np.random.default_rng(1), 3, 100)
    assert all(0 <= x < 2**100 for x in wide)


def test_json_roundtrip():
    s = _spec(family="affine")
    assert CodeSpec.from_dict(__import__("json").loads(s.to_json())) == s
    assert '"prf_version": 1' in s.to_json()


def test_table_and_distances():
    s = _spec()
    tab = chunk_table(s)
    assert tab.shape == (8, 4, 4, 4)
    assert np.array_equal(tab[3, 2, 1], derive_chunk(s, 3, 3, 1))
    word = encode(s, 3, [1, 2, 0, 3])
    D = chunk_distances(s, word)
    assert D[3, 0, 1] == 0 and D[3, 1, 2] == 0
    erased = word.copy()
    erased[:] = 2
    assert np.all(chunk_distances(s, erased) == 0)


def test_from_params(desk_flip):
    s = CodeSpec.from_params(desk_flip, 5)
    assert (s.msg_bits, s.secret_bits, s.family) == (4, 1, "prf")


@given(st.integers(0, 2**64 - 1), st.integers(0, 7), st.lists(st.integers(0, 3), min_size=4, max_size=4))
@settings(max_examples=50, deadline=None)
def test_encoding_total(seed, m, secrets):
    for fam in ("prf", "affine"):
        cw = encode(CodeSpec(seed, 16, 4, 3, 2, fam), m, secrets)
        assert cw.shape == (16,) and set(np.unique(cw)) <= {0, 1}


def test_affine_is_affine():
    s = CodeSpec(9, 20, 1, 6, 2, "affine")
    z = derive_chunk(s, 1, 0, 0)
    x, y = derive_chunk(s, 1, 5, 0), derive_chunk(s, 1, 3, 0)
    assert np.array_equal(derive_chunk(s, 1, 5 ^ 3, 0), x ^ y ^ z)
