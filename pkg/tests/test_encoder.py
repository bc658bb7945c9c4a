import numpy as np
import pytest

from dapip import autodiff as ad
from dapip.encoder import (
    EncoderConfig,
    TruncationWarning,
    char_ids,
    cross_correlate,
    embed_chars,
    encode_example_sets,
    encode_examples,
    init_encoder_params,
)
from dapip.errors import ShapeMismatchError
from dapip.interp import ExamplePair
from dapip.nn import ParamStore, grad


def make_store(cfg, seed=0):
    store = ParamStore()
    init_encoder_params(store, cfg, np.random.default_rng(seed))
    return store


SMALL = EncoderConfig(T=8, H=3, embed_dim=4, charset="abcdefgh XY.@")


@pytest.mark.parametrize("T,dim", [(4, 24), (8, 112), (32, 1984)])
def test_dimension_law(T, dim):
    cfg = EncoderConfig(T=T)
    assert cfg.dim == dim


def test_dimension_content_independent():
    store = make_store(SMALL)
    for pairs in ([ExamplePair("a", "b")],
                  [ExamplePair("abcdefgh", "XY.@")],
                  [ExamplePair("a", "")] * 5):
        assert encode_examples(pairs, SMALL, store).shape == (SMALL.dim,)


def test_char_ids_padding_and_unknown():
    ids = char_ids("aX?", SMALL)
    assert len(ids) == SMALL.T
    assert ids[0] == 2 + SMALL.charset.index("a")
    assert ids[2] == 1  # unknown code point
    assert list(ids[3:]) == [0] * (SMALL.T - 3)
    assert list(char_ids("", SMALL)) == [0] * SMALL.T


def test_truncation_warns():
    with pytest.warns(TruncationWarning):
        char_ids("a" * (SMALL.T + 1), SMALL)


def test_embed_chars_deterministic():
    store = make_store(SMALL)
    a = embed_chars("abc", SMALL, store)
    b = embed_chars("abc", SMALL, store)
    assert a.shape == (SMALL.T, SMALL.embed_dim)
    assert np.array_equal(a.data, b.data)
    empty = embed_chars("", SMALL, store)
    pad_row = store["enc/embed"].data[0]
    assert np.allclose(empty.data, np.tile(pad_row, (SMALL.T, 1)))


def test_cross_correlate_zero_matrices():
    cfg = EncoderConfig(T=5, H=2)
    z = ad.Tensor(np.zeros((2, cfg.H, cfg.T)))
    out = cross_correlate(z, z, cfg)
    assert out.shape == (cfg.dim,)
    assert np.all(out.data == 0.0)


def test_cross_correlate_shape_check():
    cfg = EncoderConfig(T=5, H=2)
    with pytest.raises(ShapeMismatchError):
        cross_correlate(ad.Tensor(np.zeros((2, 2, 4))),
                        ad.Tensor(np.zeros((2, 2, 5))), cfg)


def test_cross_correlate_t2_by_hand():
    cfg = EncoderConfig(T=2, H=1)
    in_m = ad.Tensor(np.array([[[1.0, 2.0]], [[3.0, 4.0]]]))
    out_m = ad.Tensor(np.array([[[5.0, 6.0]], [[7.0, 8.0]]]))
    got = cross_correlate(in_m, out_m, cfg).data
    # offset -1: only position 1 overlaps: (2,4).(5,7) = 38
    # offset +1: only position 0 overlaps: (1,3).(6,8) = 30
    assert np.allclose(got, [0.0, 38.0, 30.0, 0.0])


def test_encoding_mean_pooling_invariances():
    store = make_store(SMALL)
    pairs = [ExamplePair("abc X", "X."), ExamplePair("de fg", "Y.@"),
             ExamplePair("h", "")]
    base = encode_examples(pairs, SMALL, store).data
    perm = encode_examples(pairs[::-1], SMALL, store).data
    assert np.allclose(base, perm)
    single = encode_examples([pairs[0]], SMALL, store).data
    dup = encode_examples([pairs[0]] * 5, SMALL, store).data
    assert np.allclose(single, dup)


def test_batched_sets_match_individual():
    store = make_store(SMALL)
    sets = [[ExamplePair("abc", "c")],
            [ExamplePair("de fg", "fg"), ExamplePair("ha", "a")]]
    batched = encode_example_sets(sets, SMALL, store).data
    for i, pairs in enumerate(sets):
        assert np.allclose(batched[i], encode_examples(pairs, SMALL, store).data)


def test_real_pairs_encode_finite():
    cfg = EncoderConfig(T=32, H=4, embed_dim=4)
    store = make_store(cfg)
    pairs = [ExamplePair("John S. Henry", "J. Henry"),
             ExamplePair("Mike Stanley", "M. Stanley")]
    enc = encode_examples(pairs, cfg, store)
    assert enc.shape == (cfg.dim,)
    assert np.isfinite(enc.data).all()


def test_encoder_gradients_match_finite_differences():
    cfg = EncoderConfig(T=6, H=2, embed_dim=3, charset="abc X.")
    store = make_store(cfg, seed=4)
    pairs = [ExamplePair("ab c", "c X"), ExamplePair("ca", "a.")]
    head = np.random.default_rng(5).normal(size=cfg.dim)

    loss = ad.dot(encode_examples(pairs, cfg, store), ad.Tensor(head))
    gs = grad(loss, store)

    def value():
        return float(ad.dot(encode_examples(pairs, cfg, store),
                            ad.Tensor(head)).data)

    numeric = ad.finite_difference(value, [store[n].data for n in store.names()])
    for name, num in zip(store.names(), numeric):
        a = gs[name]
        rel = np.abs(a - num) / np.maximum(np.maximum(np.abs(a), np.abs(num)), 1e-4)
        assert rel.max() <= 1e-4, name
