import numpy as np
import pytest

from dapip import autodiff as ad
from dapip.errors import GrammarMismatchError, ShapeMismatchError
from dapip.nn import (
    ParamStore,
    adam_update,
    birnn_encode,
    global_norm,
    grad,
    load_checkpoint,
    lstm_init,
    lstm_run,
    mlp_apply,
    mlp_init,
    save_checkpoint,
)


def make_birnn_store(in_dim=3, hidden=2, seed=0):
    store = ParamStore()
    rng = np.random.default_rng(seed)
    lstm_init(store, "enc/fwd", in_dim, hidden, rng)
    lstm_init(store, "enc/bwd", in_dim, hidden, rng)
    return store


def test_param_store_shapes_and_duplicates():
    store = ParamStore()
    store.add("w", np.zeros((2, 3)))
    assert store.adam_m["w"].shape == (2, 3)
    assert store.step == 0
    with pytest.raises(ValueError):
        store.add("w", np.zeros(1))


def test_grad_returns_all_parameters():
    store = ParamStore()
    rng = np.random.default_rng(1)
    mlp_init(store, "net", [3, 4, 1], rng)
    x = ad.Tensor(rng.normal(size=(2, 3)))
    loss = ad.tsum(mlp_apply(store, "net", x, 2))
    gs = grad(loss, store)
    assert set(gs) == set(store.names())
    assert all(gs[n].shape == store[n].data.shape for n in gs)


def test_mlp_gradients_match_finite_differences():
    store = ParamStore()
    rng = np.random.default_rng(2)
    mlp_init(store, "net", [4, 6, 5, 1], rng)
    x = np.asarray(rng.normal(size=(3, 4)))

    loss = ad.tsum(ad.sigmoid(mlp_apply(store, "net", ad.Tensor(x), 3)))
    gs = grad(loss, store)

    def value():
        return float(ad.tsum(ad.sigmoid(
            mlp_apply(store, "net", ad.Tensor(x), 3))).data)

    numeric = ad.finite_difference(value, [store[n].data for n in store.names()])
    for name, num in zip(store.names(), numeric):
        a = gs[name]
        rel = np.abs(a - num) / np.maximum(np.maximum(np.abs(a), np.abs(num)), 1e-4)
        assert rel.max() <= 1e-4, name


def test_birnn_zero_weights_zero_output():
    store = ParamStore()
    for prefix in ("enc/fwd", "enc/bwd"):
        store.add(f"{prefix}/W", np.zeros((3 + 2, 8)))
        store.add(f"{prefix}/b", np.zeros(8))
    out = birnn_encode(ad.Tensor(np.zeros((5, 3))), store, "enc", 2)
    assert out.shape == (2, 2, 5)
    assert np.all(out.data == 0.0)


def test_birnn_shape_contract():
    store = make_birnn_store()
    for T in (1, 4, 9):
        out = birnn_encode(ad.Tensor(np.zeros((T, 3))), store, "enc", 2)
        assert out.shape == (2, 2, T)


def test_birnn_hand_unrolled_two_steps():
    """Single-unit cell checked against the gate equations by hand."""
    store = ParamStore()
    W = np.array([[0.3], [0.2]])  # in_dim=1, hidden=1: rows x, h
    W4 = np.concatenate([W, 2 * W, -W, 0.5 * W], axis=1)
    b = np.array([0.1, 1.0, -0.2, 0.0])
    store.add("enc/fwd/W", W4)
    store.add("enc/fwd/b", b)
    store.add("enc/bwd/W", W4.copy())
    store.add("enc/bwd/b", b.copy())

    def sig(v):
        return 1.0 / (1.0 + np.exp(-v))

    def cell(x, h, c):
        z = x * W4[0] + h * W4[1] + b
        i, f, g, o = sig(z[0]), sig(z[1]), np.tanh(z[2]), sig(z[3])
        c2 = f * c + i * g
        return o * np.tanh(c2), c2

    xs = np.array([[0.7], [-0.4]])
    h1, c1 = cell(0.7, 0.0, 0.0)
    h2, _ = cell(-0.4, h1, c1)
    hb2, cb2 = cell(-0.4, 0.0, 0.0)
    hb1, _ = cell(0.7, hb2, cb2)

    out = birnn_encode(ad.Tensor(xs), store, "enc", 1)
    assert np.allclose(out.data[0, 0], [h1, h2])
    assert np.allclose(out.data[1, 0], [hb1, hb2])


def test_birnn_reversal_swaps_directions_with_shared_weights():
    store = ParamStore()
    rng = np.random.default_rng(3)
    lstm_init(store, "enc/fwd", 2, 1, rng)
    store.add("enc/bwd/W", store["enc/fwd/W"].data.copy())
    store.add("enc/bwd/b", store["enc/fwd/b"].data.copy())
    xs = rng.normal(size=(5, 2))
    fwd = birnn_encode(ad.Tensor(xs), store, "enc", 1).data
    rev = birnn_encode(ad.Tensor(xs[::-1].copy()), store, "enc", 1).data
    assert np.allclose(fwd[0], rev[1][:, ::-1])
    assert np.allclose(fwd[1], rev[0][:, ::-1])


def test_lstm_batched_matches_loop():
    store = make_birnn_store(in_dim=3, hidden=2, seed=5)
    rng = np.random.default_rng(6)
    batch = rng.normal(size=(4, 6, 3))
    batched = lstm_run(store, "enc/fwd", ad.Tensor(batch), 2)
    for b in range(4):
        single = lstm_run(store, "enc/fwd", ad.Tensor(batch[b]), 2)
        for t in range(6):
            assert np.allclose(batched[t].data[b], single[t].data)


def test_adam_zero_gradient_keeps_parameters():
    store = ParamStore()
    store.add("w", np.array([1.0, -2.0]))
    adam_update(store, {"w": np.zeros(2)})
    assert np.allclose(store["w"].data, [1.0, -2.0])
    assert store.step == 1


def test_adam_global_norm_clipping():
    store = ParamStore()
    store.add("a", np.zeros(16))
    g = {"a": np.full(16, 25.0)}  # global norm 100
    assert abs(global_norm(g) - 100.0) < 1e-9
    adam_update(store, g, lr=1.0, clip=10.0)
    # first moment after one step is (1-beta1) * clipped gradient
    assert np.allclose(store.adam_m["a"], 0.1 * 2.5)


def test_adam_first_step_closed_form():
    store = ParamStore()
    store.add("w", np.array([0.0]))
    adam_update(store, {"w": np.array([1.0])}, lr=0.001, clip=10.0)
    expected = -0.001 * 1.0 / (1.0 + 1e-8)
    assert abs(store["w"].data[0] - expected) < 1e-12


def test_adam_shape_mismatch():
    store = ParamStore()
    store.add("w", np.zeros(3))
    with pytest.raises(ShapeMismatchError):
        adam_update(store, {"w": np.zeros(4)})


def test_adam_deterministic():
    def run():
        store = ParamStore()
        store.add("w", np.array([1.0, 2.0]))
        for i in range(5):
            adam_update(store, {"w": np.array([0.5, -1.0 * i])}, lr=0.01)
        return store["w"].data.copy()

    assert np.array_equal(run(), run())


def test_checkpoint_roundtrip(tmp_path):
    store = ParamStore()
    rng = np.random.default_rng(7)
    mlp_init(store, "net", [3, 4], rng)
    adam_update(store, {n: np.ones_like(store[n].data) for n in store.names()})
    path = tmp_path / "model.npz"
    save_checkpoint(path, store, {"grammar": "abc123"})
    loaded, meta = load_checkpoint(path, expect_fingerprint="abc123")
    assert meta["grammar"] == "abc123"
    assert loaded.step == 1
    for name in store.names():
        assert np.array_equal(loaded[name].data, store[name].data)
        assert np.array_equal(loaded.adam_m[name], store.adam_m[name])


def test_checkpoint_grammar_mismatch(tmp_path):
    store = ParamStore()
    store.add("w", np.zeros(2))
    path = tmp_path / "model.npz"
    save_checkpoint(path, store, {"grammar": "abc"})
    with pytest.raises(GrammarMismatchError):
        load_checkpoint(path, expect_fingerprint="other")
