"""Parameter store, recurrent/dense building blocks, Adam, checkpoints.

The recurrent cell is a standard LSTM (input/forget/output gates, tanh
candidate; gate order i, f, g, o in the packed weight matrix). Recurrent
weights initialize uniform in [-0.08, 0.08] with forget-gate bias 1.0; dense
layers use a fan-scaled uniform init.

Checkpoints are numpy .npz archives holding one array per parameter plus the
Adam moments, the step counter, and a JSON metadata record (format version,
grammar fingerprint, model configuration). Loading refuses mismatched
versions or grammars.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import GrammarMismatchError, ShapeMismatchError

CHECKPOINT_FORMAT = "dapip-checkpoint-v1"

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


class ParamStore:
    """Named parameter tensors plus per-parameter Adam moments."""

    def __init__(self):
        self.params: dict[str, Tensor] = {}
        self.adam_m: dict[str, np.ndarray] = {}
        self.adam_v: dict[str, np.ndarray] = {}
        self.step = 0

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self.params:
            raise ValueError(f"duplicate parameter {name!r}")
        t = Tensor(np.asarray(value, dtype=np.float64), requires=True)
        self.params[name] = t
        self.adam_m[name] = np.zeros_like(t.data)
        self.adam_v[name] = np.zeros_like(t.data)
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self) -> list[str]:
        return list(self.params)

    def zero_grads(self) -> None:
        for t in self.params.values():
            t.grad = None

    def n_values(self) -> int:
        return sum(t.data.size for t in self.params.values())


def grad(loss: Tensor, params: ParamStore) -> dict[str, np.ndarray]:
    """Reverse-mode gradients of a scalar loss for every parameter."""
    params.zero_grads()
    loss.backward()
    return {name: (t.grad.copy() if t.grad is not None else np.zeros_like(t.data))
            for name, t in params.params.items()}


def global_norm(grads: dict[str, np.ndarray]) -> float:
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    return float(np.sqrt(total))


def adam_update(params: ParamStore, grads: dict[str, np.ndarray],
                lr: float = 1e-3, clip: float = 10.0) -> None:
    """Global-norm clipping followed by one bias-corrected Adam step."""
    for name, g in grads.items():
        if g.shape != params[name].data.shape:
            raise ShapeMismatchError(
                f"gradient for {name}: {g.shape} vs {params[name].data.shape}")
        ad.check_finite(g, f"gradient for {name}")
    norm = global_norm(grads)
    scale = clip / norm if (clip > 0 and norm > clip) else 1.0
    params.step += 1
    t = params.step
    bc1 = 1.0 - ADAM_BETA1 ** t
    bc2 = 1.0 - ADAM_BETA2 ** t
    for name, g in grads.items():
        g = g * scale
        m = params.adam_m[name]
        v = params.adam_v[name]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * (g * g)
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)
        params[name].data -= update


# ---------------------------------------------------------------------------
# initializers and layers

def uniform_init(rng: np.random.Generator, shape, scale: float = 0.08) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


def dense_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    scale = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-scale, scale, size=(fan_in, fan_out))


def lstm_init(store: ParamStore, prefix: str, in_dim: int, hidden: int,
              rng: np.random.Generator) -> None:
    store.add(f"{prefix}/W", uniform_init(rng, (in_dim + hidden, 4 * hidden)))
    bias = np.zeros(4 * hidden)
    bias[hidden:2 * hidden] = 1.0  # forget gate
    store.add(f"{prefix}/b", bias)


def lstm_step(store: ParamStore, prefix: str, x: Tensor,
              h: Tensor, c: Tensor, hidden: int) -> tuple[Tensor, Tensor]:
    z = ad.concat([x, h], axis=-1) @ store[f"{prefix}/W"] + store[f"{prefix}/b"]
    i = ad.sigmoid(z[..., 0:hidden])
    f = ad.sigmoid(z[..., hidden:2 * hidden])
    g = ad.tanh(z[..., 2 * hidden:3 * hidden])
    o = ad.sigmoid(z[..., 3 * hidden:4 * hidden])
    c_new = f * c + i * g
    h_new = o * ad.tanh(c_new)
    return h_new, c_new


def lstm_run(store: ParamStore, prefix: str, xs: Tensor, hidden: int,
             reverse: bool = False) -> list[Tensor]:
    """States per position for a (B, T, E) or (T, E) embedded sequence."""
    batched = xs.ndim == 3
    T = xs.shape[1] if batched else xs.shape[0]
    lead = (xs.shape[0], hidden) if batched else (hidden,)
    h = Tensor(np.zeros(lead))
    c = Tensor(np.zeros(lead))
    order = range(T - 1, -1, -1) if reverse else range(T)
    states: dict[int, Tensor] = {}
    for t in order:
        x_t = xs[:, t, :] if batched else xs[t]
        h, c = lstm_step(store, prefix, x_t, h, c, hidden)
        states[t] = h
    return [states[t] for t in range(T)]


def birnn_encode(xs: Tensor, store: ParamStore, prefix: str, hidden: int) -> Tensor:
    """Bidirectional recurrent encoding of one embedded (T, E) sequence.

    Returns a (2, H, T) tensor: block 0 is the forward state at each position,
    block 1 the backward state. The two directions have independent weights
    (`prefix`/fwd and `prefix`/bwd).
    """
    if xs.ndim != 2:
        raise ShapeMismatchError(f"expected a (T, E) sequence, got {xs.shape}")
    fwd = lstm_run(store, f"{prefix}/fwd", xs, hidden, reverse=False)
    bwd = lstm_run(store, f"{prefix}/bwd", xs, hidden, reverse=True)
    out = ad.stack([ad.stack(fwd, axis=1), ad.stack(bwd, axis=1)], axis=0)
    ad.check_finite(out, "birnn encoding")
    return out


def birnn_encode_batch(xs: Tensor, store: ParamStore, prefix: str,
                       hidden: int) -> Tensor:
    """Batched variant: (B, T, E) -> (B, 2H, T), forward block then backward."""
    fwd = lstm_run(store, f"{prefix}/fwd", xs, hidden, reverse=False)
    bwd = lstm_run(store, f"{prefix}/bwd", xs, hidden, reverse=True)
    fmat = ad.stack(fwd, axis=2)  # (B, H, T)
    bmat = ad.stack(bwd, axis=2)
    return ad.concat([fmat, bmat], axis=1)


def mlp_init(store: ParamStore, prefix: str, dims: list[int],
             rng: np.random.Generator) -> None:
    for i in range(len(dims) - 1):
        store.add(f"{prefix}/W{i}", dense_init(rng, dims[i], dims[i + 1]))
        store.add(f"{prefix}/b{i}", np.zeros(dims[i + 1]))


def mlp_apply(store: ParamStore, prefix: str, x: Tensor, n_layers: int) -> Tensor:
    """tanh between layers, linear output."""
    for i in range(n_layers):
        x = x @ store[f"{prefix}/W{i}"] + store[f"{prefix}/b{i}"]
        if i + 1 < n_layers:
            x = ad.tanh(x)
    return x


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(path: Path | str, store: ParamStore, meta: dict) -> None:
    arrays: dict[str, np.ndarray] = {}
    for name, t in store.params.items():
        arrays[f"p/{name}"] = t.data
        arrays[f"m/{name}"] = store.adam_m[name]
        arrays[f"v/{name}"] = store.adam_v[name]
    record = dict(meta)
    record["format"] = CHECKPOINT_FORMAT
    arrays["__meta__"] = np.frombuffer(
        json.dumps(record, sort_keys=True).encode(), dtype=np.uint8)
    arrays["__step__"] = np.array([store.step], dtype=np.int64)
    np.savez_compressed(path, **arrays)


def load_checkpoint(path: Path | str,
                    expect_fingerprint: str | None = None) -> tuple[ParamStore, dict]:
    with np.load(path) as archive:
        meta = json.loads(bytes(archive["__meta__"]).decode())
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise GrammarMismatchError(
                f"unsupported checkpoint format {meta.get('format')!r}")
        if (expect_fingerprint is not None
                and meta.get("grammar") != expect_fingerprint):
            raise GrammarMismatchError(
                "checkpoint was trained against a different grammar")
        store = ParamStore()
        for key in archive.files:
            if key.startswith("p/"):
                name = key[2:]
                store.add(name, archive[key])
                store.adam_m[name] = archive[f"m/{name}"].copy()
                store.adam_v[name] = archive[f"v/{name}"].copy()
        store.step = int(archive["__step__"][0])
    return store, meta
