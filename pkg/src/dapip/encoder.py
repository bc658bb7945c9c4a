"""Cross-correlational encoder of input-output example pairs.

Each string in a pair is embedded per character and run through its own
bidirectional recurrent network (input strings and output strings have
separate weights), giving two (2, H, T) matrices. The output matrix is then
slid across the input matrix: for every nonzero relative offset the aligned
columns are dot-multiplied where they overlap and zero elsewhere. With
offsets -(T-1)..-1 and 1..T-1 that is 2(T-1) alignments of T positions each,
a 2*T*(T-1)-dimensional vector per pair. Pair encodings are pooled by
element-wise mean, which makes the conditioning vector invariant to example
order.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeMismatchError
from .interp import ExamplePair
from .nn import ParamStore, birnn_encode_batch, lstm_init, uniform_init


class TruncationWarning(UserWarning):
    """A string longer than the encoder window was cut to fit."""


PAD = 0
UNK = 1
DEFAULT_CHARSET = "".join(chr(c) for c in range(32, 127))


@dataclass(frozen=True)
class EncoderConfig:
    T: int = 32
    H: int = 32
    embed_dim: int = 16
    charset: str = DEFAULT_CHARSET
    pooling: str = "mean"

    def __post_init__(self):
        if self.T < 2:
            raise ValueError("T must be >= 2")
        if self.pooling != "mean":
            raise ValueError(f"unsupported pooling {self.pooling!r}")

    @property
    def vocab_size(self) -> int:
        return len(self.charset) + 2  # PAD and UNK

    @property
    def dim(self) -> int:
        """Encoding dimension: 2 * T * (T - 1), content-independent."""
        return 2 * self.T * (self.T - 1)


def init_encoder_params(store: ParamStore, cfg: EncoderConfig,
                        rng: np.random.Generator) -> None:
    store.add("enc/embed", uniform_init(rng, (cfg.vocab_size, cfg.embed_dim)))
    for stream in ("in", "out"):
        for direction in ("fwd", "bwd"):
            lstm_init(store, f"enc/{stream}/{direction}",
                      cfg.embed_dim, cfg.H, rng)


def char_ids(s: str, cfg: EncoderConfig) -> np.ndarray:
    """Right-padded id sequence of length T; unknown code points map to UNK."""
    if len(s) > cfg.T:
        warnings.warn(
            f"string of length {len(s)} truncated to encoder window {cfg.T}",
            TruncationWarning, stacklevel=2)
        s = s[:cfg.T]
    lut = _charset_lut(cfg.charset)
    ids = np.full(cfg.T, PAD, dtype=np.int64)
    for i, ch in enumerate(s):
        ids[i] = lut.get(ch, UNK)
    return ids


_LUTS: dict[str, dict[str, int]] = {}


def _charset_lut(charset: str) -> dict[str, int]:
    lut = _LUTS.get(charset)
    if lut is None:
        lut = {ch: i + 2 for i, ch in enumerate(charset)}
        _LUTS[charset] = lut
    return lut


def embed_chars(s: str, cfg: EncoderConfig, store: ParamStore) -> Tensor:
    """T learned embedding vectors for one string."""
    return ad.embedding(store["enc/embed"], char_ids(s, cfg))


def cross_correlate(in_mat: Tensor, out_mat: Tensor, cfg: EncoderConfig) -> Tensor:
    """Slide `out_mat` over `in_mat`; accepts (2, H, T) matrices."""
    for m in (in_mat, out_mat):
        if m.shape != (2, cfg.H, cfg.T):
            raise ShapeMismatchError(f"expected (2, {cfg.H}, {cfg.T}), got {m.shape}")
    a = ad.reshape(in_mat, (1, 2 * cfg.H, cfg.T))
    b = ad.reshape(out_mat, (1, 2 * cfg.H, cfg.T))
    vec = _cross_correlate_batch(a, b, cfg)
    return ad.reshape(vec, (cfg.dim,))


def _cross_correlate_batch(in_mat: Tensor, out_mat: Tensor,
                           cfg: EncoderConfig) -> Tensor:
    """(B, 2H, T) x (B, 2H, T) -> (B, 2T(T-1)) correlation features.

    Blocks are concatenated in ascending offset order; positions without
    overlap contribute exact zeros.
    """
    T = cfg.T
    B = in_mat.shape[0]
    blocks = []
    for delta in range(-(T - 1), T):
        if delta == 0:
            continue
        if delta > 0:
            vals = ad.tsum(in_mat[:, :, 0:T - delta] * out_mat[:, :, delta:T], axis=1)
            block = ad.concat([vals, Tensor(np.zeros((B, delta)))], axis=1)
        else:
            vals = ad.tsum(in_mat[:, :, -delta:T] * out_mat[:, :, 0:T + delta], axis=1)
            block = ad.concat([Tensor(np.zeros((B, -delta))), vals], axis=1)
        blocks.append(block)
    return ad.concat(blocks, axis=1)


def encode_examples(pairs: list[ExamplePair], cfg: EncoderConfig,
                    store: ParamStore) -> Tensor:
    """Fixed-dimensional conditioning vector for one example set (1-5 pairs)."""
    if not pairs:
        raise ValueError("need at least one example pair")
    out = encode_example_sets([pairs], cfg, store)
    return ad.reshape(out, (cfg.dim,))


def encode_example_sets(pair_sets: list[list[ExamplePair]], cfg: EncoderConfig,
                        store: ParamStore) -> Tensor:
    """Batched encoding: one row per example set, all strings share one
    recurrent pass per stream."""
    counts = [len(pairs) for pairs in pair_sets]
    flat = [p for pairs in pair_sets for p in pairs]
    in_ids = np.stack([char_ids(p.input, cfg) for p in flat])
    out_ids = np.stack([char_ids(p.output, cfg) for p in flat])
    in_emb = ad.embedding(store["enc/embed"], in_ids)
    out_emb = ad.embedding(store["enc/embed"], out_ids)
    in_mat = birnn_encode_batch(in_emb, store, "enc/in", cfg.H)
    out_mat = birnn_encode_batch(out_emb, store, "enc/out", cfg.H)
    vecs = _cross_correlate_batch(in_mat, out_mat, cfg)  # (#pairs, dim)
    rows = []
    offset = 0
    for n in counts:
        rows.append(ad.tmean(vecs[offset:offset + n], axis=0))
        offset += n
    result = ad.stack(rows, axis=0)
    ad.check_finite(result, "example encoding")
    return result
