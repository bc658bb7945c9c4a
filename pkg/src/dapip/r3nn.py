"""Tree-structured generative model over grammar derivations.

Every grammar symbol and rule has a learned M-dimensional embedding. Scoring
the expansions of a partial tree runs two passes: a bottom-up pass combines
children representations through a per-rule network into parent
representations, and a top-down pass (seeded at the root with the forward
root representation plus a projection of the example encoding) distributes
context back to the leaves through per-rule reverse networks. An expansion's
score is the dot product between its leaf's top-down representation and the
rule embedding; a single softmax over every valid (leaf, rule) pair gives
the distribution the sampler and the training loss both use.

Training is teacher-forced maximum likelihood: the ground-truth program is
rolled out one derivation step at a time, and each step contributes the
negative log of the probability mass the model assigns to the set of
expansions consistent with the target tree. The expansion actually applied
at each step is chosen uniformly among the consistent ones, which keeps the
objective indifferent to derivation order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .datagen import TrainingInstance
from .dsl import (
    Expansion,
    Grammar,
    PartialTree,
    Program,
    SYM_E,
    apply_expansion,
    enumerate_expansions,
    program_to_derivation,
    tree_to_program,
)
from .encoder import EncoderConfig, encode_example_sets, init_encoder_params
from .errors import CompleteTreeError, GrammarMismatchError
from .interp import ExamplePair
from .nn import (
    ParamStore,
    adam_update,
    dense_init,
    grad,
    load_checkpoint,
    mlp_apply,
    mlp_init,
    save_checkpoint,
    uniform_init,
)

_SYM_INDEX = {SYM_E: 0, "F": 1}

DEFAULT_M = 64
DEFAULT_MAX_STEPS = 25


@dataclass
class SampleResult:
    program: Program | None  # None when the step or size budget ran out
    steps: int


class R3NN:
    def __init__(self, grammar: Grammar, enc_cfg: EncoderConfig,
                 m_dim: int = DEFAULT_M, seed: int = 0,
                 store: ParamStore | None = None):
        self.grammar = grammar
        self.enc_cfg = enc_cfg
        self.m_dim = m_dim
        if store is not None:
            self.store = store
        else:
            self.store = ParamStore()
            self._init_params(np.random.default_rng(seed))
        # E rules occupy a contiguous id prefix, F rules the rest
        self._n_e = len(grammar.e_rules)
        self._rule_base = {SYM_E: 0, "F": self._n_e}
        self._rule_count = {SYM_E: self._n_e,
                            "F": len(grammar.rules) - self._n_e}

    def _init_params(self, rng: np.random.Generator) -> None:
        m = self.m_dim
        store = self.store
        init_encoder_params(store, self.enc_cfg, rng)
        store.add("r3nn/phi", uniform_init(rng, (2, m)))
        store.add("r3nn/omega", uniform_init(rng, (len(self.grammar.rules), m)))
        store.add("cond/W", dense_init(rng, self.enc_cfg.dim, m))
        store.add("cond/b", np.zeros(m))
        for rule in self.grammar.rules:
            q = rule.arity
            if q == 0:
                store.add(f"r3nn/f{rule.id}/c", uniform_init(rng, (m,)))
            else:
                mlp_init(store, f"r3nn/f{rule.id}", [q * m, 2 * m, m], rng)
                mlp_init(store, f"r3nn/g{rule.id}", [m, 2 * m, q * m], rng)

    # ------------------------------------------------------------------
    # tree passes

    def forward_pass(self, t: PartialTree) -> dict[int, Tensor]:
        """Bottom-up representations; children combine through f-networks."""
        store = self.store
        phi = store["r3nn/phi"]
        reps: dict[int, Tensor] = {}
        for nid in range(len(t.nodes) - 1, -1, -1):
            node = t.nodes[nid]
            if node.rule_id is None:
                reps[nid] = phi[_SYM_INDEX[node.sym]]
            elif not node.children:
                reps[nid] = store[f"r3nn/f{node.rule_id}/c"]
            else:
                x = ad.concat([reps[c] for c in node.children])
                reps[nid] = mlp_apply(store, f"r3nn/f{node.rule_id}", x, 2)
        return reps

    def reverse_pass(self, t: PartialTree, fwd: dict[int, Tensor],
                     encoding: Tensor) -> dict[int, Tensor]:
        """Top-down updated leaf representations, conditioned on the encoding."""
        store = self.store
        m = self.m_dim
        cond = encoding @ store["cond/W"] + store["cond/b"]
        incoming: dict[int, Tensor] = {0: fwd[0] + cond}
        leaf_reps: dict[int, Tensor] = {}
        for nid in range(len(t.nodes)):
            node = t.nodes[nid]
            if node.rule_id is None:
                leaf_reps[nid] = incoming[nid]
            elif node.children:
                out = mlp_apply(store, f"r3nn/g{node.rule_id}", incoming[nid], 2)
                for i, child in enumerate(node.children):
                    incoming[child] = out[i * m:(i + 1) * m]
        return leaf_reps

    # ------------------------------------------------------------------
    # expansion scoring

    def expansion_scores(self, t: PartialTree, encoding: Tensor) -> Tensor:
        """Scores for every valid expansion, flattened in the same order as
        enumerate_expansions: frontier order, then rule id order."""
        if t.complete:
            raise CompleteTreeError("tree has no unexpanded leaves")
        fwd = self.forward_pass(t)
        leaf_reps = self.reverse_pass(t, fwd, encoding)
        omega = self.store["r3nn/omega"]
        syms = {t.nodes[l].sym for l in t.frontier}
        assert len(syms) == 1, "frontier mixes symbols"
        sym = syms.pop()
        base, count = self._rule_base[sym], self._rule_count[sym]
        stackd = ad.stack([leaf_reps[l] for l in t.frontier], axis=0)  # (L, M)
        omega_block = omega[base:base + count]  # (R_sym, M)
        scores = stackd @ _transpose(omega_block)  # (L, R_sym)
        return ad.reshape(scores, (len(t.frontier) * count,))

    def expansion_distribution(self, t: PartialTree,
                               encoding: Tensor) -> tuple[list[Expansion], np.ndarray]:
        """Probability over every valid expansion (sums to one)."""
        expansions = enumerate_expansions(t, self.grammar)
        scores = self.expansion_scores(t, encoding)
        probs = ad.softmax(scores, axis=0).data
        return expansions, probs

    # ------------------------------------------------------------------
    # training

    def encode(self, pairs: list[ExamplePair]) -> Tensor:
        return ad.reshape(
            encode_example_sets([list(pairs)], self.enc_cfg, self.store),
            (self.enc_cfg.dim,))

    def _rollout_plan(self, program: Program,
                      rng: np.random.Generator) -> list[int]:
        """Frontier positions chosen at each teacher-forcing step."""
        size = len(program_to_derivation(program, self.grammar))
        return [int(rng.integers(0, 10**9)) for _ in range(size)]

    def instance_loss(self, program: Program, encoding: Tensor,
                      plan: list[int]) -> Tensor:
        """Sum over derivation steps of -log(mass on target-consistent
        expansions). Zero iff the model is certain at every step."""
        target = program_to_derivation(program, self.grammar)
        t = PartialTree.initial()
        losses = []
        step = 0
        while not t.complete:
            sym = t.nodes[t.frontier[0]].sym
            base, count = self._rule_base[sym], self._rule_count[sym]
            scores = self.expansion_scores(t, encoding)
            valid_idx = np.array(
                [i * count + (target[t.nodes[leaf].path] - base)
                 for i, leaf in enumerate(t.frontier)], dtype=np.int64)
            losses.append(ad.logsumexp(scores) - ad.logsumexp(scores[valid_idx]))
            pick = t.frontier[plan[step] % len(t.frontier)]
            rule = self.grammar.rules[target[t.nodes[pick].path]]
            t = apply_expansion(t, Expansion(pick, rule))
            step += 1
        total = losses[0]
        for piece in losses[1:]:
            total = total + piece
        return total

    def train_step(self, batch: list[TrainingInstance],
                   rng: np.random.Generator, lr: float = 1e-3,
                   clip: float = 10.0) -> float:
        """One optimizer step on a batch; returns the mean instance loss."""
        encodings = encode_example_sets(
            [list(inst.pairs) for inst in batch], self.enc_cfg, self.store)
        total = None
        for i, inst in enumerate(batch):
            plan = self._rollout_plan(inst.program, rng)
            piece = self.instance_loss(inst.program, encodings[i], plan)
            total = piece if total is None else total + piece
        loss = total * (1.0 / len(batch))
        ad.check_finite(loss, "training loss")
        grads = grad(loss, self.store)
        adam_update(self.store, grads, lr=lr, clip=clip)
        return loss.item()

    # ------------------------------------------------------------------
    # sampling

    def sample(self, encoding: Tensor, rng: np.random.Generator | None,
               greedy: bool = False, max_steps: int = DEFAULT_MAX_STEPS,
               max_size: int | None = None) -> SampleResult:
        """Draw one program; None when the budget is exhausted.

        Abandons a rollout as soon as its completed size would have to exceed
        `max_size` (each unexpanded leaf costs at least one more rule).
        """
        if max_size is None:
            max_size = self.grammar.max_size
        with ad.no_grad():
            t = PartialTree.initial()
            for step in range(1, max_steps + 1):
                expansions, probs = self.expansion_distribution(t, encoding)
                if greedy:
                    pick = int(np.argmax(probs))
                else:
                    pick = int(rng.choice(len(probs), p=probs))
                t = apply_expansion(t, expansions[pick])
                if t.rule_count + len(t.frontier) > max_size:
                    return SampleResult(None, step)
                if t.complete:
                    return SampleResult(tree_to_program(t, self.grammar), step)
            return SampleResult(None, max_steps)

    # ------------------------------------------------------------------
    # persistence

    def meta(self) -> dict:
        return {
            "grammar": self.grammar.fingerprint(),
            "m_dim": self.m_dim,
            "enc_T": self.enc_cfg.T,
            "enc_H": self.enc_cfg.H,
            "enc_embed_dim": self.enc_cfg.embed_dim,
            "enc_charset": self.enc_cfg.charset,
            "apis": list(self.grammar.apis),
            "constants": [list(c) for c in self.grammar.constants],
            "max_size": self.grammar.max_size,
        }

    def save(self, path) -> None:
        save_checkpoint(path, self.store, self.meta())

    @classmethod
    def load(cls, path, grammar: Grammar) -> "R3NN":
        store, meta = load_checkpoint(path, expect_fingerprint=grammar.fingerprint())
        cfg = EncoderConfig(T=meta["enc_T"], H=meta["enc_H"],
                            embed_dim=meta["enc_embed_dim"],
                            charset=meta["enc_charset"])
        return cls(grammar, cfg, m_dim=meta["m_dim"], store=store)

    @classmethod
    def load_auto(cls, path) -> "R3NN":
        """Load with the grammar reconstructed from checkpoint metadata."""
        from .apis import default_catalog

        store, meta = load_checkpoint(path)
        grammar = Grammar(default_catalog(),
                          tuple((i, l) for i, l in meta["constants"]),
                          api_names=tuple(meta["apis"]),
                          max_size=meta.get("max_size", 10))
        if grammar.fingerprint() != meta["grammar"]:
            raise GrammarMismatchError(
                "checkpoint grammar cannot be reconstructed against this catalog")
        cfg = EncoderConfig(T=meta["enc_T"], H=meta["enc_H"],
                            embed_dim=meta["enc_embed_dim"],
                            charset=meta["enc_charset"])
        return cls(grammar, cfg, m_dim=meta["m_dim"], store=store)


def _transpose(t: Tensor) -> Tensor:
    data = t.data.T

    def bwd(g):
        return (g.T,)

    return ad._node(data, (t,), bwd)


def train_model(model: R3NN, instances: list[TrainingInstance], epochs: int,
                batch_size: int = 10, lr: float = 1e-3, clip: float = 10.0,
                seed: int = 0, log=None,
                max_batches_per_epoch: int | None = None) -> list[float]:
    """Shuffled mini-batch training; returns the mean loss per epoch."""
    rng = np.random.default_rng(seed)
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(instances))
        losses = []
        t0 = time.time()
        n_batches = len(instances) // batch_size
        if max_batches_per_epoch is not None:
            n_batches = min(n_batches, max_batches_per_epoch)
        for b in range(n_batches):
            batch = [instances[i] for i in order[b * batch_size:(b + 1) * batch_size]]
            losses.append(model.train_step(batch, rng, lr=lr, clip=clip))
            if log and (b + 1) % 100 == 0:
                log(f"epoch {epoch + 1} batch {b + 1}/{n_batches} "
                    f"loss {np.mean(losses[-100:]):.4f} "
                    f"({time.time() - t0:.0f}s)")
        history.append(float(np.mean(losses)))
        if log:
            log(f"epoch {epoch + 1}: mean loss {history[-1]:.4f} "
                f"({time.time() - t0:.0f}s)")
    return history
