import numpy as np
import pytest

from conftest import TINY_APIS
from dapip.datagen import GenConfig, generate_instances, grammar_for
from dapip.dsl import print_program
from dapip.encoder import EncoderConfig
from dapip.interp import ExamplePair, consistent
from dapip.r3nn import R3NN
from dapip.search import neural_search, solve_rate, uniform_search

TINY_CFG = GenConfig(max_size=6, families=("regex",), api_subset=TINY_APIS, seed=5)
ENC = EncoderConfig(T=8, H=3, embed_dim=4, charset="abcdefghij XY.z012")


def test_uniform_solves_single_call_task(full_grammar):
    # single-API tasks are reachable, at per-expansion-uniform draw odds
    examples = [ExamplePair("alpha beta", "alpha"),
                ExamplePair("gamma delta", "gamma")]
    result = uniform_search(examples, 40000, full_grammar,
                            np.random.default_rng(0))
    assert result.found
    assert consistent(result.program, examples)
    from dapip.dsl import program_size

    assert program_size(result.program) <= 4  # small-program bias


def test_uniform_solves_identity_quickly(full_grammar):
    examples = [ExamplePair("qq zz", "qq zz")]
    result = uniform_search(examples, 2000, full_grammar,
                            np.random.default_rng(1))
    assert result.found
    assert result.stats.found_at <= 1000
    assert consistent(result.program, examples)


def test_uniform_unreachable_output(full_grammar):
    # an output character outside every API and constant reach
    examples = [ExamplePair("abc", "ÿ")]
    result = uniform_search(examples, 100, full_grammar,
                            np.random.default_rng(2))
    assert not result.found
    assert result.stats.draws == 100


def test_uniform_requires_positive_budget(full_grammar):
    with pytest.raises(ValueError):
        uniform_search([ExamplePair("a", "a")], 0, full_grammar)


def test_uniform_deterministic(full_grammar):
    examples = [ExamplePair("one two", "one")]

    def run():
        r = uniform_search(examples, 150, full_grammar,
                           np.random.default_rng(42))
        return (r.stats.found_at, print_program(r.program) if r.program else None)

    assert run() == run()


@pytest.fixture(scope="module")
def trained_model():
    grammar = grammar_for(TINY_CFG)
    model = R3NN(grammar, ENC, m_dim=8, seed=2)
    inst = generate_instances(3, TINY_CFG)[0]
    rng = np.random.default_rng(0)
    for _ in range(400):
        if model.train_step([inst], rng) < 0.1:
            break
    return model, inst


def test_neural_zero_samples(trained_model):
    model, inst = trained_model
    result = neural_search(model, list(inst.pairs), 0)
    assert not result.found
    assert result.stats.draws == 0


def test_neural_greedy_solves_overfit_instance(trained_model):
    model, inst = trained_model
    result = neural_search(model, list(inst.pairs), 1, greedy=True)
    assert result.found
    assert consistent(result.program, list(inst.pairs))


def test_neural_stochastic_finds_solution(trained_model):
    model, inst = trained_model
    result = neural_search(model, list(inst.pairs), 20,
                           np.random.default_rng(3))
    assert result.found
    assert result.stats.found_at <= 20


def test_returned_programs_always_consistent(trained_model, full_grammar):
    model, inst = trained_model
    result = neural_search(model, list(inst.pairs), 10, np.random.default_rng(1))
    if result.found:
        assert consistent(result.program, list(inst.pairs))
    examples = [ExamplePair("x y", "x")]
    r2 = uniform_search(examples, 100, full_grammar, np.random.default_rng(9))
    if r2.found:
        assert consistent(r2.program, examples)


def test_cumulative_draw_monotonicity(full_grammar):
    """One stream of 100 draws: the solved set grows with the budget."""

    class FakeBench:
        def __init__(self, i, pairs):
            self.id = f"b{i}"
            self.pairs = pairs

        def examples(self):
            return self.pairs

    benches = [FakeBench(0, [ExamplePair("one two", "one")]),
               FakeBench(1, [ExamplePair("a b", "a b")]),
               FakeBench(2, [ExamplePair("abc", "ÿ")])]

    def solver(examples, k, stream):
        return uniform_search(examples, k, full_grammar,
                              np.random.default_rng((7, stream)))

    solved_sets = {}
    for k in (10, 50, 100):
        rate, outcomes = solve_rate(solver, benches, k)
        solved_sets[k] = {o.benchmark_id for o in outcomes if o.solved_at(k)}
        assert rate == len(solved_sets[k]) / 3
    assert solved_sets[10] <= solved_sets[50] <= solved_sets[100]


def test_solve_rate_empty_set_warns():
    with pytest.warns(UserWarning):
        rate, outcomes = solve_rate(lambda e, k, s: None, [], 10)
    assert rate == 0.0 and outcomes == []
