import math
import random
from collections import Counter

import pytest

from conftest import enumerate_programs
from dapip.datagen import (
    GenConfig,
    ProgramCounter,
    emit_dataset,
    escape_field,
    format_instance,
    generate_instance,
    generate_instances,
    generate_inputs,
    grammar_for,
    load_dataset,
    make_instance,
    parse_instance,
    sample_program,
    unescape_field,
)
from dapip.dsl import Apply, Concat, InputVar, parse_program, print_program, program_size
from dapip.errors import DataFormatError, UnsatisfiableProgramError
from dapip.interp import consistent
from dapip.tokens import TokenClass, spans


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(max_size=1)
    with pytest.raises(ValueError):
        GenConfig(families=("regex", "nope"))


def test_max_size_two_shape():
    cfg = GenConfig(max_size=2, seed=1)
    rng = random.Random(0)
    for _ in range(200):
        p = sample_program(rng, cfg)
        assert program_size(p) == 2
        assert len(p.children) == 1


def test_regex_only_excludes_other_families():
    cfg = GenConfig(max_size=8, families=("regex",), seed=2)
    grammar = grammar_for(cfg)
    from dapip.apis import ApiFamily

    regex_names = {s.name for s in grammar.catalog.list(ApiFamily.REGEX)}
    rng = random.Random(0)
    for _ in range(2000):
        p = sample_program(rng, cfg)
        stack = list(p.children)
        while stack:
            e = stack.pop()
            if isinstance(e, Apply):
                assert e.api in regex_names
                stack.append(e.arg)


def test_uniform_sampling_three_sigma(tiny_grammar):
    """Exact per-program frequencies against brute-force enumeration counts."""
    programs = list(enumerate_programs(tiny_grammar, 3))
    counter = ProgramCounter(tiny_grammar, 3)
    assert counter.total == len(programs)
    n = 10000
    rng = random.Random(2024)
    counts = Counter(counter.sample(rng) for _ in range(n))
    assert set(counts) <= set(programs)
    expected = n / len(programs)
    sigma = math.sqrt(n * (1 / len(programs)) * (1 - 1 / len(programs)))
    for p in programs:
        assert abs(counts.get(p, 0) - expected) <= 3 * sigma, print_program(p)


def test_uniform_size_marginals_default_grammar():
    """Size frequencies at the default grammar match exact counts."""
    cfg = GenConfig(max_size=3, seed=0)
    counter = ProgramCounter(grammar_for(cfg), 3)
    n = 10000
    rng = random.Random(7)
    sizes = Counter(program_size(counter.sample(rng)) for _ in range(n))
    for size in (2, 3):
        p = counter.e_count[size] / counter.total
        sigma = math.sqrt(n * p * (1 - p))
        assert abs(sizes[size] - n * p) <= 3 * sigma


def test_generated_inputs_satisfy_requirements():
    cfg = GenConfig(max_size=6, seed=4)
    p = parse_program("(Concat (GetThirdNumber (arg inp)) (GetStateName (arg inp)))")
    rng = random.Random(9)
    for _ in range(10):
        inputs = generate_inputs(p, rng, cfg)
        assert len(inputs) == 5
        for s in inputs:
            assert len(spans(TokenClass.NUMBER, s)) >= 3
            states = grammar_for(cfg).catalog.registry.lookup("states")
            assert any(st in s for st in states)


def test_street_title_style_instance():
    cfg = GenConfig(max_size=6, seed=12)
    p = parse_program("(Concat (ConstStr MR) (GetStreetName (arg inp)))")
    inst = None
    for stream in range(5):
        rng = random.Random(stream)
        try:
            inst = make_instance(p, rng, cfg)
            break
        except Exception:
            continue
    assert inst is not None
    for pair in inst.pairs:
        assert pair.output.startswith("Mr.")
        assert consistent(p, [pair])


def test_identity_inputs_are_noise():
    cfg = GenConfig(max_size=4, seed=4)
    p = Concat((InputVar(),))
    inputs = generate_inputs(p, random.Random(0), cfg)
    assert all(1 <= len(s) <= cfg.max_input_len for s in inputs)


def test_unsatisfiable_transform_of_constant():
    cfg = GenConfig(max_size=6, seed=4)
    p = parse_program("(Concat (GetStateAbbrFromState (arg (ConstStr DOT))))")
    with pytest.raises(UnsatisfiableProgramError):
        generate_inputs(p, random.Random(0), cfg)


def test_instances_are_consistent_and_within_length():
    cfg = GenConfig(max_size=8, seed=6)
    insts = generate_instances(150, cfg)
    for inst in insts:
        assert len(inst.pairs) == 5
        assert consistent(inst.program, list(inst.pairs))
        for pair in inst.pairs:
            assert len(pair.input) <= cfg.max_input_len
            assert len(pair.output) <= cfg.max_input_len


def test_instance_streams_are_deterministic():
    cfg = GenConfig(max_size=6, families=("regex",), seed=13)
    a = generate_instance(cfg, 17)
    b = generate_instance(cfg, 17)
    assert a == b
    assert generate_instance(cfg, 18) != a


def test_escaping_roundtrip():
    for s in ("plain", "tab\there", "nl\nhere", "back\\slash", "\t\n\\", ""):
        assert unescape_field(escape_field(s)) == s


def test_record_roundtrip():
    cfg = GenConfig(max_size=6, seed=3)
    inst = generate_instance(cfg, 5)
    line = format_instance(inst)
    assert "\n" not in line
    assert parse_instance(line) == inst


def test_emit_dataset_deterministic(tmp_path):
    cfg = GenConfig(max_size=6, families=("regex",), seed=7)
    p1 = emit_dataset(300, cfg, tmp_path / "a.tsv")
    p2 = emit_dataset(300, cfg, tmp_path / "b.tsv")
    assert p1.read_bytes() == p2.read_bytes()
    m1 = (tmp_path / "a.tsv.manifest").read_text()
    assert "count=300" in m1 and "seed=7" in m1
    assert len(p1.read_text().splitlines()) == 300


def test_dataset_reload_validates(tmp_path):
    cfg = GenConfig(max_size=6, families=("regex",), seed=8)
    path = emit_dataset(120, cfg, tmp_path / "d.tsv")
    insts = load_dataset(path, grammar_for(cfg), validate=True, max_size=6)
    assert len(insts) == 120


def test_dataset_load_rejects_oversize(tmp_path):
    cfg = GenConfig(max_size=8, seed=9)
    path = emit_dataset(30, cfg, tmp_path / "d.tsv")
    with pytest.raises(DataFormatError):
        load_dataset(path, max_size=2)


def test_coverage_flag(tmp_path):
    subset = ("GetFirstWord", "GetLastWord", "GetFirstNumber", "GetLastNumber",
              "ToLowercase", "ToUppercase", "GetFirstChar", "GetFirstAlpha")
    cfg = GenConfig(max_size=4, families=("regex",), api_subset=subset,
                    seed=21, ensure_coverage=True)
    path = emit_dataset(400, cfg, tmp_path / "cov.tsv")
    manifest = (tmp_path / "cov.tsv.manifest").read_text()
    assert "coverage_missing=-" in manifest
    insts = load_dataset(path, grammar_for(cfg))
    used = set()
    for inst in insts:
        stack = list(inst.program.children)
        while stack:
            e = stack.pop()
            if isinstance(e, Apply):
                used.add(e.api)
                stack.append(e.arg)
    assert set(subset) <= used
