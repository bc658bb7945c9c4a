import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import TINY_APIS
from dapip.datagen import GenConfig, generate_instances, grammar_for
from dapip.encoder import EncoderConfig
from dapip.r3nn import R3NN
from dapip.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_apis_endpoint(client):
    r = client.get("/apis")
    assert r.status_code == 200
    listing = r.json()
    assert len(listing) == 135
    assert listing == client.get("/apis").json()  # byte-stable
    lookup = client.get("/apis", params={"family": "lookup"}).json()
    assert len(lookup) == 18
    assert client.get("/apis", params={"family": "nope"}).status_code == 400


def test_apply_endpoint(client):
    r = client.post("/apply", json={"program": "(Concat inp)",
                                    "inputs": ["a", "b"]})
    assert r.json()["results"] == [{"ok": True, "value": "a"},
                                   {"ok": True, "value": "b"}]


def test_apply_city_state(client):
    program = ("(Concat (GetCityName (arg inp)) (ConstStr COMMASPACE) "
               "(GetStateFromCity (arg (GetCityName (arg inp)))))")
    inputs = ["500 Mem Dr., Cambridge, 02139", "22 NE Street, Redmond, USA",
              "Seattle, 98002", "21 Peace Ave., Kirkland, 98034"]
    r = client.post("/apply", json={"program": program, "inputs": inputs})
    values = [p["value"] for p in r.json()["results"]]
    assert values == ["Cambridge, MA", "Redmond, WA", "Seattle, WA", "Kirkland, WA"]


def test_apply_failure_marker(client):
    r = client.post("/apply", json={"program": "(Concat (GetFirstNumber (arg inp)))",
                                    "inputs": ["nope", "a1"]})
    assert r.json()["results"] == [{"ok": False}, {"ok": True, "value": "1"}]


def test_apply_parse_error_names_token(client):
    r = client.post("/apply", json={"program": "(Concat (GetNothing (arg inp)))",
                                    "inputs": ["a"]})
    assert r.status_code == 400
    assert "GetNothing" in r.json()["error"]


def test_synthesize_identity(client):
    r = client.post("/synthesize", json={
        "examples": [{"input": "x", "output": "x"}],
        "apply_to": ["y"], "samples": 100, "seed": 5})
    body = r.json()
    assert body["found"] is True
    assert body["consistent"] is True
    assert body["predictions"] == [{"ok": True, "value": "y"}]
    assert body["stats"]["found_at"] >= 1


def test_synthesize_zero_samples(client):
    r = client.post("/synthesize", json={
        "examples": [{"input": "x", "output": "x"}], "samples": 0})
    body = r.json()
    assert body["found"] is False
    assert body["stats"]["draws"] == 0


def test_synthesize_seeded_reproducible(client):
    req = {"examples": [{"input": "aa bb", "output": "aa"}],
           "samples": 100, "seed": 9}
    assert client.post("/synthesize", json=req).json() == \
        client.post("/synthesize", json=req).json()


def test_malformed_body_is_400(client):
    assert client.post("/synthesize", json={"examples": []}).status_code == 400
    assert client.post("/synthesize", json={"nope": 1}).status_code == 400
    assert client.post("/synthesize", json={
        "examples": [{"input": "", "output": "y"}]}).status_code == 400


def test_neural_without_checkpoint_is_409(client):
    r = client.post("/synthesize", json={
        "examples": [{"input": "x", "output": "x"}], "method": "neural"})
    assert r.status_code == 409


def test_neural_with_model_solves_trained_task(tmp_path):
    cfg = GenConfig(max_size=6, families=("regex",), api_subset=TINY_APIS, seed=5)
    grammar = grammar_for(cfg)
    enc = EncoderConfig(T=8, H=3, embed_dim=4, charset="abcdefghij XY.z012")
    model = R3NN(grammar, enc, m_dim=8, seed=2)
    inst = generate_instances(1, cfg)[0]
    rng = np.random.default_rng(0)
    for _ in range(400):
        if model.train_step([inst], rng) < 0.1:
            break
    client = TestClient(create_app(model=model))
    r = client.post("/synthesize", json={
        "examples": [{"input": p.input, "output": p.output} for p in inst.pairs],
        "method": "neural-greedy", "samples": 1, "seed": 0})
    body = r.json()
    assert body["found"] and body["consistent"]
