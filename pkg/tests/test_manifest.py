import json

import numpy as np
import pytest

from porosity_lab.corpus import fractal_spec, generate
from porosity_lab.errors import ManifestError
from porosity_lab.manifest import VERSION, Manifest


def corpus_manifest():
    space, A, mu, truth = generate(fractal_spec("cantor1d", 4))
    return Manifest.from_space(space, {"A": A}, {"mu": mu}, {"truth": truth.to_dict()})


def test_round_trip_bytes(tmp_path):
    m = corpus_manifest()
    path = tmp_path / "a.json"
    m.write(path)
    text = path.read_text()
    again = Manifest.read(path)
    assert again.dumps() == text
    assert np.array_equal(again.points, m.points)
    assert np.array_equal(again.measures["mu"], m.measures["mu"])
    assert np.array_equal(again.subsets["A"], m.subsets["A"])
    assert text.endswith("\n") and "\r" not in text


def test_weights_are_strings():
    raw = json.loads(corpus_manifest().dumps())
    assert raw["version"] == VERSION
    assert all(isinstance(w, str) for w in raw["measures"]["mu"])
    assert raw["dim"] == 1


def test_space_reconstruction():
    m = corpus_manifest()
    sp = m.space()
    assert sp.n == len(m.points) and sp.epsilon == m.epsilon
    assert len(m.subset("A")) == 16
    assert m.measure("mu").total == pytest.approx(1.0)
    with pytest.raises(ManifestError):
        m.subset("F")


@pytest.mark.parametrize("mutate,match", [
    (lambda d: d.update(version="other/9"), "version"),
    (lambda d: d["measures"]["mu"].pop(), "weights"),
    (lambda d: d["subsets"]["A"].append(10**6), "outside"),
    (lambda d: d.pop("points"), "lacks"),
    (lambda d: d.update(dim=3), "dim"),
    (lambda d: d["measures"]["mu"].__setitem__(0, "-1.0"), "invalid"),
])
def test_rejects_bad_manifests(mutate, match):
    raw = json.loads(corpus_manifest().dumps())
    mutate(raw)
    with pytest.raises(ManifestError, match=match):
        Manifest.loads(json.dumps(raw))


def test_rejects_non_json():
    with pytest.raises(ManifestError):
        Manifest.loads("{not json")
