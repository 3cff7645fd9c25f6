import copy
import json
from pathlib import Path

import numpy as np
import pytest

from safeguard import config
from safeguard.config import ConfigError
from safeguard.robots import ArmModel, Disc, UnicycleModel

ROOT = Path(__file__).resolve().parents[1]


def minimal_unicycle():
    return {
        "robot": {"kind": "unicycle", "vertices": [[1, 0], [-0.6, 0.35], [-0.6, -0.35]], "initial_state": [0, 0, 0]},
        "obstacles": [{"a": 1.0, "b": 0.5, "pose": [5, 0, 0]}],
        "goal": {"center": [10, 0], "radius": 1.0},
    }


def minimal_arm():
    return {
        "robot": {"kind": "arm", "link_lengths": [1, 1], "initial_state": [0, 0]},
        "obstacles": [{"a": 0.3, "b": 0.3, "pose": [0, 2, 0]}],
        "controller": {"x_star": [1.0, 0.5]},
        "goal": {"radius": 0.2},
    }


def test_docs_schema_matches_packaged_schema():
    assert json.loads((ROOT / "docs" / "scenario.schema.json").read_text()) == config.load_schema()


def test_defaults_filled():
    d = config.normalize(minimal_unicycle())
    assert d["controller"]["nominal"] == [3.0, 0.0]
    assert d["controller"]["lambda"] == 100.0
    assert d["controller"]["gamma_v"] == 2.0
    assert d["controller"]["gamma_h"] == 3.0
    assert d["robot"]["input_upper"][0] == 3.0
    assert d["sim"]["dt"] == 0.01
    assert d["controller"]["x_star"] == [10, 0, 0]
    a = config.normalize(minimal_arm())
    assert a["robot"]["input_lower"] == [-3.0, -3.0]
    assert a["controller"]["nominal"] == [0.0, 0.0]
    assert a["goal"]["center"] == pytest.approx(list(ArmModel([1, 1]).position([1.0, 0.5])))


@pytest.mark.parametrize("name", sorted(config.bundled_scenarios()))
def test_round_trip(name):
    d = config.load(config.bundled_scenarios()[name])
    again = config.normalize(json.loads(config.dumps(d)))
    assert again == d
    assert config.normalize(again) == again


@pytest.mark.parametrize(
    "mutate, pointer",
    [
        (lambda d: d.setdefault("sim", {}).update(dt=-0.01), "/sim/dt"),
        (lambda d: d.setdefault("sim", {}).update(dt=0.5), "/sim/dt"),
        (lambda d: d["robot"].update(kind="tank"), "/robot/kind"),
        (lambda d: d["robot"].update(colour="red"), "/robot"),
        (lambda d: d["obstacles"][0].update(a=-1.0), "/obstacles/0/a"),
        (lambda d: d["goal"].update(radius=0.0), "/goal/radius"),
        (lambda d: d.update(extra=1), ""),
        (lambda d: d["robot"].update(initial_state=[0, 0]), "/robot/initial_state"),
    ],
)
def test_schema_errors_have_pointers(mutate, pointer):
    d = minimal_unicycle()
    mutate(d)
    with pytest.raises(ConfigError) as info:
        config.normalize(d)
    assert info.value.pointer == (pointer or "/")


def test_semantic_errors():
    d = minimal_unicycle()
    d["controller"] = {"Q": [[1, 0, 0], [0, -1, 0], [0, 0, 1]]}
    with pytest.raises(ConfigError) as info:
        config.build(config.normalize(d))
    assert info.value.pointer == "/controller/Q"

    d = minimal_unicycle()
    d["obstacles"][0]["pose"] = [0.2, 0, 0]
    with pytest.raises(ConfigError) as info:
        config.build(config.normalize(d))
    assert info.value.pointer == "/obstacles/0"

    d = minimal_arm()
    del d["controller"]
    with pytest.raises(ConfigError) as info:
        config.normalize(d)
    assert info.value.pointer == "/controller/x_star"

    d = minimal_arm()
    d["robot"]["initial_state"] = [0, 0, 0]
    with pytest.raises(ConfigError):
        config.normalize(d)


def test_overrides_and_shapes():
    d = config.normalize(minimal_unicycle())
    s = config.build(d, overrides={"sim.dt": 0.02, "controller.gamma_h": 5.0})
    assert s.dt == 0.02
    assert s.barriers[0].gamma == 5.0
    assert isinstance(s.model, UnicycleModel)
    c = config.build(d, shape="circle")
    assert isinstance(c.model.shape, Disc)
    assert c.model.shape.radius == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        config.build(d, overrides={"sim.dt": -1.0})


def test_arm_circle_cover():
    s = config.build(config.normalize(minimal_arm()), shape="circle")
    assert all(isinstance(sh, Disc) for sh in s.model.link_shapes)
    assert [sh.radius for sh in s.model.link_shapes] == [0.5, 0.5]


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        config.load(bad)


def test_input_mutation_free():
    d = minimal_unicycle()
    before = copy.deepcopy(d)
    config.normalize(d)
    assert d == before


def test_non_finite_values_rejected():
    d = minimal_unicycle()
    d["obstacles"][0]["velocity"] = [float("nan"), 0.0]
    with pytest.raises(ConfigError) as info:
        config.normalize(d)
    assert info.value.pointer.startswith("/obstacles/0/velocity")
