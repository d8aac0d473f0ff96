import json
import math

import numpy as np
import pytest

from gframe_lab import gframe, linops, scenarios
from gframe_lab.controlled import controlled_frame_operator
from gframe_lab.duals import canonical_dual
from gframe_lab.errors import BadControllers, FormatError


def test_example_small_grid_is_exact():
    s = scenarios.example_1_5(4)
    assert linops.operator_norm(gframe.frame_operator(s.lambda_family) - math.pi * np.eye(2)) <= 1e-12
    for N in (2, 5, 64):
        assert scenarios.example_1_5(N).space.total_mass == pytest.approx(2 * math.pi, rel=1e-15)


def test_example_with_controllers():
    s = scenarios.example_1_5(1024, np.diag([2.0, 1.0]), np.diag([3.0, 1.0]))
    M = controlled_frame_operator(s.lambda_family, s.P, s.Q)
    assert linops.operator_norm(M - math.pi * np.diag([6.0, 1.0])) <= 1e-8
    with pytest.raises(BadControllers):
        scenarios.example_1_5(8, np.diag([1.0, -1.0]))
    with pytest.raises(BadControllers):
        scenarios.example_1_5(8, np.eye(3))


def test_random_controller_properties():
    C = scenarios.random_controller(4, 1.0, seed=3)
    assert linops.operator_norm(C.matrix - np.eye(4)) <= 1e-12
    for seed in range(10):
        C = scenarios.random_controller(5, 30.0, seed)
        lo, hi = C.spectral_bounds
        assert linops.hermitian_defect(C.matrix) <= 1e-12
        assert lo >= hi / 30.0 * (1 - 1e-12) and lo >= 1.0 - 1e-12


def test_random_controller_commuting_with():
    fam = scenarios.random_gframe(5, (2, 2, 3), seed=4)
    S = gframe.frame_operator(fam)
    C = scenarios.random_controller(5, 20.0, seed=1, commuting_with=S)
    assert linops.commutator_norm(C.matrix, S) <= 1e-10 * linops.operator_norm(S) * C.norm


def test_generators_are_deterministic():
    a = scenarios.random_gframe(3, (1, 2, 2), seed=11)
    b = scenarios.random_gframe(3, (1, 2, 2), seed=11)
    assert a == b
    assert a != scenarios.random_gframe(3, (1, 2, 2), seed=12)
    for kind in scenarios.CONTROLLER_KINDS:
        assert scenarios.random_scenario(5, controllers=kind) == scenarios.random_scenario(5, controllers=kind)


def test_random_scenario_kinds():
    for seed in range(20):
        s = scenarios.random_scenario(seed, controllers="commuting")
        S = gframe.frame_operator(s.lambda_family)
        assert s.space.total_dim >= s.n
        assert linops.commutator_norm(s.P.matrix, s.Q.matrix) <= 1e-8 * s.P.norm * s.Q.norm
        assert linops.commutator_norm(s.P.matrix, S) <= 1e-10 * linops.operator_norm(S) * s.P.norm
    assert scenarios.random_scenario(1, controllers="equal").P == scenarios.random_scenario(1, controllers="equal").Q
    with pytest.raises(ValueError):
        scenarios.random_scenario(1, controllers="chaotic")


@pytest.mark.parametrize("make", [
    lambda: scenarios.example_1_5(8),
    lambda: scenarios.random_scenario(0),
    lambda: scenarios.random_scenario(1, controllers="commuting"),
    lambda: scenarios.random_scenario(2, controllers="p_commuting"),
    scenarios.diag_example,
    scenarios.noncommuting_fixture,
])
def test_round_trip(tmp_path, make):
    s = make()
    path = tmp_path / "s.json"
    scenarios.save_scenario(s, path)
    back = scenarios.load_scenario(path)
    assert back == s
    # byte oracle: re-serializing the loaded scenario reproduces the file
    assert scenarios.dumps_scenario(back) == path.read_text()


def test_round_trip_with_gamma(tmp_path):
    s = scenarios.random_scenario(3)
    s = s.with_gamma(canonical_dual(s.lambda_family, s.P).gamma)
    scenarios.save_scenario(s, tmp_path / "g.json")
    assert scenarios.load_scenario(tmp_path / "g.json") == s


def test_truncated_file(tmp_path):
    text = scenarios.dumps_scenario(scenarios.example_1_5(8))
    path = tmp_path / "t.json"
    path.write_text(text[: len(text) // 2])
    with pytest.raises(FormatError):
        scenarios.load_scenario(path)


def test_schema_errors(tmp_path):
    d = scenarios.scenario_to_dict(scenarios.diag_example())
    for mutate in (
        lambda x: x.update(version=2),
        lambda x: x.update(format="other"),
        lambda x: x.pop("P"),
        lambda x: x["lambda"][0].update(shape=[3, 3]),
        lambda x: x["lambda"][0]["re"].__setitem__(0, "zz"),
        lambda x: x["space"].update(weights=["-0x1p+0", "0x1p+0"]),
    ):
        bad = json.loads(json.dumps(d))
        mutate(bad)
        with pytest.raises(FormatError):
            scenarios.scenario_from_dict(bad)
