import math

import pytest

import encounter as enc


def test_weight_formulas():
    assert enc.distance_score(1.0) == pytest.approx(0.5, abs=1e-12)
    assert enc.orientation_score(math.pi) == pytest.approx(math.exp(-2), abs=1e-12)
    d, theta, omega = 1.3, 0.7, 0.4
    want = omega / (1 + d) + (1 - omega) * math.exp(math.cos(theta) - 1)
    assert enc.raw_weight(d, theta, omega) == pytest.approx(want, abs=1e-12)
    assert enc.apply_stickiness(0.81) == 1.0
    assert enc.apply_prior(1.0, 0.75) == 0.75


def test_centroid_of_two_balls():
    vois = [enc.Voi("a", enc.Vec2(1, 1)), enc.Voi("b", enc.Vec2(3, 1))]
    user = enc.UserState(enc.Pose(enc.Vec2(2, 0), math.pi / 2))
    w = enc.compute_weights(user, vois)
    assert [e.voi_id for e in w.entries] == ["a", "b"]
    # Symmetric scene, so the command sits midway.
    c = enc.command_position(w, vois)
    assert c.target.x == pytest.approx(2.0, abs=1e-12)
    assert c.target.y == pytest.approx(1.0, abs=1e-12)
    assert not c.degenerate


def test_single_ball_trial_succeeds():
    spec = enc.generate_trial(7, 0)
    assert len(spec.vois) == 1
    r = enc.run_trial(spec, record_frames=True)
    assert r.success
    assert r.contacted_id == "target"
    assert r.safety.speed_cap_violations == 0
    assert len(r.frames) > 0
    assert r.frames[-1].robot.status == enc.RobotStatus.active
    assert '"success":true' in r.to_json()


def test_sweep_is_repeatable():
    a = enc.run_sweep([0.0, 0.5], conditions=[0, 1], blocks=1, base_seed=3)
    b = enc.run_sweep([0.0, 0.5], conditions=[0, 1], blocks=1, base_seed=3, threads=1)
    assert a.summary_csv() == b.summary_csv()
    assert a.trials_csv() == b.trials_csv()
    assert [(r.omega, r.condition) for r in a.rows] == [(0.0, 0), (0.0, 1), (0.5, 0), (0.5, 1)]
    assert enc.trial_seed(3, 0, 1, 2) == enc.trial_seed(3, 0, 1, 2)


def test_scenario_files(tmp_path):
    s = enc.scenario_from_trial(enc.generate_trial(11, 2))
    path = tmp_path / "s.json"
    enc.save_scenario(path, s)
    back = enc.load_scenario(path)
    assert back.to_json() == s.to_json()
    assert len(back.vois) == 3


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError, match="format"):
        enc.scenario_from_json("{}")
    text = enc.scenario_from_trial(enc.generate_trial(11, 2)).to_json()
    bad = text.replace('"prior": 1.0', '"prior": 1.2', 1)
    assert bad != text
    with pytest.raises(ValueError, match=r"vois\[0\]\.prior"):
        enc.scenario_from_json(bad)
    with pytest.raises(ValueError):
        enc.distance_score(-1.0)
