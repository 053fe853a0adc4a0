import json

import numpy as np
import pytest

from uniswarm import (ConfigError, ModelParams, Obstacle, ReferenceSchedule, RunConfig,
                      campaign, load_trajectory, run, scenario_fig3)
from uniswarm.dynamics import LEADER_CONSTANT, LEADER_DYNAMIC


def _leaderless_config(steps=20, seed=0, **kw):
    params = ModelParams(n=10, r_n=0.5, v_n=0.05, tau_n=0.01)
    return RunConfig(params=params, steps=steps, seed=seed, **kw)


def test_config_validation():
    cfg = _leaderless_config()
    cfg.mode = "warp"
    with pytest.raises(ValueError, match="unknown mode"):
        cfg.validate()
    cfg = _leaderless_config()
    cfg.mode = LEADER_DYNAMIC
    with pytest.raises(ValueError, match="schedule"):
        cfg.validate()
    cfg = _leaderless_config()
    cfg.mode = LEADER_CONSTANT
    with pytest.raises(ValueError, match="alpha_n"):
        cfg.validate()
    cfg = _leaderless_config()
    cfg.audit_level = "loud"
    with pytest.raises(ValueError, match="audit_level"):
        cfg.validate()


def test_config_json_roundtrip(tmp_path):
    params = ModelParams(n=8, r_n=0.4, v_n=0.1, tau_n=0.01, alpha_n=0.25, vartheta=0.7)
    sched = ReferenceSchedule(headings=[0.0, 0.5], epsilon=0.02)
    cfg = RunConfig(params=params, steps=15, seed=9, mode=LEADER_DYNAMIC,
                    schedule=sched, obstacle=Obstacle(center=(1.0, 0.2)))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    loaded = RunConfig.from_json(path)
    assert loaded.params == params
    assert loaded.schedule.headings == [0.0, 0.5]
    assert loaded.schedule.epsilon == 0.02
    assert loaded.obstacle.center == (1.0, 0.2)
    assert loaded.seed == 9 and loaded.mode == LEADER_DYNAMIC


def test_config_from_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.from_json(bad)
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"steps": 5}))
    with pytest.raises(ConfigError, match="params"):
        RunConfig.from_json(missing)
    inconsistent = tmp_path / "inc.json"
    inconsistent.write_text(json.dumps({
        "params": {"n": 5, "r_n": 0.3, "v_n": 0.1, "tau_n": 0.01},
        "steps": 5, "mode": "leader_dynamic"}))
    with pytest.raises(ConfigError, match="schedule"):
        RunConfig.from_json(inconsistent)


def test_run_writes_all_outputs(tmp_path):
    result = run(_leaderless_config(), out_dir=tmp_path)
    for name in ("trajectory.csv", "metrics.csv", "audits.json", "run_meta.json"):
        assert (tmp_path / name).exists()
    meta = json.loads((tmp_path / "run_meta.json").read_text())
    assert meta["schema_version"] == 1 and meta["seed"] == 0
    audits = json.loads((tmp_path / "audits.json").read_text())
    assert "recursion" in audits and "envelope" in audits


def test_run_deterministic_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(_leaderless_config(seed=4), out_dir=a)
    run(_leaderless_config(seed=4), out_dir=b)
    for name in ("metrics.csv", "trajectory.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_run_two_agent_sync_at_step_one():
    params = ModelParams(n=2, r_n=0.9, v_n=0.01, tau_n=0.01)
    cfg = RunConfig(params=params, steps=5, seed=2, audit_level="off")
    result = run(cfg)
    if result.metrics[0].connected:
        assert result.sync_index == 1


def test_load_trajectory_roundtrip(tmp_path):
    cfg = _leaderless_config(seed=7)
    result = run(cfg, out_dir=tmp_path)
    loaded = load_trajectory(tmp_path)
    np.testing.assert_array_equal(loaded.positions, result.trajectory.positions)
    np.testing.assert_array_equal(loaded.headings, result.trajectory.headings)
    np.testing.assert_array_equal(loaded.speeds, result.trajectory.speeds)
    np.testing.assert_array_equal(loaded.leader_mask, result.trajectory.leader_mask)


def test_campaign_single_seed_matches_run():
    cfg = _leaderless_config()
    summary = campaign(cfg, [5])
    single = run(RunConfig(params=cfg.params, steps=cfg.steps, seed=5,
                           audit_level=cfg.audit_level))
    assert len(summary.per_run) == 1
    rec = summary.per_run[0]
    assert rec["seed"] == 5
    assert rec["final_delta_theta"] == single.metrics[-1].delta_theta
    assert rec["sync_index"] == single.sync_index


def test_campaign_permutation_invariant():
    cfg = _leaderless_config()
    a = campaign(cfg, [0, 1, 2, 3])
    b = campaign(cfg, [3, 1, 0, 2])
    assert a.to_dict() == b.to_dict()


def test_campaign_disjoint_seed_lists():
    cfg = _leaderless_config()
    a = campaign(cfg, [0, 1])
    b = campaign(cfg, [2, 3])
    assert {r["seed"] for r in a.per_run}.isdisjoint(r["seed"] for r in b.per_run)


def test_campaign_needs_seeds():
    with pytest.raises(ValueError, match="at least one seed"):
        campaign(_leaderless_config(), [])


def test_campaign_writes_summary(tmp_path):
    campaign(_leaderless_config(), [0, 1], out_dir=tmp_path)
    data = json.loads((tmp_path / "campaign_summary.json").read_text())
    assert data["schema_version"] == 1
    assert len(data["per_run"]) == 2


def test_scenario_fig3_parameters():
    cfg = scenario_fig3()
    assert cfg.params.n == 20
    assert cfg.params.leader_count == 3
    assert cfg.params.v_n == 0.3 and cfg.params.r_n == 0.3 and cfg.params.tau_n == 0.01
    assert cfg.mode == LEADER_DYNAMIC
    np.testing.assert_allclose(cfg.schedule.headings,
                               [0.0, np.pi / 2, 0.0, -np.pi / 2, 0.0])
    assert cfg.schedule.total_variation() == pytest.approx(2 * np.pi)
    assert cfg.params.vartheta == 0.5 and cfg.schedule.epsilon == 0.05
    assert cfg.obstacle == Obstacle(center=(1.5, 0.5), semi_axes=(0.4, 0.25))


def test_obstacle_containment():
    obs = Obstacle(center=(1.0, 0.5), semi_axes=(0.2, 0.1))
    inside = obs.contains(np.array([[1.0, 0.5], [1.1, 0.5]]))
    outside = obs.contains(np.array([[1.25, 0.5], [1.0, 0.7]]))
    assert inside.all() and not outside.any()


def test_run_records_obstacle_diagnostic(tmp_path):
    cfg = _leaderless_config()
    cfg.obstacle = Obstacle(center=(0.5, 0.5), semi_axes=(10.0, 10.0))
    result = run(cfg)
    assert result.meta["obstacle"]["hit_fraction"] == 1.0
