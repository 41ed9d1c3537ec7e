from __future__ import annotations

import json
import pytest

from gridarena.cli import RunConfig, main

DESK_CONFIG = {
    "env": {"num_agents": 8, "map_size": 32, "max_ticks": 32, "num_npcs": 8, "seed": 0},
    "rewards": {"preset": "takeru"},
    "tournament": {
        "policies": ["random", "forage", "warrior", "marketeer"],
        "baseline": "noop",
        "pve": {"episodes": 2, "map_seeds": [1, 2]},
        "pvp": {
            "num_groups": 3, "group_size": 2, "filler_agents": 2,
            "maps": [5, 6], "episodes": 2, "rounds": 1,
        },
    },
    "master_seed": 4,
}


@pytest.fixture
def config_path(tmp_path) -> str:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(DESK_CONFIG), encoding="utf-8")
    return str(path)


def test_run_config_rejects_unknown_keys(tmp_path):
    with pytest.raises(Exception, match="unknown"):
        RunConfig.from_dict({"envv": {}})
    with pytest.raises(Exception, match="unknown"):
        RunConfig.from_dict({"env": {"bogus": 3}})
    with pytest.raises(Exception, match="unknown"):
        RunConfig.from_dict({"tournament": {"pvpp": {}}})


def test_simulate_prints_hashes_and_exits_zero(config_path, capsys):
    rc = main(["simulate", "--config", config_path, "--seed", "7", "--policy", "cycle"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) >= {"state_hash", "replay_hash", "ticks", "events"}
    assert payload["ticks"] == 32


def test_simulate_same_seed_identical_output(config_path, capsys):
    main(["simulate", "--config", config_path, "--seed", "7"])
    first = capsys.readouterr().out
    main(["simulate", "--config", config_path, "--seed", "7"])
    second = capsys.readouterr().out
    assert first == second


def test_simulate_zero_ticks_errors(config_path, capsys):
    rc = main(["simulate", "--config", config_path, "--ticks", "0"])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_simulate_writes_replay(config_path, tmp_path, capsys):
    replay = tmp_path / "replay.jsonl"
    rc = main(["simulate", "--config", config_path, "--seed", "3", "--replay", str(replay)])
    assert rc == 0
    lines = replay.read_text().strip().splitlines()
    header = json.loads(lines[0])
    assert header["format"] == "gridarena-replay-1"
    assert "env" in header and "seed" in header
    tick_line = json.loads(lines[1])
    assert set(tick_line) == {"tick", "events", "agents"}
    assert len(tick_line["agents"]) == 8
    assert {"id", "pos", "hp", "food", "water", "gold", "alive"} <= set(tick_line["agents"][0])
    assert len(lines) == 1 + 32


def test_eval_pve_writes_report_and_table(config_path, tmp_path, capsys):
    out = tmp_path / "out"
    rc = main(["eval", "--config", config_path, "--mode", "pve", "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "policy" in printed and "PvE (%)" in printed
    report = json.loads((out / "report_pve.json").read_text())
    assert report["mode"] == "pve"
    assert len(report["reports"]) == 5  # 4 roster + baseline
    for entry in report["reports"]:
        assert {"completion_rate", "mean_progress", "mean_lifespan", "per_task"} <= set(entry)


def test_eval_pve_identical_bytes_same_seed(config_path, tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["eval", "--config", config_path, "--mode", "pve", "--out", str(out1)])
    main(["eval", "--config", config_path, "--mode", "pve", "--out", str(out2)])
    capsys.readouterr()
    assert (out1 / "report_pve.json").read_bytes() == (out2 / "report_pve.json").read_bytes()


def test_eval_pvp_writes_ranked_report(config_path, tmp_path, capsys):
    config = dict(DESK_CONFIG)
    config["tournament"] = dict(config["tournament"], policies=["random", "forage", "warrior"])
    path = tmp_path / "pvp.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    out = tmp_path / "out"
    rc = main(["eval", "--config", str(path), "--mode", "pvp", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "report_pvp.json").read_text())
    ranks = [entry["rank"] for entry in report["reports"]]
    assert ranks[:3] == [1, 2, 3] and ranks[-1] is None


def test_eval_missing_task_file_errors(config_path, tmp_path, capsys):
    config = dict(DESK_CONFIG)
    config["tasks"] = {"eval": str(tmp_path / "missing.txt")}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    rc = main(["eval", "--config", str(path), "--mode", "pve", "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_tasks_overlap_and_pca(config_path, tmp_path, capsys):
    out = tmp_path / "artifacts"
    rc = main(["tasks", "--config", config_path, "--overlap", "--pca", "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out
    overlap = json.loads((out / "overlap.json").read_text())
    assert overlap["full"] < overlap["predicates"]
    csv_lines = (out / "pca.csv").read_text().strip().splitlines()
    assert csv_lines[0] == "task_name,predicate,x,y"
    assert len(csv_lines) == 1 + 120 + 12


def test_tasks_embed_empty_file_errors(tmp_path, capsys):
    empty = tmp_path / "empty.txt"
    empty.write_text("# nothing here\n", encoding="utf-8")
    config = {"tasks": {"train": str(empty), "eval": str(empty)}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    rc = main(["tasks", "--config", str(path), "--embed", "--out", str(tmp_path / "o")])
    assert rc == 2


def test_tasks_requires_a_flag(config_path, capsys):
    rc = main(["tasks", "--config", config_path])
    assert rc == 2


def test_bench_zero_episodes_errors(capsys):
    rc = main(["bench", "--episodes", "0"])
    assert rc == 2


def test_bench_reports_padding_free_savings(tmp_path, capsys):
    # NPC pressure plus starvation staggers deaths, so dense padding is nonzero.
    config = {
        "env": {
            "num_agents": 8, "map_size": 32, "max_ticks": 64, "num_npcs": 32,
            "food_decay": 4, "water_decay": 4, "spawn_immunity_ticks": 0,
        },
    }
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    rc = main(["bench", "--episodes", "1", "--config", str(path)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert "agent-steps/s" in printed
    lines = [l for l in printed.splitlines() if "padding-free transitions" in l]
    assert lines
    for line in lines:
        parts = dict(part.split("=") for part in line.replace(",", "").split() if "=" in part)
        assert int(parts["transitions"]) < int(parts["cells"])
