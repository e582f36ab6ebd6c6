from __future__ import annotations

import json

import pytest

from rflock.cli import ConfigError, main, parse_config
from rflock.harness.explore import Bounds, Exploration
from rflock.harness.report import from_exploration, render, result_block


def test_empty_report_is_the_result_block_only():
    assert render([]) == "scenarios=0 failures=0 pwb=0 pfence=0 psync=0\n"
    assert json.loads(render([], "json-lines")) == {"result": result_block([])}


def test_report_lines():
    ex = Exploration(schedules=3, seed=4, sampled=True)
    r = from_exploration("x", "random", Bounds(), ex, ["boom"])
    text = render([r])
    assert text.splitlines()[0] == "scenarios=1 failures=1 pwb=0 pfence=0 psync=0"
    assert "FAIL x: mode=random seed=4 schedules=3" in text
    assert "  boom" in text
    with pytest.raises(ValueError):
        render([r], "xml")


def test_parse_config():
    cfg = parse_config("scenario = bank-nested  # nested\n\nthreads=2\nfault-inject = skip-rd-pwb, skip-recover-step\n")
    assert cfg == {"scenario": "bank-nested", "threads": 2, "faults": ("skip-rd-pwb", "skip-recover-step")}
    with pytest.raises(ConfigError):
        parse_config("colour = blue")
    with pytest.raises(ConfigError):
        parse_config("threads = many")
    with pytest.raises(ConfigError):
        parse_config("threads")


def test_smoke_passes_and_echoes_seed(capsys):
    assert main(["run", "--scenario", "queue-smoke", "--preemptions", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("scenarios=1 failures=0 ")
    assert "PASS queue-smoke" in out
    assert main(["run", "--scenario", "queue-smoke", "--mode", "random", "--seed", "9", "--runs", "5"]) == 0
    assert "seed=9" in capsys.readouterr().out


def test_fault_makes_the_run_fail(capsys, tmp_path):
    out_file = tmp_path / "r.jsonl"
    code = main(["run", "--scenario", "queue-crash-sweep", "--preemptions", "0",
                 "--fault-inject", "skip-recover-step", "--format", "json-lines", "--output", str(out_file)])
    assert code == 1
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert lines[0]["result"].startswith("scenarios=1 failures=")
    assert lines[1]["name"] == "queue-crash-sweep" and lines[1]["ok"] is False
    assert lines[1]["failed"][0]["path"]
    assert out_file.read_text().splitlines()[0] == json.dumps(lines[0])
    path = ",".join(map(str, lines[1]["failed"][0]["path"]))
    assert main(["run", "--scenario", "queue-crash-sweep", "--preemptions", "0",
                 "--fault-inject", "skip-recover-step", "--replay", path]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scenario = queue-smoke\npreemptions = 0\nformat = json-lines\n")
    assert main(["run", "--config", str(cfg), "--format", "text"]) == 0
    assert capsys.readouterr().out.startswith("scenarios=1")


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nope"],
    ["run", "--threads", "7"],
    ["run", "--fault-inject", "unplug"],
    ["run", "--config", "/nonexistent/cfg"],
    ["run", "--scenario", "all", "--replay", "0"],
])
def test_bad_input_exits_2(argv, capsys):
    assert main(argv) == 2
    assert "rflock: error:" in capsys.readouterr().err


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--frobnicate"])
    assert exc.value.code == 2


def test_list(capsys):
    assert main(["list"]) == 0
    assert "livelock-bound:" in capsys.readouterr().out
