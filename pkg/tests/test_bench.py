import csv
import json
import logging
import math
import subprocess
import sys

import numpy as np
import pytest

from extrl import bench
from extrl.bench import (
    BenchConfig,
    ConfigError,
    ResultRow,
    episode_rewards,
    main,
    mean_curve_path,
    moving_average,
    parse_agent,
    run_benchmark,
    run_curves,
    summarize,
    worker_count,
    write_result_table,
)
from extrl.control_tasks import CartPole


class TestParseAgent:
    def test_q_with_params(self):
        f = parse_agent("q(lr=0.2;gamma=0.5;eps=0.1)")
        assert (f.config.learning_rate, f.config.discount, f.config.exploration) == (0.2, 0.5, 0.1)

    def test_constants(self):
        assert parse_agent("constant_always_push").param("k") == 1
        assert parse_agent("constant_never_push").param("k") == 0
        assert parse_agent("constant(k=1)").param("k") == 1

    def test_rc(self):
        f = parse_agent("rc(q)")
        assert f.kind == "rc" and f.inner.kind == "q" and f.param("y") is None
        g = parse_agent("rc(q(lr=0.3);y=1)")
        assert g.param("y") == 1 and g.inner.config.learning_rate == 0.3
        assert parse_agent("rc(rc(random))").inner.kind == "rc"

    def test_spaces_and_seed(self):
        f = parse_agent("rc(q)", action_count=4, obs_count=9, seed=3)
        assert (f.config.action_count, f.config.obs_count, f.config.seed) == (4, 9, 3)
        assert (f.inner.config.action_count, f.inner.config.seed) == (4, 3)

    def test_overrides(self):
        f = parse_agent("q", overrides={"q": {"lr": 0.01}})
        assert f.config.learning_rate == 0.01

    @pytest.mark.parametrize("spec", ["nope", "q(lr=0.1", "q(foo=1)", "q(lr)", "rc()", "rc(q;lr=0.1)", "random(k=1)"])
    def test_errors(self, spec):
        with pytest.raises(ConfigError):
            parse_agent(spec)


class TestSummaries:
    def test_summarize(self):
        assert summarize([1.0, 1.0]) == (1.0, 0.0)
        mean, se = summarize([0.0, 1.0])
        assert mean == 0.5 and se == pytest.approx(math.sqrt(0.5) / math.sqrt(2))
        assert summarize([0.3]) == (0.3, 0.0)

    def test_moving_average_oracle(self):
        r = np.random.default_rng(0).normal(size=250)
        ma = moving_average(r, 100)
        for i in (0, 1, 50, 99, 100, 249):
            assert ma[i] == pytest.approx(r[max(0, i - 99) : i + 1].mean())


class TestRunBenchmark:
    def test_constant_on_ignore_rewards(self):
        rows = run_benchmark(BenchConfig(agents=["constant"], envs=["ignore_rewards"], steps=1000, seeds=2))
        assert rows == [ResultRow("constant", "ignore_rewards", 1000, 2, 1.0, 0.0)]

    def test_row_count_and_bounds(self):
        cfg = BenchConfig(
            agents=["q", "random", "rc(q)"],
            envs=["tempting_button", "self_recognition"],
            steps=500,
            seeds=2,
        )
        rows = run_benchmark(cfg)
        assert len(rows) == 6
        assert [(r.agent, r.env) for r in rows][:2] == [("q", "tempting_button"), ("q", "self_recognition")]
        assert all(abs(r.mean_reward_per_turn) <= 1 and r.stderr >= 0 for r in rows)

    def test_reverse_history_cap(self, caplog):
        cfg = BenchConfig(envs=["reverse_history"], steps=50_000)
        with caplog.at_level(logging.WARNING):
            assert bench._effective_steps("reverse_history", cfg) == bench.REVERSE_HISTORY_STEP_CAP
        assert "allow-quadratic" in caplog.text
        cfg.allow_quadratic = True
        assert bench._effective_steps("reverse_history", cfg) == 50_000
        assert bench._effective_steps("tempting_button", BenchConfig(steps=50_000)) == 50_000

    @pytest.mark.parametrize(
        "kwargs",
        [{"steps": 0}, {"seeds": 0}, {"agents": ["bogus"]}, {"envs": ["bogus"]}, {"envs": ["cartpole*reverse_history"]}],
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises((ConfigError, KeyError, ValueError)):
            run_benchmark(BenchConfig(**kwargs))

    def test_parallel_matches_serial(self, monkeypatch):
        cfg = BenchConfig(agents=["q", "random"], envs=["tempting_button"], steps=300, seeds=3)
        monkeypatch.setenv("EXTRL_THREADS", "1")
        serial = run_benchmark(cfg)
        monkeypatch.setenv("EXTRL_THREADS", "2")
        monkeypatch.setattr(bench.os, "cpu_count", lambda: 2)
        assert worker_count(6) == 2
        assert run_benchmark(cfg) == serial

    def test_worker_count(self, monkeypatch):
        monkeypatch.setattr(bench.os, "cpu_count", lambda: 8)
        monkeypatch.setenv("EXTRL_THREADS", "3")
        assert worker_count(100) == 3 and worker_count(2) == 2
        monkeypatch.setenv("EXTRL_THREADS", "many")
        with pytest.raises(ConfigError):
            worker_count(4)


class TestResultTable:
    def test_empty_is_header_only(self, tmp_path):
        p = tmp_path / "t.csv"
        write_result_table([], p)
        assert p.read_bytes() == b"agent,env,steps,seeds,mean_reward_per_turn,stderr\n"

    def test_one_row(self, tmp_path):
        p = tmp_path / "t.csv"
        rows = [ResultRow("q", "tempting_button", 100000, 5, -0.448581234, 0.000441)]
        write_result_table(rows, p)
        lines = p.read_text().split("\n")
        assert lines == [
            "agent,env,steps,seeds,mean_reward_per_turn,stderr",
            "q,tempting_button,100000,5,-0.44858,0.00044",
            "",
        ]
        q = tmp_path / "u.csv"
        write_result_table(rows, q)
        assert p.read_bytes() == q.read_bytes()

    def test_io_error_names_path(self, tmp_path):
        with pytest.raises(OSError, match="nodir"):
            write_result_table([], tmp_path / "nodir" / "t.csv")


class TestCurves:
    def test_constant_episode_reward_is_length(self):
        rewards = episode_rewards(parse_agent("constant", action_count=4, obs_count=324), "cartpole*ignore_rewards", 20, 3)
        task = CartPole(3)
        expected = []
        for _ in range(20):
            task.reset()
            n, done = 0, False
            while not done:
                _, _, done = task.step(0)
                n += 1
            expected.append(float(n))
        assert rewards == expected

    def test_non_episodic_rejected(self):
        with pytest.raises(ConfigError):
            episode_rewards(parse_agent("q"), "ignore_rewards", 5, 0)
        with pytest.raises(ConfigError):
            run_curves(BenchConfig(envs=["tempting_button"], episodes=3, seeds=1))

    def test_files(self, tmp_path):
        out = tmp_path / "curves.csv"
        cfg = BenchConfig(
            agents=["q", "rc(q)"], envs=["cartpole*ignore_rewards"], episodes=30, seeds=2, output_path=str(out)
        )
        curves = run_curves(cfg)
        assert curves[("q", "cartpole*ignore_rewards")].shape == (2, 30)
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2 * 2 * 30
        assert rows[0]["episode"] == "1" and max(int(r["episode"]) for r in rows) == 30
        with open(mean_curve_path(out)) as fh:
            header = fh.readline().strip()
            mean_rows = list(csv.reader(fh))
        assert header == "agent,env,episode,mean_episode_reward,moving_average_100"
        arr = curves[("q", "cartpole*ignore_rewards")]
        first = mean_rows[0]
        assert float(first[3]) == pytest.approx(arr[:, 0].mean(), abs=1e-5)
        assert float(mean_rows[29][4]) == pytest.approx(arr.mean(axis=0).mean(), abs=1e-5)

    def test_mean_path(self):
        assert mean_curve_path("out/c.csv").name == "c_mean.csv"


class TestCli:
    def test_run(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = main(["run", "--agents", "constant,q", "--envs", "ignore_rewards", "--steps", "200", "--seeds", "2", "--out", str(out)])
        assert code == 0
        assert out.read_text().count("\n") == 3

    def test_config_file_with_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        out = tmp_path / "r.csv"
        cfg.write_text(json.dumps({"agents": ["random"], "envs": ["tempting_button"], "steps": 50, "seeds": 1, "output_path": str(out)}))
        assert main(["run", "--config", str(cfg), "--steps", "70"]) == 0
        assert ",70,1," in out.read_text()

    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--agents", "bogus", "--steps", "5"],
            ["run", "--envs", "nowhere", "--steps", "5"],
            ["run", "--steps", "0"],
            ["curves", "--envs", "cartpole*limited_memory"],
            ["run", "--config", "/nonexistent/config.json"],
        ],
    )
    def test_errors_exit_nonzero_with_one_line(self, argv, capsys, tmp_path):
        assert main(argv + ["--out", str(tmp_path / "x.csv")]) != 0
        err = capsys.readouterr().err
        assert err.startswith("extrl: error:") and err.count("\n") == 1

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"agnets": ["q"]}))
        assert main(["run", "--config", str(cfg)]) == 2

    def test_list(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "tempting_button" in out and "cartpole*ignore_rewards" in out

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "r.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "extrl", "run", "--agents", "constant", "--envs", "ignore_rewards",
             "--steps", "10", "--seeds", "1", "--out", str(out)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert out.read_text().splitlines()[1] == "constant,ignore_rewards,10,1,1.00000,0.00000"
