import csv
import json

import numpy as np
import pytest

from rqmopt.datagen import generate, write_csv
from rqmopt.errors import ConfigurationError
from rqmopt.experiment import ExperimentConfig, cmd_bench, run_trials
from rqmopt.schedules import Schedule, ScheduleKind
from rqmopt.streams import trial_stream
from rqmopt.rqm import run


@pytest.fixture
def data_file(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(generate(11, n_samples=150, dim=4, nnz=2), path)
    return path


def test_defaults():
    c = ExperimentConfig()
    assert (c.delta, c.lam, c.n_samples, c.dim, c.trials, c.iters) == (2.0, 0.1, 10_000, 10, 100, 5000)


@pytest.mark.parametrize("kwargs", [dict(trials=0), dict(iters=0), dict(method="sgd"), dict(schedule="x"),
                                    dict(stride=0), dict(workers=0)])
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        ExperimentConfig(**kwargs)


def test_missing_dataset(tmp_path):
    with pytest.raises(FileNotFoundError):
        ExperimentConfig(data=str(tmp_path / "none.csv")).load_problem()
    with pytest.raises(ConfigurationError):
        ExperimentConfig().load_problem()


def test_custom_schedule_from_config(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text(" ".join(str(1.0 + k) for k in range(20)))
    s = ExperimentConfig(schedule="custom", custom_gamma_file=str(g)).make_schedule()
    assert s.kind is ScheduleKind.CUSTOM and s.horizon == 19
    with pytest.raises(ConfigurationError):
        ExperimentConfig(schedule="custom").make_schedule()


def test_trial_t_uses_its_own_stream(small_problem):
    sched = Schedule(ScheduleKind.COR1)
    traces = run_trials(small_problem, "rqm", sched, 50, 3, seed=4)
    alone = run(small_problem, sched, 50, trial_stream(4, 2))
    np.testing.assert_array_equal(traces[2].objective, alone.objective)
    assert not np.array_equal(traces[0].objective, traces[1].objective)


def test_bench_outputs(data_file, tmp_path):
    out = tmp_path / "out"
    cfg = ExperimentConfig(data=str(data_file), iters=10, trials=1, out_dir=str(out), stride=5)
    summary = cmd_bench(cfg, gnuplot=True)
    assert summary.ok
    rows = list(csv.DictReader(summary.summary_csv.open()))
    assert {r["method"] for r in rows} == {"rqm-A", "rqm-B", "srsg"}
    assert all(float(r["std"]) == 0.0 for r in rows)
    long_rows = list(csv.DictReader(summary.long_csv.open()))
    assert list(long_rows[0]) == ["method", "trial", "iter", "objective"]
    assert len(long_rows) == 3 * 3
    meta = json.loads((out / "bench_meta.json").read_text())
    assert meta["config"]["iters"] == 10
    assert "plot" in (out / "bench_plot.gp").read_text()


def test_bench_std_is_unbiased(data_file, tmp_path):
    cfg = ExperimentConfig(data=str(data_file), iters=20, trials=3, out_dir=str(tmp_path), stride=10)
    summary = cmd_bench(cfg)
    long_rows = list(csv.DictReader(summary.long_csv.open()))
    vals = [float(r["objective"]) for r in long_rows if r["method"] == "srsg" and r["iter"] == "20"]
    assert len(vals) == 3
    assert summary.std["srsg"][-1] == pytest.approx(np.std(vals, ddof=1))
    assert summary.mean["srsg"][-1] == pytest.approx(np.mean(vals))


def test_bench_deterministic_serial_vs_parallel(data_file, tmp_path):
    outs = []
    for name, workers in (("a", 1), ("b", 1), ("c", 2)):
        cfg = ExperimentConfig(data=str(data_file), iters=30, trials=3, out_dir=str(tmp_path / name),
                               workers=workers)
        outs.append(cmd_bench(cfg))
    first = [outs[0].long_csv.read_bytes(), outs[0].summary_csv.read_bytes()]
    for s in outs[1:]:
        assert [s.long_csv.read_bytes(), s.summary_csv.read_bytes()] == first
