import math

import pytest

from reusesim.cli import (
    CONFIG_SCHEMA,
    SUMMARY_HEADER,
    TASKS_HEADER,
    ConfigError,
    apply_overrides,
    build_config,
    main,
    parse_config_file,
)
from reusesim.sim import Mode

MINIMAL = "mode = edge_with_reuse\nworkload.num_tasks = 40\n"


def write_config(tmp_path, text=MINIMAL, name="exp.conf"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def parse_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    assert all(len(r) == len(header) for r in rows)
    return header, rows


def test_config_defaults_and_parse(tmp_path):
    cfg = parse_config_file(
        write_config(
            tmp_path,
            "mode = cloud_only\n"
            "# comment line\n"
            "cost.edge_bandwidth = 50  # inline comment\n"
            "workload.input_size_range = 1, 2\n"
            "store.capacity = none\n",
        )
    )
    config = build_config(cfg)
    assert config.mode is Mode.CLOUD_ONLY
    assert config.cost.edge_bandwidth == 50.0
    assert config.workload.input_size_range == (1.0, 2.0)
    assert config.store.capacity is None
    assert config.edge_slots == 15  # default


def test_config_missing_mode(tmp_path):
    with pytest.raises(ConfigError, match="mode"):
        build_config(parse_config_file(write_config(tmp_path, "seed = 1\n")))


def test_config_unknown_field(tmp_path):
    with pytest.raises(ConfigError, match="unknown field"):
        parse_config_file(write_config(tmp_path, "mode = cloud_only\nnope = 1\n"))


def test_config_bad_value(tmp_path):
    with pytest.raises(ConfigError, match="cost.edge_bandwidth"):
        build_config(
            parse_config_file(
                write_config(tmp_path, "mode = cloud_only\ncost.edge_bandwidth = x\n")
            )
        )


def test_config_invalid_mode_lists_choices(tmp_path):
    with pytest.raises(ConfigError, match="edge_with_reuse"):
        build_config(parse_config_file(write_config(tmp_path, "mode = turbo\n")))


def test_overrides():
    raw = apply_overrides({"mode": "cloud_only"}, ["seed=7", "edge_slots = 3"])
    config = build_config(raw)
    assert config.seed == 7 and config.edge_slots == 3
    with pytest.raises(ConfigError):
        apply_overrides({}, ["bad-override"])
    with pytest.raises(ConfigError):
        apply_overrides({}, ["unknown.key=1"])


def test_run_writes_expected_files(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "-c", str(cfg), "-d", str(out)]) == 0
    assert (out / "tasks.csv").exists() and (out / "summary.csv").exists()
    printed = capsys.readouterr().out
    assert "edge_with_reuse" in printed

    header, rows = parse_csv(out / "tasks.csv")
    assert ",".join(header) == TASKS_HEADER
    assert len(rows) == 40
    for row in rows:
        assert row[4] in ("edge", "cloud")
        assert row[11] in ("true", "false")
        for col in (5, 6, 7, 8, 9, 10):
            assert math.isfinite(float(row[col]))

    sheader, srows = parse_csv(out / "summary.csv")
    assert ",".join(sheader) == SUMMARY_HEADER
    assert len(srows) == 10  # trials defaults to 10
    assert {r[0] for r in srows} == {"edge_with_reuse"}
    assert [r[3] for r in srows] == [str(i) for i in range(10)]


def test_run_missing_mode_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, "seed = 1\n")
    assert main(["run", "-c", str(cfg), "-d", str(tmp_path / "o")]) == 1
    assert "mode" in capsys.readouterr().err


def test_run_missing_config_file(tmp_path, capsys):
    rc = main(["run", "-c", str(tmp_path / "absent.conf"), "-d", str(tmp_path)])
    assert rc == 1


def test_run_unwritable_outdir(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory", encoding="utf-8")
    cfg = write_config(tmp_path)
    rc = main(["run", "-c", str(cfg), "-d", str(blocker / "sub")])
    assert rc == 2


def test_run_deterministic_bytes(tmp_path):
    cfg = write_config(tmp_path, MINIMAL + "trials = 2\n")
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["run", "-c", str(cfg), "-d", str(out1)]) == 0
    assert main(["run", "-c", str(cfg), "-d", str(out2)]) == 0
    for name in ("tasks.csv", "summary.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_run_with_overrides_changes_output(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "-c", str(cfg), "-d", str(out1)]) == 0
    assert main(["run", "-c", str(cfg), "--set", "seed=7", "-d", str(out2)]) == 0
    assert (out1 / "tasks.csv").read_bytes() != (out2 / "tasks.csv").read_bytes()


def test_run_ingests_feature_dump(tmp_path):
    dump = tmp_path / "features.csv"
    dump.write_text("a,1.0,2.0\nb,3.0,4.0\na,1.0,2.1\n", encoding="utf-8")
    cfg = write_config(
        tmp_path,
        "mode = edge_with_reuse\n"
        f"features_file = {dump}\n"
        "workload.dimension = 2\n",
    )
    out = tmp_path / "out"
    assert main(["run", "-c", str(cfg), "-d", str(out)]) == 0
    header, rows = parse_csv(out / "tasks.csv")
    assert [r[2] for r in rows] == ["a", "b", "a"]


def test_sweep_row_counts(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "completion", "-d", str(out), "--trials", "2"]) == 0
    header, rows = parse_csv(out / "sweep_completion.csv")
    assert ",".join(header) == SUMMARY_HEADER
    trial_rows = [r for r in rows if r[3] != "p90"]
    p90_rows = [r for r in rows if r[3] == "p90"]
    assert len(trial_rows) == 3 * 10 * 2  # modes x n-grid x trials
    assert len(p90_rows) == 3 * 10
    reuse_rows = [r for r in trial_rows if r[0] == "edge_with_reuse"]
    assert all(r[12] != "" and r[13] != "" for r in reuse_rows)
    cloud_rows = [r for r in trial_rows if r[0] == "cloud_only"]
    assert all(r[12] == "" and r[13] == "" for r in cloud_rows)


def test_sweep_unknown_scenario(tmp_path, capsys):
    assert main(["sweep", "nonsense", "-d", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    for name in ("completion", "computation", "waiting", "utilization", "load", "gain"):
        assert name in err


def test_sweep_deterministic_bytes(tmp_path):
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert main(["sweep", "gain", "-d", str(out1), "--trials", "2"]) == 0
    assert main(["sweep", "gain", "-d", str(out2), "--trials", "2"]) == 0
    assert (out1 / "sweep_gain.csv").read_bytes() == (out2 / "sweep_gain.csv").read_bytes()


def test_bench_lsh_rows_and_sublinear_growth(tmp_path):
    out = tmp_path / "bench"
    rc = main(
        ["bench-lsh", "-n", "1000,10000,100000", "-d", str(out), "--queries", "100"]
    )
    assert rc == 0
    header, rows = parse_csv(out / "bench_lsh.csv")
    assert header == ["n", "queries", "mean_query_ms", "mean_candidates"]
    assert [int(r[0]) for r in rows] == [1000, 10000, 100000]
    t_small = float(rows[0][2])
    t_large = float(rows[2][2])
    assert t_large / t_small < 100.0  # clustered data: clearly sublinear scan


def test_bench_lsh_empty_n(tmp_path, capsys):
    assert main(["bench-lsh", "-n", "", "-d", str(tmp_path)]) == 1


def test_calibrate_prints_thresholds(capsys):
    assert main(["calibrate", "--samples", "500"]) == 0
    out = capsys.readouterr().out
    assert "tau_full" in out and "tau_partial" in out


def test_schema_covers_all_fields():
    # every dotted section the README documents exists in the schema
    prefixes = {k.split(".")[0] for k in CONFIG_SCHEMA if "." in k}
    assert prefixes == {"cost", "store", "lsh", "workload"}
