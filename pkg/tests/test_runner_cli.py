import json

import numpy as np
import pytest
import yaml

from layered_gas import InvalidArgument, MediumProfile, SolverAbort
from layered_gas.cli import EXIT_ABORT, EXIT_INVALID, EXIT_OK, main
from layered_gas.records import read_record
from layered_gas.runner import compare, run, sweep
from layered_gas.scenarios import COSINE_MEDIUM, SCENARIOS, ScenarioConfig, scenario, with_parameter

NAMES = ["motivating", "constant-background", "moderate", "large-amplitude", "smooth-ic-entropy",
         "shock-tube-sweep", "lep-refinement", "traveling-wave-compare", "random-background"]


def small_config(**kw):
    base = dict(solver="fv_euler", medium=MediumProfile.piecewise_constant(0.25, 1.75),
                ic={"kind": "gaussian_pulse", "amplitude": 0.15, "width_sq": 25.0},
                lo=-20.0, hi=20.0, dx=0.25, t_end=2.0, output_times=(0.0, 1.0, 2.0),
                frame="eulerian", bc="periodic")
    base.update(kw)
    return ScenarioConfig(**base)


# --------------------------------------------------------------------------
# configuration


def test_registry_has_all_named_scenarios():
    assert list(SCENARIOS) == NAMES


@pytest.mark.parametrize("name", NAMES)
def test_every_scenario_builds_and_validates(name):
    sc = scenario(name)
    assert sc.members
    for cfg in sc.members.values():
        cfg.validate()
        assert cfg.n_cells > 0


def test_unknown_scenario():
    with pytest.raises(InvalidArgument):
        scenario("nope")


def test_desk_and_paper_scale_differ():
    desk = scenario("motivating").members
    paper = scenario("motivating", paper_scale=True).members
    a, b = next(iter(desk.values())), next(iter(paper.values()))
    assert b.t_end > a.t_end and b.hi - b.lo > a.hi - a.lo


@pytest.mark.parametrize("change", [
    {"solver": "magic"},
    {"ic": {"kind": "vortex"}},
    {"hi": -30.0},
    {"dx": 0.0},
    {"frame": "rotating"},
    {"ic": {"kind": "gaussian_pulse", "amplitude": -1.5, "width_sq": 25.0}},
    {"output_times": (0.0, 5.0)},
    {"solver": "fv_psystem"},
    {"solver": "spectral_euler", "lo": 0.0},
])
def test_config_validation(change):
    with pytest.raises(InvalidArgument):
        small_config(**change)


def test_config_dict_round_trip():
    cfg = small_config(seed=4, options={"entropy_every": 3})
    back = ScenarioConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back.to_dict() == cfg.to_dict()
    with pytest.raises(InvalidArgument):
        ScenarioConfig.from_dict({**cfg.to_dict(), "colour": "red"})


def test_with_parameter():
    cfg = small_config()
    assert with_parameter(cfg, "dx", 0.5).dx == 0.5
    assert with_parameter(cfg, "amplitude", 0.3).ic["amplitude"] == 0.3
    assert with_parameter(cfg, "options.lep", True).options["lep"] is True
    with pytest.raises(InvalidArgument):
        with_parameter(cfg, "colour", 1)
    with pytest.raises(InvalidArgument):
        with_parameter(cfg, "seed", 3)


def test_random_scenario_seed_parameter():
    cfg = scenario("random-background").members["smooth"]
    other = with_parameter(cfg, "seed", 7)
    assert other.seed == 7
    assert not np.array_equal(other.medium.samples, cfg.medium.samples)


# --------------------------------------------------------------------------
# runs, records and emitted files


def test_run_writes_reproducible_files(tmp_path):
    cfg = small_config(options={"entropy_every": 5})
    run(cfg, tmp_path / "a")
    run(cfg, tmp_path / "b")
    csvs = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
    assert "snapshot_000.csv" in csvs and "series.csv" in csvs
    for name in csvs:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_emitted_headers_carry_provenance(tmp_path):
    run(small_config(), tmp_path)
    head = [ln for ln in (tmp_path / "snapshot_001.csv").read_text().splitlines() if ln.startswith("#")]
    keys = {ln[1:].split(":")[0].strip() for ln in head}
    assert {"config_hash", "gamma", "p_star", "v_star", "delta", "seed"} <= keys
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["snapshot_times"] == [0.0, 1.0, 2.0]
    assert "wall_time" in manifest["provenance"]


def test_record_round_trip(tmp_path):
    res = run(small_config(options={"entropy_every": 5}), tmp_path)
    back = read_record(tmp_path)
    assert len(back.snapshots) == len(res.record.snapshots)
    for a, b in zip(back.snapshots, res.record.snapshots):
        assert a.t == b.t
        np.testing.assert_array_equal(a.p, b.p)
        np.testing.assert_array_equal(a.rho, b.rho)
    np.testing.assert_array_equal(back.series_arrays("total_entropy")[1],
                                  res.record.series_arrays("total_entropy")[1])


def test_read_record_needs_manifest(tmp_path):
    with pytest.raises(InvalidArgument):
        read_record(tmp_path)


def test_solver_abort_keeps_partial_record(tmp_path):
    # the pseudospectral solver cannot pass a vacuum point of 1 + cos
    cfg = ScenarioConfig("spectral_euler", COSINE_MEDIUM,
                         {"kind": "smooth_ic", "amplitude": 0.15, "width_sq": 16.0, "ambient": 1.0},
                         -8.0, 8.0, 1 / 16, 5.0, (0.0, 1.0, 5.0), "eulerian", "periodic")
    with pytest.raises(SolverAbort) as err:
        run(cfg, tmp_path)
    assert err.value.spectrum is not None
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "aborted"
    assert manifest["snapshot_times"] == [0.0, 1.0]


def test_sweep_one_row_per_value_including_failures(tmp_path):
    cfg = small_config(t_end=0.5, output_times=(0.0, 0.5))
    results, rows = sweep(cfg, "amplitude", [0.1, -3.0, 0.2], tmp_path)
    assert [r["amplitude"] for r in rows] == [0.1, -3.0, 0.2]
    assert [r["status"] for r in rows] == ["ok", "failed", "ok"]
    assert results[1] is None
    lines = [ln for ln in (tmp_path / "summary.csv").read_text().splitlines() if not ln.startswith("#")]
    assert len(lines) == 4


def test_compare_identical_records_is_zero():
    rec = run(small_config()).record
    diffs = compare({"a": rec, "b": rec}, "a")
    assert len(diffs) == 3
    for d in diffs[1:]:
        assert d.l1 == d.l2 == d.linf == d.rel_l2 == 0.0


def test_compare_eulerian_and_lagrangian_runs_of_the_same_problem():
    eul = run(small_config(dx=0.125)).record
    lag = run(small_config(dx=0.125 * 1.0, frame="lagrangian")).record
    diffs = compare({"eul": eul, "lag": lag}, "eul", window=(-10, 10))
    assert diffs[-1].rel_l2 < 0.05


def test_compare_contract_errors():
    rec = run(small_config()).record
    other = run(small_config(lo=100.0, hi=140.0)).record
    with pytest.raises(InvalidArgument):
        compare({"a": rec}, "b")
    with pytest.raises(InvalidArgument):
        compare({"a": rec, "b": other}, "a", frame="eulerian")


# --------------------------------------------------------------------------
# command line


def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == EXIT_OK
    out = capsys.readouterr().out
    for name in NAMES:
        assert name in out


def test_cli_coeffs(capsys):
    assert main(["coeffs", "--medium", "two-phase"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["mu"] == pytest.approx(3 / 256, rel=1e-10)
    assert data["mean_Kinv"] == pytest.approx(16 / 7, rel=1e-10)


def test_cli_stability_writes_tables(tmp_path, capsys):
    assert main(["stability", "--k", "0.1,1,10", "--out", str(tmp_path)]) == EXIT_OK
    rows = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert all(r["delta4_unstable"] for r in rows)
    assert (tmp_path / "stability.csv").exists() and (tmp_path / "dispersion.csv").exists()


def test_cli_traveling_wave(tmp_path, capsys):
    path = tmp_path / "tw.csv"
    assert main(["traveling-wave", "--V", "1.0", "--n", "1024", "--out", str(path)]) == EXIT_OK
    assert "residual" in capsys.readouterr().out
    assert path.exists()


def test_cli_traveling_wave_below_sonic_speed_aborts():
    assert main(["traveling-wave", "--V", "0.7"]) == EXIT_ABORT


def test_cli_run_from_config_file(tmp_path):
    cfg = small_config(t_end=0.5, output_times=(0.0, 0.5))
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(cfg.to_dict()))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "out"), "--set", "dx=0.5"]) == EXIT_OK
    rec = read_record(tmp_path / "out")
    assert rec.config["dx"] == 0.5
    assert len(rec.snapshots) == 2


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nope"],
    ["run", "--scenario", "moderate", "--member", "nope"],
    ["run", "--scenario", "moderate", "--set", "dx"],
    ["run", "--scenario", "moderate", "--set", "colour=1"],
    ["sweep", "--scenario", "moderate", "--member", "euler"],
])
def test_cli_validation_errors(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)]) == EXIT_INVALID


def test_cli_run_reports_solver_abort(tmp_path):
    cfg = ScenarioConfig("spectral_euler", COSINE_MEDIUM,
                         {"kind": "smooth_ic", "amplitude": 0.15, "width_sq": 16.0, "ambient": 1.0},
                         -8.0, 8.0, 1 / 16, 5.0, (0.0, 5.0), "eulerian", "periodic")
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == EXIT_ABORT


def test_cli_compare(tmp_path, capsys):
    cfg = small_config(t_end=0.5, output_times=(0.0, 0.5))
    run(cfg, tmp_path / "ref")
    run(with_parameter(cfg, "dx", 0.125), tmp_path / "fine")
    assert main(["compare", str(tmp_path / "fine"), "--reference", str(tmp_path / "ref"),
                 "--frame", "eulerian", "--out", str(tmp_path / "cmp")]) == EXIT_OK
    assert "fine t=0.5" in capsys.readouterr().out
    assert (tmp_path / "cmp" / "differences.csv").exists()
