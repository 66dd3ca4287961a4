"""Config parsing, replication plumbing, experiment checks, and output files."""

import filecmp
import json
import math
import os

import numpy as np
import pytest

from randop import (
    ConfigError,
    ExperimentConfig,
    ExperimentReport,
    NumericalError,
    ProcessSpec,
    Window,
    config_from_dict,
    load_config,
    replication_seed,
    run_campbell,
    run_experiment,
    run_widths,
    write_outputs,
)
from randop.experiments import (
    EXPERIMENTS,
    _mean_se,
    _require_finite,
    _sanitize,
    format_value,
)


def _campbell_doc(**overrides):
    doc = {
        "experiment": "campbell",
        "process": {"kind": "poisson", "intensity": 2.0},
        "window": [-20.0, 20.0],
        "replications": 10,
        "master_seed": 2026,
        "variance": 1.0,
        "probes": [0.0, 0.5],
    }
    doc.update(overrides)
    return doc


def _write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestConfigParsing:
    def test_round_trip_echo(self):
        cfg = config_from_dict(_campbell_doc())
        doc = cfg.to_dict()
        assert doc["experiment"] == "campbell"
        assert doc["process"] == {"kind": "poisson", "intensity": 2.0}
        assert doc["window"] == [-20.0, 20.0]
        assert doc["probes"] == [0.0, 0.5]
        assert doc["master_seed"] == 2026

    def test_experiment_from_argument_only(self):
        doc = _campbell_doc()
        del doc["experiment"]
        cfg = config_from_dict(doc, experiment="campbell")
        assert cfg.experiment == "campbell"

    def test_experiment_name_mismatch(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(), experiment="nuclear")

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(typo=1))

    def test_key_from_other_experiment_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(interval=[-1.0, 1.0]))

    def test_unknown_process_key(self):
        doc = _campbell_doc(process={"kind": "poisson", "intensity": 2.0, "rate": 1.0})
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_process_kind_parameter_mismatch(self):
        doc = _campbell_doc(process={"kind": "lattice", "intensity": 2.0})
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_bool_is_not_a_number(self):
        doc = _campbell_doc(process={"kind": "poisson", "intensity": True})
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_missing_required_keys(self):
        for key in ("process", "window", "replications", "master_seed", "variance"):
            doc = _campbell_doc()
            del doc[key]
            with pytest.raises(ConfigError):
                config_from_dict(doc)

    def test_replications_must_be_positive_integer(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(replications=0))
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(replications=2.5))

    def test_master_seed_range(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(master_seed=-1))
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(master_seed=2**64))
        cfg = config_from_dict(_campbell_doc(master_seed=2**64 - 1))
        assert cfg.master_seed == 2**64 - 1

    def test_overrides_win(self):
        cfg = config_from_dict(_campbell_doc(), seed_override=7, reps_override=3)
        assert cfg.master_seed == 7
        assert cfg.replications == 3

    def test_probes_default(self):
        doc = _campbell_doc()
        del doc["probes"]
        cfg = config_from_dict(doc)
        assert cfg.probes == (0.0,)

    def test_probe_entries_must_be_numbers(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(probes=["zero"]))
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(probes=[]))

    def test_target_parsing(self):
        doc = {
            "experiment": "muntz",
            "process": {"kind": "poisson", "intensity": 2.0},
            "window": [-8.0, 8.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "interval": [-5.0, 5.0],
            "target": {
                "atoms": [
                    {"type": "bump", "center": 0.0, "variance": 0.5, "coefficient": 2.0},
                    {"type": "indicator", "lo": 0.3, "hi": 0.7},
                ]
            },
        }
        cfg = config_from_dict(doc)
        assert len(cfg.target.atoms) == 2
        assert cfg.target.atoms[1].coefficient == 1.0
        assert cfg.ordering == "by-distance-to-interval-center"

    @pytest.mark.parametrize(
        "atom",
        [
            {"type": "step", "lo": 0.0, "hi": 1.0},
            {"type": "bump", "center": 0.0, "variance": 0.5, "width": 2.0},
            {"type": "bump", "center": 0.0, "variance": -1.0},
            {"type": "bump", "center": 0.0, "variance": 0.5, "coefficient": "big"},
            {"type": "indicator", "lo": 1.0},
        ],
    )
    def test_bad_target_atoms(self, atom):
        doc = {
            "experiment": "muntz",
            "process": {"kind": "poisson", "intensity": 2.0},
            "window": [-8.0, 8.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "interval": [-5.0, 5.0],
            "target": {"atoms": [atom]},
        }
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_interval_must_fit_window(self):
        doc = {
            "experiment": "nuclear",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-2.0, 2.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "interval": [-3.0, 3.0],
        }
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_x_grid_validation(self):
        base = {
            "experiment": "divergence",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [0.0, 100.0],
            "replications": 2,
            "master_seed": 1,
        }
        with pytest.raises(ConfigError):
            config_from_dict({**base, "x_grid": [10.0, 5.0]})
        with pytest.raises(ConfigError):
            config_from_dict({**base, "x_grid": [0.5, 5.0]})  # below 1 for divergence
        with pytest.raises(ConfigError):
            config_from_dict({**base, "x_grid": ["ten"]})
        with pytest.raises(ConfigError):
            config_from_dict({**base, "x_grid": []})
        cfg = config_from_dict({**base, "x_grid": [1.0, 10.0]})
        assert cfg.x_grid == (1.0, 10.0)

    def test_n_grid_validation(self):
        base = {
            "experiment": "norm-growth",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-300.0, 300.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
        }
        with pytest.raises(ConfigError):
            config_from_dict({**base, "n_grid": [4, 4]})
        with pytest.raises(ConfigError):
            config_from_dict({**base, "n_grid": [2, 4]})  # below 3
        with pytest.raises(ConfigError):
            config_from_dict({**base, "n_grid": [4.5, 8]})  # not an integer
        cfg = config_from_dict({**base, "n_grid": [4, 16]})
        assert cfg.n_grid == (4, 16)

    def test_ordering_validation(self):
        doc = {
            "experiment": "muntz",
            "process": {"kind": "poisson", "intensity": 2.0},
            "window": [-8.0, 8.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "interval": [-5.0, 5.0],
            "target": {"atoms": [{"type": "indicator", "lo": 0.0, "hi": 1.0}]},
            "ordering": "by-index",
        }
        assert config_from_dict(doc).ordering == "by-index"
        doc["ordering"] = "random"
        with pytest.raises(ConfigError):
            config_from_dict(doc)

    def test_tail_tol_validation(self):
        doc = {
            "experiment": "nuclear",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-5.0, 5.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "interval": [-2.0, 2.0],
        }
        assert config_from_dict(doc).tail_tol == 1e-30
        assert config_from_dict({**doc, "tail_tol": 1e-12}).tail_tol == 1e-12
        with pytest.raises(ConfigError):
            config_from_dict({**doc, "tail_tol": 0.0})
        with pytest.raises(ConfigError):
            config_from_dict({**doc, "tail_tol": 2.0})

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError):
            config_from_dict(_campbell_doc(experiment="mystery"))
        with pytest.raises(ConfigError):
            config_from_dict({"process": {"kind": "poisson", "intensity": 1.0}})

    def test_experiment_registry(self):
        assert EXPERIMENTS == (
            "campbell",
            "divergence",
            "frame-bound",
            "muntz",
            "norm-growth",
            "nuclear",
            "sample",
            "spectrum",
            "widths",
        )


class TestLoadConfig:
    def test_reads_json_file(self, tmp_path):
        path = _write_config(tmp_path, _campbell_doc())
        cfg = load_config(path)
        assert cfg.experiment == "campbell"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "absent.json"))

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(str(path))


class TestReplicationSeeds:
    def test_pinned_values(self):
        assert replication_seed(2026, 0) == 3339473683144027492
        assert replication_seed(2026, 1) == 12896123018795801922
        assert replication_seed(0, 0) == 8668861027912758289

    def test_distinct_across_replications(self):
        seeds = {replication_seed(42, r) for r in range(200)}
        assert len(seeds) == 200

    def test_independent_of_history(self):
        # seed for replication 7 does not depend on having drawn 0..6
        assert replication_seed(9, 7) == replication_seed(9, 7)


class TestStatisticsHelpers:
    def test_mean_se_fixture(self):
        mean, se = _mean_se([1.0, 2.0, 3.0, 4.0, 10.0])
        assert mean == 4.0
        assert se == 1.5811388300841895  # sqrt(12.5) / sqrt(5), as np.std rounds it

    def test_single_value_has_zero_se(self):
        mean, se = _mean_se([3.5])
        assert mean == 3.5
        assert se == 0.0

    def test_require_finite(self):
        _require_finite("ok", [1.0, 2.0])
        _require_finite("empty", [])
        with pytest.raises(NumericalError):
            _require_finite("bad", [1.0, math.nan])
        with pytest.raises(NumericalError):
            _require_finite("bad", [math.inf])

    def test_sanitize(self):
        doc = _sanitize(
            {
                "a": np.float64(1.5),
                "b": np.int64(3),
                "c": np.bool_(True),
                "d": math.nan,
                "e": [np.float64(2.0), math.inf],
                "f": np.array([1.0, 2.0]),
            }
        )
        assert doc == {"a": 1.5, "b": 3, "c": True, "d": None, "e": [2.0, None], "f": [1.0, 2.0]}
        with pytest.raises(TypeError):
            _sanitize(object())

    def test_format_value(self):
        assert format_value(0.1) == "0.10000000000000001"
        assert format_value(1.0) == "1"
        assert format_value(-2.5) == "-2.5"
        assert format_value(7) == "7"
        assert format_value(np.int64(7)) == "7"
        assert format_value(True) == "1"
        assert format_value(False) == "0"
        assert format_value(float("nan")) == "nan"
        # 17 significant digits reproduce the double exactly
        assert float(format_value(math.pi)) == math.pi


class TestRunners:
    def test_campbell_poisson_report(self):
        cfg = config_from_dict(_campbell_doc(replications=200))
        report = run_experiment(cfg)
        assert report.experiment == "campbell"
        assert report.checks["mean_within_4se"]
        stats = report.statistics["shift_sum"]
        assert [entry["probe"] for entry in stats] == [0.0, 0.5]
        for entry in stats:
            assert entry["theory"] == 2.0
        columns, rows = report.tables["campbell.csv"]
        assert columns == ("replication", "probe", "value")
        assert len(rows) == 200 * 2

    def test_campbell_lattice_riemann_sum(self):
        doc = _campbell_doc(process={"kind": "lattice", "spacing": 0.5}, replications=20)
        report = run_experiment(config_from_dict(doc))
        assert report.checks["mean_within_4se"]
        mean = report.statistics["shift_sum"][0]["mean"]
        assert abs(mean - 2.0) <= 1e-8

    def test_divergence_matches_log(self):
        doc = {
            "experiment": "divergence",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [0.0, 200.0],
            "replications": 300,
            "master_seed": 11,
            "x_grid": [10.0, 100.0, 200.0],
        }
        report = run_experiment(config_from_dict(doc))
        assert report.passed
        per_x = report.statistics["reciprocal_sum"]
        assert per_x[1]["theory"] == math.log(100.0)
        means = [entry["mean"] for entry in per_x]
        assert means[0] < means[1] < means[2]

    def test_nuclear_theory_and_identity(self):
        doc = {
            "experiment": "nuclear",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-20.0, 21.0],
            "replications": 400,
            "master_seed": 5,
            "variance": 1.0,
            "interval": [0.0, 1.0],
        }
        report = run_experiment(config_from_dict(doc))
        assert report.passed
        assert report.statistics["trace"]["theory"] == 0.28209479177387814
        assert report.statistics["max_identity_gap"] <= 1e-9

    def test_frame_bound_respected(self):
        doc = {
            "experiment": "frame-bound",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-25.0, 25.0],
            "replications": 200,
            "master_seed": 3,
            "variance": 1.0,
            "target": {"atoms": [{"type": "indicator", "lo": 0.0, "hi": 1.0}]},
        }
        report = run_experiment(config_from_dict(doc))
        assert report.checks["bound_respected"]
        assert report.statistics["frame_sum"]["bound"] == 1.0  # rate 1 * norm^2 1

    def test_frame_bound_zero_target_rejected(self):
        doc = {
            "experiment": "frame-bound",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-25.0, 25.0],
            "replications": 2,
            "master_seed": 3,
            "variance": 1.0,
            "target": {"atoms": [{"type": "indicator", "lo": 0.0, "hi": 0.0}]},
        }
        with pytest.raises(ConfigError):
            run_experiment(config_from_dict(doc))

    def test_muntz_zero_target_on_interval_rejected(self):
        doc = {
            "experiment": "muntz",
            "process": {"kind": "poisson", "intensity": 2.0},
            "window": [-8.0, 8.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "interval": [-5.0, 5.0],
            "target": {"atoms": [{"type": "indicator", "lo": 6.0, "hi": 7.0}]},
        }
        with pytest.raises(ConfigError):
            run_experiment(config_from_dict(doc))

    def test_norm_growth_window_too_small(self):
        doc = {
            "experiment": "norm-growth",
            "process": {"kind": "poisson", "intensity": 1.0},
            "window": [-10.0, 10.0],
            "replications": 2,
            "master_seed": 1,
            "variance": 1.0,
            "n_grid": [4, 8],  # needs +-(8 + 12)
        }
        with pytest.raises(ConfigError):
            run_experiment(config_from_dict(doc))

    def test_sample_table_schema(self):
        doc = {
            "experiment": "sample",
            "process": {"kind": "lattice", "spacing": 1.0},
            "window": [0.0, 10.0],
            "replications": 3,
            "master_seed": 4,
        }
        report = run_experiment(config_from_dict(doc))
        assert report.checks["mean_count_within_4se"]
        columns, rows = report.tables["sample.csv"]
        assert columns == ("replication", "index", "position", "weight")
        assert len(rows) == 30
        assert all(w == 1.0 for _, _, _, w in rows)

    def test_spectrum_report(self):
        doc = {
            "experiment": "spectrum",
            "process": {"kind": "poisson", "intensity": 2.0},
            "window": [-8.0, 8.0],
            "replications": 5,
            "master_seed": 6,
            "variance": 1.0,
            "interval": [-3.0, 3.0],
        }
        report = run_experiment(config_from_dict(doc))
        assert report.checks["nuclear_equals_trace"]
        columns, rows = report.tables["spectrum.csv"]
        assert columns == ("replication", "index", "eigenvalue")
        # eigenvalues descending within each replication
        for r in range(5):
            values = [v for rr, _, v in rows if rr == r]
            assert values == sorted(values, reverse=True)

    def test_runtime_recorded(self):
        report = run_experiment(config_from_dict(_campbell_doc(replications=2)))
        assert report.runtime_seconds > 0.0
        doc = report.as_json()
        assert set(doc) == {"experiment", "config", "statistics", "checks", "metadata"}
        assert doc["metadata"]["replications"] == 2
        assert doc["metadata"]["master_seed"] == 2026

    def test_named_runner_matches_dispatch(self):
        cfg = config_from_dict(_campbell_doc(replications=3))
        named = run_campbell(cfg)
        dispatched = run_experiment(cfg)
        assert isinstance(named, ExperimentReport)
        assert named.statistics == dispatched.statistics
        assert named.checks == dispatched.checks
        assert named.tables == dispatched.tables

    def test_named_runner_rejects_other_experiment(self):
        cfg = config_from_dict(_campbell_doc(replications=2))
        with pytest.raises(ConfigError, match="campbell"):
            run_widths(cfg)


class TestDeterminism:
    def _widths_cfg(self):
        return config_from_dict(
            {
                "experiment": "widths",
                "process": {"kind": "poisson", "intensity": 1.0},
                "window": [-12.0, 12.0],
                "replications": 6,
                "master_seed": 99,
                "variance": 1.0,
                "interval": [-3.0, 3.0],
                "x_grid": [3.0, 6.0],
            }
        )

    def _strip_runtime(self, path):
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        doc["metadata"].pop("runtime_seconds")
        return doc

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = self._widths_cfg()
        dirs = [str(tmp_path / "a"), str(tmp_path / "b")]
        for out in dirs:
            write_outputs(run_experiment(cfg), out)
        names = sorted(os.listdir(dirs[0]))
        assert names == sorted(os.listdir(dirs[1]))
        for name in names:
            if name.endswith(".csv"):
                assert filecmp.cmp(os.path.join(dirs[0], name), os.path.join(dirs[1], name), shallow=False)
        assert self._strip_runtime(os.path.join(dirs[0], "report.json")) == self._strip_runtime(
            os.path.join(dirs[1], "report.json")
        )

    def test_parallel_matches_serial(self, tmp_path):
        cfg = self._widths_cfg()
        serial_dir = str(tmp_path / "serial")
        parallel_dir = str(tmp_path / "parallel")
        write_outputs(run_experiment(cfg, workers=1), serial_dir)
        write_outputs(run_experiment(cfg, workers=4), parallel_dir)
        for name in sorted(os.listdir(serial_dir)):
            if name.endswith(".csv"):
                assert filecmp.cmp(
                    os.path.join(serial_dir, name), os.path.join(parallel_dir, name), shallow=False
                )
        assert self._strip_runtime(os.path.join(serial_dir, "report.json")) == self._strip_runtime(
            os.path.join(parallel_dir, "report.json")
        )

    def test_seed_changes_output(self):
        cfg = self._widths_cfg()
        other = config_from_dict({**json.loads(json.dumps(cfg.to_dict())), "master_seed": 100})
        a = run_experiment(cfg).tables["widths.csv"][1]
        b = run_experiment(other).tables["widths.csv"][1]
        assert a != b


class TestWriteOutputs:
    def test_files_and_formats(self, tmp_path):
        report = run_experiment(config_from_dict(_campbell_doc(replications=3)))
        out = str(tmp_path / "out")
        write_outputs(report, out)
        assert sorted(os.listdir(out)) == ["campbell.csv", "report.json"]
        with open(os.path.join(out, "campbell.csv"), encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "replication,probe,value"
        assert len(lines) == 1 + 3 * 2
        # float cells hold 17 significant digits and parse back exactly
        _, _, value = lines[1].split(",")
        raw = report.tables["campbell.csv"][1][0][2]
        assert float(value) == raw
        with open(os.path.join(out, "report.json"), encoding="utf-8") as fh:
            doc = json.load(fh)
        assert doc["experiment"] == "campbell"
        assert doc["checks"]["mean_within_4se"] in (True, False)

    def test_creates_nested_directory(self, tmp_path):
        report = run_experiment(config_from_dict(_campbell_doc(replications=2)))
        out = str(tmp_path / "deep" / "nested")
        write_outputs(report, out)
        assert os.path.exists(os.path.join(out, "report.json"))
