import json
import shutil

import numpy as np
import pandas as pd
import pytest

from arum_consideration import __version__
from arum_consideration.analyses import AnalysisResult, emit_plot_data
from arum_consideration.cli import main, run_scenario
from arum_consideration.config import Config, load_config
from arum_consideration.core import ArithmeticMode
from arum_consideration.errors import UnsupportedAnalysisError
from arum_consideration.report_writer import MANIFEST_NAME, hash_bytes
from arum_consideration.scenario import AnalysisSpec

from .conftest import GOLDEN_DIR, REFERENCE_SCENARIO_DIR

EXPECTED_FILES = {
    "identify.csv", "identify.json",
    "attention.csv", "attention.json", "attention_plot.csv",
    "welfare.csv", "welfare.json", "welfare_plot.csv",
    "equivalence.csv", "equivalence.json",
    "diagnostics.csv", "diagnostics.json", "diagnostics_plot.csv",
    "discontinuity.csv", "discontinuity.json", "discontinuity_plot.csv",
    "counterfactual.csv", "counterfactual.json",
    "simulate.csv", "simulate.json",
}

SINGLE_ATOM_ARUM = {"class": "arum", "K": 2, "atoms": [{"eps": [0, "0.5"], "w": 1}]}
REFERENCE_POINTS = [[-1, -1], [-1, 1], [1, -1], [1, 1]]

GOLDEN_REFERENCE = GOLDEN_DIR / "reference"
# Float cells come from quadrature and are compared with a tolerance.
FLOAT_GOLDENS = {"welfare.csv": ("path_integral", "discrepancy")}
EXACT_GOLDENS = sorted(p.name for p in GOLDEN_REFERENCE.iterdir() if p.name not in FLOAT_GOLDENS)


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("ARUM_OUTPUT_DIR", "ARUM_ARITHMETIC", "ARUM_WORKERS", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return tmp_path


@pytest.fixture
def reference_run(workspace):
    scenario_dir = workspace / "reference"
    shutil.copytree(REFERENCE_SCENARIO_DIR, scenario_dir)
    output = workspace / "out"
    code = main(["run", str(scenario_dir / "scenario.json"), "--output-dir", str(output), "-q"])
    assert code == 0
    return scenario_dir, output


def _write_scenario(directory, **fields):
    data = {"schema_version": 1, "name": "case"}
    data.update(fields)
    path = directory / "scenario.json"
    path.write_text(json.dumps(data))
    return path


def _run(path, *extra):
    return main(["run", str(path), "-q", *extra])


class TestReferenceRun:
    def test_writes_every_artifact(self, reference_run):
        _, output = reference_run
        written = {p.name for p in output.iterdir()}
        assert written == EXPECTED_FILES | {MANIFEST_NAME}

    @pytest.mark.parametrize("name", EXACT_GOLDENS)
    def test_golden_artifacts(self, reference_run, name):
        _, output = reference_run
        assert (output / name).read_bytes() == (GOLDEN_REFERENCE / name).read_bytes()

    @pytest.mark.parametrize("name", sorted(FLOAT_GOLDENS))
    def test_golden_float_tables(self, reference_run, name):
        _, output = reference_run
        actual = pd.read_csv(output / name, dtype=str)
        expected = pd.read_csv(GOLDEN_REFERENCE / name, dtype=str)
        assert list(actual.columns) == list(expected.columns)
        float_columns = FLOAT_GOLDENS[name]
        exact_columns = [c for c in expected.columns if c not in float_columns]
        pd.testing.assert_frame_equal(actual[exact_columns], expected[exact_columns])
        for column in float_columns:
            np.testing.assert_allclose(
                actual[column].astype(float), expected[column].astype(float), rtol=0, atol=1e-12
            )

    def test_manifest_matches_goldens(self, reference_run):
        _, output = reference_run
        manifest = json.loads((output / MANIFEST_NAME).read_text())
        hashes = {entry["path"]: entry["sha256"] for entry in manifest["files"]}
        for name in EXACT_GOLDENS:
            assert hashes[name] == hash_bytes((GOLDEN_REFERENCE / name).read_bytes())
        assert manifest["version"] == __version__
        assert len(manifest["inputs_hash"]) == 16

    def test_welfare_table(self, reference_run):
        _, output = reference_run
        frame = pd.read_csv(output / "welfare.csv", dtype=str)
        assert list(frame["exact"]) == ["0.9", "1.2"]
        assert float(frame["path_integral"][0]) == pytest.approx(0.9, abs=1e-12)
        assert float(frame["path_integral"][1]) == pytest.approx(1.2, abs=1e-12)
        assert list(frame["breakpoints"]) == ["1", "0"]

        payload = json.loads((output / "welfare.json").read_text())
        assert payload["attention_welfare"]["set"] == "[0, inf)"
        witness = payload["attention_welfare"]["witness"]
        assert (witness["shift"], witness["gamma"], witness["achieved_gain"]) == ("10", "0.4", "5")

        plot = pd.read_csv(output / "welfare_plot.csv")
        assert list(plot.columns) == ["t", "integrand"]
        assert len(plot) == 65

    def test_counterfactual_table(self, reference_run):
        _, output = reference_run
        frame = pd.read_csv(output / "counterfactual.csv", dtype=str)
        assert list(frame["model_class"]) == ["arum", "arum_e", "arum_cs"]
        assert set(frame["lower"]) == set(frame["upper"]) == {"0.6"}
        assert list(frame["family_size"]) == ["14", "24", "24"]
        payload = json.loads((output / "counterfactual.json").read_text())
        assert payload["arum_within_arum_e"] is True

    def test_other_payloads(self, reference_run):
        _, output = reference_run
        assert json.loads((output / "equivalence.json").read_text())["passed"] is True
        identify = json.loads((output / "identify.json").read_text())
        assert identify["model_consideration_prob"] == {"0": "0.6", "1": "1"}
        discontinuity = pd.read_csv(output / "discontinuity.csv", dtype=str)
        assert set(discontinuity["width"]) == {"0.4"}
        simulate = json.loads((output / "simulate.json").read_text())
        assert simulate["seed"] == 20240101
        assert simulate["all_within_4se"] is True

    def test_manifest(self, reference_run):
        _, output = reference_run
        manifest = json.loads((output / MANIFEST_NAME).read_text())
        assert manifest["scenario"] == "reference"
        assert manifest["arithmetic"] == "rational"
        assert manifest["seed"] == 20240101
        paths = [entry["path"] for entry in manifest["files"]]
        assert paths == sorted(EXPECTED_FILES)
        for entry in manifest["files"]:
            assert entry["sha256"] == hash_bytes((output / entry["path"]).read_bytes())

    def test_rerun_is_byte_identical(self, reference_run):
        scenario_dir, output = reference_run
        before = {p.name: p.read_bytes() for p in output.iterdir()}
        stats = run_scenario(
            scenario_dir / "scenario.json",
            Config(command="run", scenario_path=scenario_dir / "scenario.json", output_dir=output),
        )
        assert stats.files_written == 0
        assert stats.files_unchanged == len(EXPECTED_FILES)
        assert {p.name: p.read_bytes() for p in output.iterdir()} == before

    def test_scenario_output_dir(self, workspace):
        scenario_dir = workspace / "reference"
        shutil.copytree(REFERENCE_SCENARIO_DIR, scenario_dir)
        assert _run(scenario_dir / "scenario.json") == 0
        assert (scenario_dir / "output" / "identify.csv").exists()


class TestSettings:
    def test_env_output_dir(self, workspace, monkeypatch):
        monkeypatch.setenv("ARUM_OUTPUT_DIR", str(workspace / "from-env"))
        path = _write_scenario(
            workspace, model=SINGLE_ATOM_ARUM, grid={"points": REFERENCE_POINTS}, analyses=[{"type": "identify"}]
        )
        assert _run(path) == 0
        assert (workspace / "from-env" / "identify.csv").exists()

    def test_cli_beats_scenario(self, workspace):
        path = _write_scenario(
            workspace,
            model=SINGLE_ATOM_ARUM,
            grid={"points": REFERENCE_POINTS},
            analyses=[{"type": "identify"}],
            output_dir="scenario-out",
            seed=3,
        )
        assert _run(path, "--output-dir", str(workspace / "cli-out"), "--seed", "9") == 0
        manifest = json.loads((workspace / "cli-out" / MANIFEST_NAME).read_text())
        assert manifest["seed"] == 9
        assert not (workspace / "scenario-out").exists()

    def test_float_arithmetic(self, workspace):
        model = {
            "class": "arum_cs",
            "K": 2,
            "atoms": [
                {"eps": ["0.5", "0"], "S": [0, 1], "w": "0.6"},
                {"eps": ["0.5", "0"], "S": [1], "w": "0.4"},
            ],
        }
        path = _write_scenario(
            workspace, model=model, grid={"points": REFERENCE_POINTS}, analyses=[{"type": "identify", "k": 0}]
        )
        assert _run(path, "--arithmetic", "float", "--output-dir", str(workspace / "out")) == 0
        frame = pd.read_csv(workspace / "out" / "identify.csv")
        assert frame["sup_pk"][0] == pytest.approx(0.6)
        manifest = json.loads((workspace / "out" / MANIFEST_NAME).read_text())
        assert manifest["arithmetic"] == "float"

    def test_env_arithmetic_default(self, workspace, monkeypatch):
        monkeypatch.setenv("ARUM_ARITHMETIC", "float")
        monkeypatch.setenv("ARUM_WORKERS", "3")
        config = load_config(["run", "scenario.json"])
        assert config.default_arithmetic == ArithmeticMode.FLOAT
        assert config.workers == 3
        assert config.arithmetic is None

    def test_run_needs_scenario(self, workspace):
        with pytest.raises(SystemExit):
            load_config(["run"])

    @pytest.mark.parametrize("workers", ["many", "2.5", "0"])
    def test_bad_env_workers(self, workspace, monkeypatch, capsys, workers):
        monkeypatch.setenv("ARUM_WORKERS", workers)
        with pytest.raises(SystemExit) as info:
            load_config(["run", "scenario.json"])
        assert info.value.code == 2
        assert "ARUM_WORKERS" in capsys.readouterr().err


class TestCommands:
    def test_validate_writes_nothing(self, workspace):
        path = _write_scenario(
            workspace, model=SINGLE_ATOM_ARUM, grid={"points": REFERENCE_POINTS}, analyses=[{"type": "identify"}]
        )
        assert main(["validate", str(path), "-q"]) == 0
        assert not (workspace / "arum-output").exists()

    def test_welfare_witness_from_arum(self, workspace):
        model = {"class": "arum", "K": 2, "atoms": [{"eps": [0, "0.5"], "w": "0.5"}, {"eps": [0, 5], "w": "0.5"}]}
        analysis = {"type": "welfare", "paths": [{"u": [0, 0], "u_tilde": ["0.9", 0]}], "k": 0, "c": 10}
        path = _write_scenario(workspace, model=model, grid={"points": REFERENCE_POINTS}, analyses=[analysis])
        assert _run(path, "--output-dir", str(workspace / "out")) == 0
        payload = json.loads((workspace / "out" / "welfare.json").read_text())
        witness = payload["attention_welfare"]["witness"]
        assert (witness["gamma"], witness["achieved_gain"], witness["field_unchanged"]) == ("0.5", "5", "true")

    def test_schema(self, workspace, capsys):
        assert main(["schema", "-q"]) == 0
        schema = json.loads(capsys.readouterr().out)
        assert "analyses" in schema["required"]
        assert "counterfactual" in schema["properties"]["analyses"]["items"]["properties"]["type"]["enum"]


class TestExitCodes:
    def test_parse_error(self, workspace, capsys):
        path = workspace / "scenario.json"
        path.write_text("{not json")
        assert _run(path) == 2
        assert capsys.readouterr().err.startswith("ParseError")

    @pytest.mark.parametrize(
        "fields",
        [
            {"model": SINGLE_ATOM_ARUM, "grid": {"points": REFERENCE_POINTS}, "analyses": []},
            {"model": "absent.json", "grid": {"points": REFERENCE_POINTS}, "analyses": [{"type": "identify"}]},
            {"model": SINGLE_ATOM_ARUM, "grid": {"points": REFERENCE_POINTS}, "analyses": [{"type": "forecast"}]},
            {"model": SINGLE_ATOM_ARUM, "grid": {"points": REFERENCE_POINTS}, "analyses": [{"type": "attention"}]},
        ],
    )
    def test_validation_error(self, workspace, fields):
        assert _run(_write_scenario(workspace, **fields)) == 3

    def test_tie(self, workspace):
        model = {"class": "arum", "K": 2, "atoms": [{"eps": [0, 0], "w": 1}]}
        path = _write_scenario(workspace, model=model, grid={"points": [[0, 0]]}, analyses=[{"type": "identify"}])
        assert _run(path) == 4

    def test_infeasible_family(self, workspace):
        field = {"points": [[0, 0], [1, 0]], "probs": [["0.5", "0.5"], [1, 0]]}
        analysis = {"type": "counterfactual", "k": 0, "u_c": ["0.5", 0], "model_classes": ["arum"]}
        path = _write_scenario(workspace, field=field, analyses=[analysis])
        assert _run(path) == 5

    def test_no_k_maximal_point(self, workspace):
        model = {"class": "arum", "K": 3, "atoms": [{"eps": [0, "1/3", "2/3"], "w": 1}]}
        path = _write_scenario(
            workspace,
            model=model,
            grid={"points": [[1, 0, 1], [1, 1, 0]]},
            analyses=[{"type": "attention", "k": 0}],
            output_dir="out",
        )
        assert _run(path) == 6
        assert not (workspace / "out").exists()

    def test_full_consideration(self, workspace):
        analysis = {"type": "welfare", "paths": [{"u": [0, 0], "u_tilde": ["0.9", 0]}], "k": 0, "c": 1}
        path = _write_scenario(
            workspace, model=SINGLE_ATOM_ARUM, grid={"points": REFERENCE_POINTS}, analyses=[analysis]
        )
        assert _run(path) == 7

    def test_no_plot_data(self):
        result = AnalysisResult(AnalysisSpec("identify", "identify"), ["k"], [{"k": "0"}], {})
        with pytest.raises(UnsupportedAnalysisError) as info:
            emit_plot_data(result)
        assert info.value.exit_code == 9
