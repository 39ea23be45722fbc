"""Python smoke tests: bindings round-trip, CLI exit codes, report schemas."""

import json
import os
import pathlib
import subprocess
import tempfile

import pytest

kfair = pytest.importorskip("kfair")

SCHEMA_JSON = json.dumps(
    {
        "features": [
            {"name": "x", "kind": "numeric", "lower": 0, "upper": 1, "protected": False},
            {
                "name": "group",
                "kind": "categorical",
                "values": ["a", "b"],
                "protected": True,
            },
        ]
    }
)

CONSTANT_MODEL = json.dumps(
    {
        "input_width": 3,
        "output_width": 1,
        "favorable_output_index": 0,
        "layers": [
            {"weights": [[0, 0, 0]], "bias": [0.2], "activation": "identity"}
        ],
    }
)


def test_forward_and_score():
    net = kfair.parse_network(CONSTANT_MODEL)
    assert net.input_width == 3
    logits = kfair.forward(net, [0.5, 1.0, 0.0])
    assert logits == pytest.approx([0.2])
    assert 0.0 < kfair.score(net, [0.5, 1.0, 0.0]) < 1.0


def test_schema_and_k_discrimination():
    schema = kfair.parse_schema(SCHEMA_JSON)
    assert schema.K == 2
    net = kfair.parse_network(CONSTANT_MODEL)
    rec = kfair.k_discrimination(net, schema, {"x": 0.5, "group": "a"})
    assert rec["k_value"] == 1
    assert rec["is_id"] is False


def test_certify_constant_model_is_fair():
    schema = kfair.parse_schema(SCHEMA_JSON)
    net = kfair.parse_network(CONSTANT_MODEL)
    cert = kfair.certify(net, schema, timeout_seconds=30.0)
    assert cert["verdict"] == "fair"
    assert cert["max_logit_gap"] == pytest.approx(0.0, abs=1e-9)


def test_search_reports_expected_fields():
    schema = kfair.parse_schema(SCHEMA_JSON)
    net = kfair.parse_network(CONSTANT_MODEL)
    report = kfair.search(
        net, schema, seed=1, max_iterations=200, use_solver=False,
        timeout_seconds=30.0,
    )
    for key in ("iterations", "max_k", "num_id", "success_rate", "timing"):
        assert key in report
    assert report["max_k"] == 1
    assert report["num_id"] == 0


def test_errors_surface_as_kfair_error():
    with pytest.raises(kfair.KfairError):
        kfair.parse_network("{}")


@pytest.fixture(scope="module")
def cli():
    path = os.environ.get("KFAIR_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("KFAIR_CLI not set")
    return path


@pytest.fixture(scope="module")
def planted(cli, tmp_path_factory):
    out = tmp_path_factory.mktemp("fixture")
    subprocess.run(
        [cli, "plant", "--k", "4", "--target-k", "3", "--rows", "200",
         "--seed", "3", "--out-dir", str(out)],
        check=True, capture_output=True,
    )
    return out


def test_cli_certify_exit_codes(cli, planted, tmp_path):
    out = tmp_path / "cert.json"
    proc = subprocess.run(
        [cli, "certify", "--model", str(planted / "model.json"),
         "--schema", str(planted / "schema.json"), "--timeout", "60",
         "--out", str(out)],
        capture_output=True,
    )
    assert proc.returncode == 10  # planted fixtures are unfair by design
    cert = json.loads(out.read_text())
    assert cert["verdict"] == "unfair"
    assert "counterexample" in cert


def test_report_schemas_validate(cli, planted, tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    schemas_dir = os.environ.get("KFAIR_SCHEMAS")
    if not schemas_dir:
        pytest.skip("KFAIR_SCHEMAS not set")

    cert_out = tmp_path / "cert.json"
    subprocess.run(
        [cli, "certify", "--model", str(planted / "model.json"),
         "--schema", str(planted / "schema.json"), "--timeout", "60",
         "--out", str(cert_out)],
        capture_output=True,
    )
    search_out = tmp_path / "search.json"
    subprocess.run(
        [cli, "search", "--model", str(planted / "model.json"),
         "--schema", str(planted / "schema.json"),
         "--data", str(planted / "data.csv"), "--strategy", "sa",
         "--seed", "5", "--max-iters", "400", "--timeout", "60",
         "--solver-timeout", "20", "--out", str(search_out)],
        check=True, capture_output=True,
    )

    explain_out = tmp_path / "explain.json"
    subprocess.run(
        [cli, "explain", "--model", str(planted / "model.json"),
         "--schema", str(planted / "schema.json"),
         "--report", str(search_out), "--samples", "800",
         "--min-leaf", "10", "--seed", "2", "--out", str(explain_out)],
        check=True, capture_output=True,
    )
    mit_dir = tmp_path / "mit"
    mit_dir.mkdir()
    subprocess.run(
        [cli, "mitigate", "--model", str(planted / "model.json"),
         "--schema", str(planted / "schema.json"),
         "--data", str(planted / "data.csv"),
         "--explanation", str(explain_out), "--report", str(search_out),
         "--seed", "3", "--search-max-iters", "400", "--search-no-solver",
         "--epochs", "1", "--out-dir", str(mit_dir)],
        check=True, capture_output=True,
    )

    reports = [
        ("certificate", cert_out),
        ("search_report", search_out),
        ("explanation", explain_out),
        ("mitigation_report", mit_dir / "mitigation_report.json"),
    ]
    for name, path in reports:
        schema = json.loads(
            pathlib.Path(schemas_dir, f"{name}.schema.json").read_text()
        )
        jsonschema.validate(json.loads(path.read_text()), schema)
