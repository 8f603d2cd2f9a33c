"""Command-line front end: file validation, exit codes, solution round
trips, rendering, determinism."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from horomink.cli import main

LOG2 = math.log(2.0)


def write_json(path, payload):
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture()
def symmetric_instance(tmp_path):
    return write_json(
        tmp_path / "instance.json",
        {
            "schema_version": "1",
            "n": 1,
            "p": 0.0,
            "V0": 1.0,
            "even": True,
            "atoms": [
                {"direction": [1.0, 0.0], "weight": 1.0},
                {"direction": [0.0, 1.0], "weight": 1.0},
                {"direction": [-1.0, 0.0], "weight": 1.0},
                {"direction": [0.0, -1.0], "weight": 1.0},
            ],
        },
    )


@pytest.fixture()
def asymmetric_instance(tmp_path):
    c, s = math.cos(1.1), math.sin(1.1)
    return write_json(
        tmp_path / "asym.json",
        {
            "schema_version": "1",
            "n": 1,
            "p": 0.0,
            "even": True,
            "atoms": [
                {"direction": [1.0, 0.0], "weight": 1.0},
                {"direction": [c, s], "weight": 1.7},
                {"direction": [-1.0, 0.0], "weight": 1.0},
                {"direction": [-c, -s], "weight": 1.7},
            ],
        },
    )


@pytest.fixture()
def lens_body(tmp_path):
    return write_json(
        tmp_path / "lens.json",
        {
            "schema_version": "1",
            "n": 1,
            "even": True,
            "horoballs": [
                {"direction": [1.0, 0.0], "x": LOG2},
                {"direction": [-1.0, 0.0], "x": LOG2},
            ],
        },
    )


def last_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


# -------------------------------------------------------------- solve + check

def test_solve_check_roundtrip(tmp_path, symmetric_instance, capsys):
    out = tmp_path / "solution.json"
    assert main(["solve", "--input", symmetric_instance, "--output", str(out)]) == 0
    sol = json.loads(out.read_text())
    assert sol["schema_version"] == "1"
    assert sol["converged"] is True
    assert np.allclose(sol["z"], 0.25, atol=1e-4)
    assert len(sol["facet_areas"]) == 4
    assert sol["facet_areas"][0] == pytest.approx(sol["lambda"], rel=1e-9)
    assert sol["iterations"] == 0
    assert sol["config"]["quad_nodes"] is None
    assert "created" in sol and "instance" in sol
    capsys.readouterr()

    code = main(["check", "--instance", symmetric_instance, "--solution", str(out)])
    report = last_json(capsys)
    assert code == 0
    assert report["match"] is True
    assert abs(report["residual_max_rel"] - sol["residual_max_rel"]) <= 1e-9


def test_check_flags_tampered_solution(tmp_path, symmetric_instance, capsys):
    out = tmp_path / "solution.json"
    main(["solve", "--input", symmetric_instance, "--output", str(out)])
    sol = json.loads(out.read_text())
    sol["residual_max_rel"] = 0.5
    tampered = write_json(tmp_path / "tampered.json", sol)
    capsys.readouterr()
    code = main(["check", "--instance", symmetric_instance, "--solution", tampered])
    assert code == 1
    assert last_json(capsys)["match"] is False


def test_solve_deterministic_reruns(tmp_path, symmetric_instance, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["solve", "--input", symmetric_instance, "--output", str(a)])
    main(["solve", "--input", symmetric_instance, "--output", str(b)])
    capsys.readouterr()
    strip = lambda p: [  # noqa: E731
        line for line in p.read_text().splitlines() if '"created"' not in line
    ]
    assert strip(a) == strip(b)


def test_solve_asymmetric_converges(tmp_path, asymmetric_instance, capsys):
    out = tmp_path / "solution.json"
    assert main(["solve", "--input", asymmetric_instance, "--output", str(out)]) == 0
    sol = json.loads(out.read_text())
    assert sol["converged"] is True
    assert sol["residual_max_rel"] <= 1e-3
    assert sol["z"][0] != pytest.approx(sol["z"][1], rel=1e-3)
    capsys.readouterr()


def test_solve_exit_3_without_convergence(tmp_path, asymmetric_instance, capsys):
    out = tmp_path / "stalled.json"
    code = main(
        ["solve", "--input", asymmetric_instance, "--output", str(out), "--max-iters", "0"]
    )
    assert code == 3
    sol = json.loads(out.read_text())  # file is still written
    assert sol["converged"] is False
    capsys.readouterr()


def test_solve_cli_overrides_take_effect(tmp_path, symmetric_instance, capsys):
    out = tmp_path / "solution.json"
    main(
        [
            "solve", "--input", symmetric_instance, "--output", str(out),
            "--p", "2.0", "--tol", "5e-3", "--quad-nodes", "8192", "--seed", "7",
        ]
    )
    sol = json.loads(out.read_text())
    assert sol["config"]["p"] == 2.0
    assert sol["config"]["tol"] == 5e-3
    assert sol["config"]["quad_nodes"] == 8192
    assert sol["config"]["seed"] == 7
    assert sol["instance"]["p"] == 2.0
    capsys.readouterr()


# ------------------------------------------------------------- schema errors

def bad_cases(tmp_path):
    base = {
        "schema_version": "1",
        "n": 1,
        "p": 0.0,
        "even": True,
        "atoms": [
            {"direction": [1.0, 0.0], "weight": 1.0},
            {"direction": [-1.0, 0.0], "weight": 1.0},
        ],
    }
    unknown_top = dict(base, surprise=1)
    bad_atom = dict(base, atoms=[dict(base["atoms"][0], label="x"), base["atoms"][1]])
    bad_solver = dict(base, solver={"bogus": 1})
    bad_version = dict(base, schema_version="0")
    unpaired = dict(
        base,
        atoms=[
            {"direction": [1.0, 0.0], "weight": 1.0},
            {"direction": [0.0, 1.0], "weight": 1.0},
        ],
    )
    return {
        "instance.surprise": unknown_top,
        "instance.atoms[0].label": bad_atom,
        "instance.solver.bogus": bad_solver,
        "instance.schema_version": bad_version,
        "instance.atoms": unpaired,
    }


def test_schema_violations_name_the_field(tmp_path, capsys):
    for field, payload in bad_cases(tmp_path).items():
        path = write_json(tmp_path / "bad.json", payload)
        out = tmp_path / "unused.json"
        code = main(["solve", "--input", path, "--output", str(out)])
        err = capsys.readouterr().err
        assert code == 2
        assert err.startswith("schema error:")
        assert field in err


def test_schema_rejects_missing_and_malformed_files(tmp_path, capsys):
    out = tmp_path / "unused.json"
    assert main(["solve", "--input", str(tmp_path / "nope.json"), "--output", str(out)]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    assert main(["solve", "--input", str(broken), "--output", str(out)]) == 2
    capsys.readouterr()


def test_body_schema_violation(tmp_path, capsys):
    body = write_json(
        tmp_path / "bad_body.json",
        {
            "schema_version": "1",
            "n": 1,
            "horoballs": [
                {"direction": [1.0, 0.0], "x": -0.5},
                {"direction": [-1.0, 0.0], "x": 1.0},
            ],
        },
    )
    code = main(["volume", "--body", body])
    err = capsys.readouterr().err
    assert code == 2
    assert "body.horoballs[0].x" in err


def test_check_rejects_wrong_z_length(tmp_path, symmetric_instance, capsys):
    out = tmp_path / "solution.json"
    main(["solve", "--input", symmetric_instance, "--output", str(out)])
    sol = json.loads(out.read_text())
    sol["z"] = sol["z"][:1]
    short = write_json(tmp_path / "short.json", sol)
    capsys.readouterr()
    code = main(["check", "--instance", symmetric_instance, "--solution", short])
    err = capsys.readouterr().err
    assert code == 2
    assert "solution.z" in err


# ------------------------------------------------------------ geometry queries

def test_volume_command(lens_body, capsys):
    assert main(["volume", "--body", lens_body]) == 0
    got = last_json(capsys)["volume"]
    assert got == pytest.approx(4.0 * (math.sqrt(3.0) - math.pi / 3.0), abs=1e-4)


def test_facets_command(lens_body, capsys):
    assert main(["facets", "--body", lens_body]) == 0
    report = last_json(capsys)
    assert report["nonempty"] == [True, True]
    assert np.allclose(report["areas"], 2.0 * math.sqrt(3.0), atol=1e-9)
    assert np.allclose(report["canonical_support"], LOG2, atol=1e-9)


def test_support_command(lens_body, capsys):
    assert main(["support", "--body", lens_body, "--direction", "1,0"]) == 0
    assert last_json(capsys)["support"] == pytest.approx(LOG2, abs=1e-9)
    assert main(["support", "--body", lens_body, "--direction", "0,nope"]) == 2


def test_hausdorff_command(tmp_path, capsys):
    def lens_at(s, name):
        return write_json(
            tmp_path / name,
            {
                "schema_version": "1",
                "n": 1,
                "even": True,
                "horoballs": [
                    {"direction": [1.0, 0.0], "x": s},
                    {"direction": [-1.0, 0.0], "x": s},
                ],
            },
        )

    a = lens_at(1.0, "a.json")
    b = lens_at(1.2, "b.json")
    assert main(["hausdorff", "--body", a, "--other", b]) == 0
    want = math.acosh(math.exp(1.2)) - math.acosh(math.exp(1.0))
    assert last_json(capsys)["distance"] == pytest.approx(want, abs=1e-6)


def test_separate_command(lens_body, capsys):
    point = f"{math.sinh(2.0)},0,{math.cosh(2.0)}"
    assert main(["separate", "--body", lens_body, "--point", point]) == 0
    report = last_json(capsys)
    assert math.isfinite(report["s"])
    assert len(report["center"]) == 2
    # interior point cannot be separated
    assert main(["separate", "--body", lens_body, "--point", "0,0,1"]) == 4
    err = capsys.readouterr().err
    assert err.startswith("geometry error:")


def test_oracle_volume_command(lens_body, capsys):
    assert main(
        ["oracle-volume", "--body", lens_body, "--samples", "100000", "--seed", "4"]
    ) == 0
    report = last_json(capsys)
    want = 4.0 * (math.sqrt(3.0) - math.pi / 3.0)
    assert abs(report["estimate"] - want) <= 5.0 * report["stderr"]
    assert report["samples"] == 100000


# -------------------------------------------------------------------- render

def test_render_structure(tmp_path, symmetric_instance, capsys):
    sol = tmp_path / "solution.json"
    main(["solve", "--input", symmetric_instance, "--output", str(sol)])
    svg = tmp_path / "body.svg"
    assert main(["render", "--solution", str(sol), "--svg", str(svg)]) == 0
    text = svg.read_text()
    assert text.count('class="unit-circle"') == 1
    assert text.count('class="horocycle"') == 4
    assert text.count('class="body-boundary"') == 1
    assert 'viewBox="-1.15 -1.15 2.3 2.3"' in text
    assert " Z" in text
    capsys.readouterr()


def test_render_rejects_higher_dimensions(tmp_path, capsys):
    inst = write_json(
        tmp_path / "inst2.json",
        {
            "schema_version": "1",
            "n": 2,
            "p": 0.0,
            "even": True,
            "atoms": [
                {"direction": [1.0, 0.0, 0.0], "weight": 1.0},
                {"direction": [0.0, 1.0, 0.0], "weight": 1.0},
                {"direction": [0.0, 0.0, 1.0], "weight": 1.0},
                {"direction": [-1.0, 0.0, 0.0], "weight": 1.0},
                {"direction": [0.0, -1.0, 0.0], "weight": 1.0},
                {"direction": [0.0, 0.0, -1.0], "weight": 1.0},
            ],
        },
    )
    sol = tmp_path / "sol2.json"
    # n = 2 facet areas are Monte-Carlo estimates, so the certificate
    # saturates near the sampler's noise floor; this test only needs a file
    assert main(["solve", "--input", inst, "--output", str(sol), "--tol", "0.05"]) == 0
    capsys.readouterr()
    assert main(["render", "--solution", str(sol), "--svg", str(tmp_path / "x.svg")]) == 4
    assert "geometry error" in capsys.readouterr().err


# ------------------------------------------------------------------ process

def test_module_entrypoint_with_thread_cap(tmp_path, lens_body):
    env = dict(os.environ, HOROMINK_THREADS="1")
    proc = subprocess.run(
        [sys.executable, "-m", "horomink.cli", "volume", "--body", lens_body],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0
    assert "volume" in json.loads(proc.stdout.strip().splitlines()[-1] or "{}")


def test_thread_cap_garbage_is_ignored(tmp_path, lens_body):
    env = dict(os.environ, HOROMINK_THREADS="not-a-number")
    proc = subprocess.run(
        [sys.executable, "-m", "horomink.cli", "volume", "--body", lens_body],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0
    assert "HOROMINK_THREADS ignored" in proc.stderr
