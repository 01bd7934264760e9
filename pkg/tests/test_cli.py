"""Command-line interface: subcommands, exit codes, determinism."""

import json
import subprocess
import sys
from importlib import resources

import pytest

from approxlaws import normalize, parse
from approxlaws.cli import main
from approxlaws.problem import parse_problem_text


def fixture_path(entry_id):
    return str(resources.files("approxlaws.corpus").joinpath("data", f"{entry_id}.prob"))


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_diffusion_reports_published_multipliers(capsys):
    code, out, _ = run_cli(
        capsys, "solve", fixture_path("diffusion-consistent"),
        "--mult-deps", "t,x,u[0]", "--mult-degree", "2", "--trials", "1",
    )
    assert code == 0
    assert "x + ε*(t + x²/2)" in out
    assert "dimension: 4" in out


def test_solve_degree_zero_only_unit(capsys):
    code, out, _ = run_cli(
        capsys, "solve", fixture_path("diffusion-consistent"),
        "--mult-deps", "t,x,u[0]", "--mult-degree", "0", "--mult-xdegree", "0",
        "--trials", "1", "--format", "json",
    )
    assert code == 0
    data = json.loads(out)
    nontrivial = [m for m in data["multipliers"] if not m["trivial"]]
    assert len(nontrivial) == 1
    assert nontrivial[0]["components"][0]["combined"] == "1"
    assert data["solution_dimension"] == 2  # {1, eps}


def test_solve_empty_nullspace_toy(tmp_path, capsys):
    toy = tmp_path / "toy.prob"
    toy.write_text(
        "independent = t, x\ndependent = u\norder = 1\n"
        "equation = u_t + u^2\nleading = u_t\n"
    )
    code, out, _ = run_cli(
        capsys, "solve", str(toy), "--mult-deps", "t,x", "--mult-degree", "0",
        "--format", "json", "--trials", "1",
    )
    assert code == 0
    data = json.loads(out)
    assert data["solution_dimension"] == 0
    assert data["multipliers"] == [] and data["laws"] == []


def test_solve_order_override(capsys):
    code, out, _ = run_cli(
        capsys, "solve", fixture_path("diffusion-consistent"),
        "--order", "2", "--mult-deps", "t,x", "--mult-degree", "0",
        "--format", "json", "--trials", "1",
    )
    assert code == 0
    data = json.loads(out)
    assert data["problem"]["order"] == 2
    assert data["solution_dimension"] == 3  # {1, eps, eps^2}
    for law in data["laws"]:
        assert len(law["fluxes"]["t"]) == 3


def test_solve_method_flags(capsys):
    for flag, dim in (("a", 4), ("b", 4)):
        code, out, _ = run_cli(
            capsys, "solve", fixture_path("diffusion-consistent"),
            "--method", flag, "--mult-deps", "t,x,u[0]", "--mult-degree", "2",
            "--format", "json", "--trials", "1",
        )
        assert code == 0
        assert json.loads(out)["solution_dimension"] == dim


def test_compare_diffusion_blocks(capsys):
    code, out, _ = run_cli(
        capsys, "compare", fixture_path("diffusion-consistent"),
        "--mult-deps", "t,x,u[0]", "--mult-degree", "2", "--format", "json",
        "--trials", "1",
    )
    assert code == 0
    data = json.loads(out)
    assert set(data["blocks"]) == {"consistent", "approach_a", "approach_b"}
    assert data["blocks"]["approach_b"]["nontrivial"] == 4
    assert data["blocks"]["consistent"]["nontrivial"] == 2
    assert data["blocks"]["approach_a"]["nontrivial"] == 2
    # the consistent fluxes are the expansions of the approach-a fluxes
    notes = data["expansion_notes"]
    assert notes and all(n["fluxes_are_expansion"] for n in notes)
    assert len(notes) == 2


def test_expand_taylor(capsys):
    code, out, _ = run_cli(
        capsys, "expand", fixture_path("wave"), "--expr", "f(u)", "--format", "json"
    )
    assert code == 0
    data = json.loads(out)
    pb = parse_problem_text(open(fixture_path("wave")).read()).problem
    got = normalize(parse(data["expansion"], pb.table))
    want = normalize(parse("f(u[0]) + eps*f'(u[0])*u[1]", pb.table))
    assert got == want
    assert data["slots"][0] == "f(u[0])"


def test_verify_wave(capsys):
    code, out, _ = run_cli(capsys, "verify", fixture_path("wave"), "--trials", "1")
    assert code == 0
    assert "[ok]" in out and "FAIL" not in out


def test_verify_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.prob"
    text = open(fixture_path("diffusion-consistent")).read()
    bad.write_text(text.replace("flux.1.t.0 = u[0]", "flux.1.t.0 = u[0] + u[0]^2"))
    code, out, _ = run_cli(capsys, "verify", str(bad), "--trials", "1")
    assert code == 4


def test_audit_exit_zero(capsys):
    code, out, _ = run_cli(capsys, "audit", "diffusion-consistent", "wave", "--trials", "1")
    assert code == 0
    assert "all laws identity-verified" in out


def test_audit_lists_errata(capsys):
    code, out, _ = run_cli(capsys, "audit", "kdv-burgers", "--trials", "1", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["errata"] == [
        {"entry": "kdv-burgers", "law": "4", "achieved": "onsolution", "expected": "onsolution"}
    ]


def test_singular_generator_exit_code(capsys):
    code, _, err = run_cli(
        capsys, "solve", fixture_path("kdv-burgers"),
        "--mult-deps", "t,u[0]_t", "--mult-degree", "1",
    )
    assert code == 2
    assert "leading derivative" in err


def test_input_error_exit_code(tmp_path, capsys):
    missing = tmp_path / "none.prob"
    code, _, err = run_cli(capsys, "solve", str(missing))
    assert code == 2
    bad = tmp_path / "bad.prob"
    bad.write_text("independent = t, x\ndependent = u\norder = 1\nequation = u_t + w\nleading = u_t\n")
    code, _, err = run_cli(capsys, "solve", str(bad))
    assert code == 2


def test_reconstruction_failure_exit_code(tmp_path, capsys):
    toy = tmp_path / "toy.prob"
    toy.write_text(open(fixture_path("diffusion-consistent")).read())
    code, out, _ = run_cli(
        capsys, "solve", str(toy), "--mult-deps", "t,x,u[0]", "--mult-degree", "2",
        "--flux-degree", "0", "--format", "json", "--trials", "1",
    )
    assert code == 3
    data = json.loads(out)
    assert data["reconstruction_failures"]
    assert data["multipliers"]  # multipliers still emitted


def test_json_expressions_roundtrip(capsys):
    # machine-style strings in the JSON report re-parse to equal normal forms
    code, out, _ = run_cli(
        capsys, "solve", fixture_path("diffusion-consistent"),
        "--mult-deps", "t,x,u[0]", "--mult-degree", "2", "--format", "json",
        "--trials", "1",
    )
    assert code == 0
    data = json.loads(out)
    pb = parse_problem_text(open(fixture_path("diffusion-consistent")).read()).problem
    from approxlaws.fluxes import ConservationLaw, identity_residuals
    from approxlaws.multipliers import MultiplierSet

    P = lambda s: normalize(parse(s, pb.table))
    laws = {law["multiplier_index"]: law for law in data["laws"]}
    for m in data["multipliers"]:
        slots = tuple(tuple(P(s) for s in comp["slots"]) for comp in m["components"])
        mult = MultiplierSet("consistent", slots)
        law = laws[m["index"]]
        fluxes = tuple(tuple(P(s) for s in law["fluxes"][var]) for var in ("t", "x"))
        rebuilt = ConservationLaw(mult, fluxes)
        assert all(r.is_zero() for r in identity_residuals(pb, rebuilt))


def test_run_config_validation():
    from approxlaws.cli import CliError, RunConfig

    with pytest.raises(CliError):
        RunConfig(command="solve", order=0)
    with pytest.raises(CliError):
        RunConfig(command="solve", mult_degree=-1)
    cfg = RunConfig(command="solve")
    assert cfg.seed == 2023 and cfg.format == "text"


def test_byte_identical_reports(tmp_path):
    cmds = [
        ["solve", fixture_path("diffusion-consistent"), "--mult-deps", "t,x,u[0]",
         "--mult-degree", "2", "--format", "json", "--trials", "2"],
        ["expand", fixture_path("wave"), "--expr", "u^-1", "--format", "json"],
        ["audit", "diffusion-approach-b", "--format", "json", "--trials", "1"],
    ]
    for cmd in cmds:
        outs = []
        for _ in range(2):
            res = subprocess.run(
                [sys.executable, "-m", "approxlaws.cli", *cmd],
                capture_output=True, check=False,
            )
            outs.append(res.stdout)
        assert outs[0] == outs[1] and outs[0]
