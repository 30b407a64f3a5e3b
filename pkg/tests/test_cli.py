import stat
from pathlib import Path

import pytest

from pmcsynth import cli

MODELS = Path(__file__).resolve().parent.parent / "models"
BRANCH = str(MODELS / "branch13.pmc")
LOOP_PAIR = str(MODELS / "loop_pair.pmc")
SPLIT_CYCLE = str(MODELS / "split_cycle.pmc")
INTERVAL_ROW = str(MODELS / "interval_row.imc")


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# translate
# ---------------------------------------------------------------------------


def test_translate_dump(capsys):
    code, out, _ = run(capsys, "translate", "-f", "G F a")
    assert code == 0
    assert out.startswith("ap: a\n")
    assert "state 4 init" in out
    assert "acc 0:" in out and "acc 1:" in out


def test_translate_to_file(capsys, tmp_path):
    target = tmp_path / "gfa.aut"
    code, out, _ = run(capsys, "translate", "-f", "G F a", "-o", str(target))
    assert code == 0
    assert "5 states" in out and str(target) in out
    assert target.read_text().startswith("ap: a\n")


def test_translate_el_cap(capsys):
    code, _, err = run(capsys, "translate", "-f", "G F a", "--el-cap", "1")
    assert code == 4
    assert "above the cap" in err


def test_translate_bad_formula(capsys):
    code, _, err = run(capsys, "translate", "-f", "G F (")
    assert code == 3
    assert "error:" in err


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def test_check_positive_verdict_with_oracle(capsys):
    code, out, _ = run(
        capsys, "check", "-m", BRANCH, "-q", "P >= 1/4 [ F success ]", "--oracle"
    )
    assert code == 0
    assert "probability = 1/3" in out
    assert "verdict: probability in [1/4, 1]: yes" in out
    assert "(agrees)" in out


def test_check_negative_verdict(capsys):
    code, out, _ = run(capsys, "check", "-m", BRANCH, "-q", "P > 1/3 [ F success ]")
    assert code == 1
    assert "verdict: probability in (1/3, 1]: no" in out


def test_check_bare_formula(capsys):
    code, out, _ = run(capsys, "check", "-m", BRANCH, "-f", "F success")
    assert code == 0
    assert "probability = 1/3" in out
    assert "verdict" not in out
    assert "|S_M|=3" in out


def test_check_oracle_skips_outside_fragment(capsys):
    code, out, _ = run(capsys, "check", "-m", BRANCH, "-f", "X X success", "--oracle")
    assert code == 0
    assert "outside the closed-form fragment" in out


def test_check_with_evaluation(capsys):
    code, out, _ = run(
        capsys, "check", "-m", SPLIT_CYCLE, "-f", "X y", "-e", "eps=1/4"
    )
    assert code == 0
    assert "probability = 3/4" in out


def test_check_tsv_report(capsys):
    code, out, _ = run(capsys, "check", "-m", BRANCH, "-f", "F success", "--report", "tsv")
    assert code == 0
    lines = out.splitlines()
    header = lines[0].split("\t")
    values = lines[1].split("\t")
    assert header == ["|S_M|", "|V_G|", "SCC_G", "SCC_pos", "T_G", "T_mc"]
    assert values[0] == "3" and values[1] == "9"


def test_check_requires_query_or_formula(capsys):
    code, _, err = run(capsys, "check", "-m", BRANCH)
    assert code == 2
    assert "needs -q or -f" in err


@pytest.mark.parametrize(
    "argv, expected",
    [
        (("check", "-m", "no-such-file.pmc", "-f", "F a"), 3),
        (("check", "-m", BRANCH, "-q", "P ~ 1 [ F a ]"), 3),
        (("check", "-m", BRANCH, "-f", "F ("), 3),
        (("check", "-m", SPLIT_CYCLE, "-f", "X y"), 3),  # missing evaluation
        (("check", "-m", SPLIT_CYCLE, "-f", "X y", "-e", "eps=1/2"), 5),  # kills an entry
        (("check", "-m", BRANCH, "-f", "F success", "--max-product-nodes", "2"), 4),
    ],
)
def test_check_error_codes(capsys, argv, expected):
    code, _, err = run(capsys, *argv)
    assert code == expected
    assert err.strip()


def test_check_malformed_model(capsys, tmp_path):
    bad = tmp_path / "bad.pmc"
    bad.write_text("pmc\nstate s;\ninit s;\ntrans s -> s : 1/2;\n")
    code, _, err = run(capsys, "check", "-m", str(bad), "-f", "F a")
    assert code == 3
    assert "sums to 1/2" in err


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------


def test_classify_text_report(capsys):
    code, out, _ = run(capsys, "classify", "-m", LOOP_PAIR, "-f", "G F x | G F w")
    assert code == 0
    scc_lines = [l for l in out.splitlines() if l.startswith("scc ")]
    assert scc_lines
    positive = [l for l in scc_lines if "locally_positive=yes" in l]
    assert len(positive) == 1
    assert "proj={z,w}" in positive[0]
    # an accepting SCC over the non-bottom chain component is not positive
    assert any(
        "proj={x,y}" in l and "accepting=yes" in l and "locally_positive=no" in l
        for l in scc_lines
    )


def test_classify_forced_oracle_matches(capsys):
    code1, out1, _ = run(capsys, "classify", "-m", LOOP_PAIR, "-f", "G F x | G F w")
    code2, out2, _ = run(
        capsys, "classify", "-m", LOOP_PAIR, "-f", "G F x | G F w", "--oracle"
    )
    assert code1 == code2 == 0
    lines = lambda s: [l for l in s.splitlines() if l.startswith("scc ")]
    assert lines(out1) == lines(out2)


def test_classify_tsv_suppresses_detail(capsys):
    code, out, _ = run(
        capsys, "classify", "-m", LOOP_PAIR, "-f", "G F x", "--report", "tsv"
    )
    assert code == 0
    assert len(out.splitlines()) == 2
    assert "scc " not in out


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def test_synth_grid_witness(capsys):
    code, out, _ = run(
        capsys, "synth", "-m", SPLIT_CYCLE, "-q", "P >= 3/4 [ X y ]", "--solve", "grid:5"
    )
    assert code == 0
    assert "witness: eps=1/4" in out
    assert "probability = 3/4" in out
    assert "tried 3 points, 3 admitted" in out


def test_synth_grid_no_witness(capsys):
    code, out, _ = run(
        capsys, "synth", "-m", SPLIT_CYCLE, "-q", "P > 9/10 [ X y ]", "--solve", "grid:5"
    )
    assert code == 1
    assert "no witness on the grid" in out


def test_synth_interval_model(capsys):
    code, out, _ = run(capsys, "synth", "-m", INTERVAL_ROW, "-q", "P > 3/5 [ F goal ]")
    assert code == 0
    assert "p_s_t=7/10" in out
    # the scan stops at the first witness, 111 combinations in
    assert "tried 111 points, 3 admitted" in out


def test_synth_emit_only(capsys, tmp_path):
    target = tmp_path / "sys.smt2"
    code, out, _ = run(
        capsys, "synth", "-m", SPLIT_CYCLE, "-q", "P >= 1 [ G F y ]", "-o", str(target)
    )
    assert code == 0
    assert f"smt: wrote {target}" in out
    text = target.read_text()
    assert text.startswith("(set-logic QF_NRA)")
    assert "(check-sat)" in text


def _fake_solver(tmp_path, body):
    path = tmp_path / "solver.sh"
    path.write_text("#!/bin/sh\n" + body)
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return str(path)


def test_synth_solver_sat(capsys, tmp_path):
    solver = _fake_solver(tmp_path, "echo sat\necho '(model)'\n")
    code, out, _ = run(
        capsys,
        "synth", "-m", SPLIT_CYCLE, "-q", "P >= 1 [ G F y ]",
        "-o", str(tmp_path / "q.smt2"), "--solver", solver,
    )
    assert code == 0
    assert "solver: sat" in out
    assert "(model)" in out


def test_synth_solver_unsat(capsys, tmp_path):
    solver = _fake_solver(tmp_path, "echo unsat\n")
    code, out, _ = run(
        capsys,
        "synth", "-m", SPLIT_CYCLE, "-q", "P >= 1 [ G F y ]",
        "-o", str(tmp_path / "q.smt2"), "--solver", solver,
    )
    assert code == 1
    assert "solver: unsat" in out


def test_synth_solver_garbage(capsys, tmp_path):
    solver = _fake_solver(tmp_path, "echo it-broke >&2\n")
    code, out, err = run(
        capsys,
        "synth", "-m", SPLIT_CYCLE, "-q", "P >= 1 [ G F y ]",
        "-o", str(tmp_path / "q.smt2"), "--solver", solver,
    )
    assert code == 5
    assert "solver: (no output)" in out


@pytest.mark.parametrize("spec", ["grid:zero", "bisect:3"])
def test_synth_bad_solve_spec(capsys, spec):
    code, _, err = run(
        capsys, "synth", "-m", SPLIT_CYCLE, "-q", "P >= 1/2 [ X y ]", "--solve", spec
    )
    assert code == 2
    assert err.strip()


def test_missing_required_arguments_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["synth", "-m", SPLIT_CYCLE])  # -q is required
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["check"])  # -m is required
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main([])  # a subcommand is required
    assert info.value.code == 2
    capsys.readouterr()
