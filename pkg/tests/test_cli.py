"""Tests for hypent_cli.py — subcommands, artifacts and exit codes."""

import json
import math

import pandas as pd


def _run(output_dir, *argv):
    from hypent_cli import main

    return main([*argv, "--output-dir", str(output_dir)])


def test_group_build(output_dir):
    """Emits a group document with a tiny relator residual."""
    code = _run(output_dir, "group", "build", "--genus", "2", "--mode", "regular")
    assert code == 0
    doc = json.loads((output_dir / "group.json").read_text(encoding="utf-8"))
    assert doc["group"]["relator_residual"] <= 1e-6
    assert doc["spec"]["group"]["genus"] == 2


def test_group_build_to_file(output_dir):
    from hyperbolic.fuchsian import SurfaceGroup

    target = output_dir / "degenerate.json"
    code = _run(output_dir, "group", "build", "--mode", "degenerate", "--eps", "0.2", "--output", str(target))
    assert code == 0
    group = SurfaceGroup.from_document(json.loads(target.read_text(encoding="utf-8")))
    assert group.weights["A1"] <= 0.2


def test_bk_uniform(output_dir):
    """Bias-corrected column is constant ln 2 for the fair coin."""
    code = _run(output_dir, "bk", "--p", "0.5,0.5", "--n", "100", "--m", "2")
    assert code == 0
    frame = pd.read_csv(output_dir / "bk.csv")
    assert len(frame) == 100
    assert (frame["corrected_value"] - math.log(2.0)).abs().max() < 1e-9


def test_tiles_svg(output_dir):
    code = _run(output_dir, "tiles", "--depth", "1")
    assert code == 0
    svg = (output_dir / "tiles_regular_g2_d1.svg").read_text(encoding="utf-8")
    assert svg.count("<path") == 9


def test_ball_growth_table(output_dir):
    code = _run(output_dir, "ball", "--radius", "4", "--R", "2,3.5,4")
    assert code == 0
    table = pd.read_csv(output_dir / "ball_growth.csv")
    assert list(table["count"]) == [1, 9, 9]


def test_invalid_distribution_exits_2(output_dir):
    assert _run(output_dir, "bk", "--p", "0.5,0.6") == 2


def test_budget_exits_2(output_dir):
    assert _run(output_dir, "ball", "--radius", "8", "--ball-budget", "50", "--no-cache") == 2


def test_invalid_experiment_exits_2(output_dir):
    assert _run(output_dir, "group", "build", "--mode", "degenerate") == 2


def test_non_integer_assignment_exits_2(output_dir):
    """The single-generator check needs an integer exponent assignment."""
    code = _run(output_dir, "zcase", "check", "--system", "shift:k=2,W=16", "--assign", "a1=shift,b1=flip")
    assert code == 2
    assert _run(output_dir, "k0", "--system", "shift:k=2,W=16", "--assign", "a1=shift,b1=flip") == 2


def test_failed_check_exits_1(output_dir):
    """Three letters are too few for the outer inclusion to absorb the tile diameter."""
    code = _run(output_dir, "verify", "inclusions", "--N", "3", "--reduction-samples", "50")
    assert code == 1
    doc = json.loads((output_dir / "inclusions.json").read_text(encoding="utf-8"))
    assert doc["inclusions"]["outer_violations"] > 0


def test_verify_inclusions_defaults(output_dir):
    """Default flags: delta = 1/K leaves only the outer and weighted inclusions, which hold."""
    code = _run(output_dir, "verify", "inclusions")
    assert code == 0
    doc = json.loads((output_dir / "inclusions.json").read_text(encoding="utf-8"))
    report = doc["inclusions"]
    assert report["inner_radius"] == 0.0
    assert report["tiles_capped"]
    assert report["outer_violations"] == 0
    assert report["weighted_violations"] == 0


def test_zcase_summary(output_dir):
    code = _run(output_dir, "zcase", "check", "--system", "shift:k=2,W=64", "--assign", "a1=1",
                "--R", "2,3,4,5,6,7,8,9,10")
    assert code == 0
    doc = json.loads((output_dir / "zcase.json").read_text(encoding="utf-8"))
    assert doc["h_foliation"] == doc["h_transversal"] + 2.0
    assert doc["formula"] == 2.0 + 2.0 * doc["K0_certified"] * math.log(2.0)
    bounds = doc["lower_bounds"]["lower_bound"]
    assert len(bounds) == 9
    assert bounds == sorted(bounds)
    assert (output_dir / "zcase_counts.csv").exists()


def test_noninvariance_holds(output_dir):
    """The default eps lands near 0.05, where the degenerate construction composes long words."""
    code = _run(output_dir, "noninvariance")
    assert code == 0
    doc = json.loads((output_dir / "noninvariance.json").read_text(encoding="utf-8"))
    assert doc["holds"]
    assert doc["weight_degenerate"] <= doc["eps"]
    assert doc["upper"] < doc["lower"]
