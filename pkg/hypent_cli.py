"""
Hyperbolic Entropy Runner
Command-line entry point: builds surface groups, enumerates and caches group
balls, renders tilings, and runs the entropy checks. Writes CSV tables, JSON
summaries and SVG figures under the output directory.

Exit codes: 0 success, 1 a check failed, 2 a budget or input failure.
"""

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from errors import (
    BudgetExceededError,
    CheckFailedError,
    DegenerateInputError,
    HypentError,
    ReductionError,
    WindowExhaustedError,
)
from hyperbolic.ballenum import dehn_cross_check, growth_profile, word_residual
from hyperbolic.fuchsian import (
    TILE_BUDGET,
    build_degenerate,
    build_reduction_table,
    build_regular,
    net_base_depth,
    reduce_step,
    sample_disk,
    verify_inclusions,
)
from hyperbolic.geometry import distance_from_origin
from hyperbolic.tiling_svg import STYLES, render_tiling
from dynamics.entropy import suspension_entropy
from dynamics.transversal import is_homomorphism, make_system, parse_assignment, sample_points
from dynamics.zcase import (
    bernoulli_entropy,
    brin_katok_table,
    casz_formula,
    k0_estimate,
    noninvariance_check,
    reference_htop,
)
from warehouse.ball_cache import BallCache, cached_ball
from warehouse.experiments import load_experiment
from warehouse.reports import summary_document, write_csv, write_text

logger = logging.getLogger("hypent")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_RESOURCE = 2
EXIT_CODES = {
    CheckFailedError: EXIT_CHECK_FAILED,
    BudgetExceededError: EXIT_RESOURCE,
    WindowExhaustedError: EXIT_RESOURCE,
    HypentError: EXIT_RESOURCE,
}

RELATOR_LIMIT = 1e-6
FIT_TOLERANCE = 0.05
ZCASE_BAND = (0.5, 1.5)


# =========================
# 1. SHARED HELPERS
# =========================

def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()] if text else None


def _banner(title):
    print("=" * 60)
    print(title)
    print("=" * 60)


def _group(spec):
    if spec.group.mode == "degenerate":
        print(f"Building degenerate genus-{spec.group.genus} group (eps={spec.group.eps})...")
        group = build_degenerate(spec.group.genus, spec.group.eps)
    else:
        print(f"Building regular genus-{spec.group.genus} group...")
        group = build_regular(spec.group.genus)
    print(f"  ✓ delta0={group.delta0:.6f}  R0={group.R0:.6f}  relator residual={group.relator_residual:.2e}")
    return group


def _ball(group, R, spec):
    ball = cached_ball(BallCache(), group, R, budget=spec.budgets.ball)
    print(f"  ✓ ball R={R:g}: {len(ball)} elements")
    return ball


def _table(group, spec):
    ball = _ball(group, group.conservative_slack, spec)
    table = build_reduction_table(group, ball)
    print(f"  ✓ reduction table: {len(table)} elements, K={table.K}, K'={table.K_prime:.4f}, N0={table.N0}")
    return table


def _representation(group, spec):
    system = make_system(spec.representation.system)
    rep = parse_assignment(group.genus, spec.representation.assign, system)
    witnesses = system.sample(16, spec.seed)
    if not is_homomorphism(rep, system, group.relator, witnesses):
        raise CheckFailedError(f"assignment {spec.representation.assign!r} does not respect the surface relator")
    print(f"  ✓ representation {rep.name} on {system.spec}")
    return system, rep


def _summary(spec, name, sections):
    return write_text(summary_document(spec.model_dump(mode="json"), sections), Path(spec.output_dir) / name)


def _require(ok, message):
    if ok:
        print(f"  ✓ {message}")
    else:
        print(f"  ✗ {message}")
        raise CheckFailedError(message)


# =========================
# 2. SUBCOMMANDS
# =========================

def cmd_group_build(args, spec):
    group = _group(spec)
    group.check()
    table = _table(group, spec) if args.with_table else None
    doc = group.to_document(table)
    if args.output:
        write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output)
    else:
        _summary(spec, "group.json", {"group": doc})
    _require(group.relator_residual <= RELATOR_LIMIT, f"relator residual {group.relator_residual:.2e} <= 1e-6")


def cmd_ball(args, spec):
    group = _group(spec)
    R = args.radius or max(spec.grids.R)
    slack = args.slack if args.slack is not None else group.polygon.circumradius
    print(f"Enumerating ball R={R:g} with slack {slack:.4f}...")
    ball = cached_ball(None if args.no_cache else BallCache(), group, R, slack, spec.budgets.ball)
    print(f"  ✓ {len(ball)} elements")
    residual = word_residual(group, ball)
    R_grid = [r for r in spec.grids.R if r <= R] or [R]
    sections = {"count": len(ball), "R": R, "slack": slack, "word_residual": residual}
    if len(R_grid) >= 2:
        profile = growth_profile(group, R_grid, slack, spec.budgets.ball)
        write_csv(profile.table, Path(spec.output_dir) / "ball_growth.csv")
        sections["log_slope"] = profile.log_slope
        print(f"  ✓ log-count slope {profile.log_slope:.4f}")
    if args.dehn:
        mismatches = dehn_cross_check(group, ball)
        sections["dehn_mismatches"] = mismatches
        _require(mismatches == 0, f"Dehn reduction agrees with geometry ({mismatches} mismatches)")
    _summary(spec, "ball.json", sections)
    _require(residual <= RELATOR_LIMIT, f"word residual {residual:.2e} <= 1e-6")


def cmd_tiles(args, spec):
    group = _group(spec)
    print(f"Rendering tiles to depth {args.depth} ({args.style})...")
    svg = render_tiling(group, args.depth, args.style, markers=not args.no_markers, budget=spec.budgets.ball)
    name = args.output or Path(spec.output_dir) / f"tiles_{group.mode}_g{group.genus}_d{args.depth}.svg"
    write_text(svg, name)


def cmd_verify_inclusions(args, spec):
    group = _group(spec)
    table = _table(group, spec)

    print(f"Reducing {args.reduction_samples} points with d(0, xi) in (delta0 + 1, {args.reduction_radius:g}]...")
    points = sample_disk(args.reduction_radius, args.reduction_samples, spec.seed)
    points = points[distance_from_origin(points) > group.delta0 + 1.0]
    failures = 0
    for xi in points:
        try:
            reduce_step(group, table, xi)
        except ReductionError:
            failures += 1
    net_depth = net_base_depth(group, table, seed=spec.seed)
    print(f"  ✓ base net depth {net_depth} (N0={table.N0})")

    print(f"Checking covering inclusions at N={args.N}, delta={args.delta}...")
    report = verify_inclusions(group, table, args.N, args.delta, args.samples, spec.seed, args.tile_budget)
    if report.tiles_capped:
        print(f"  ⚠ tiles checked to word length {report.tile_depth} of {args.N} within the budget of {args.tile_budget}")
    if report.inner_radius == 0:
        print(f"  ⚠ inner radius is 0 at delta={args.delta}; only the outer inclusion is tested")
    _summary(spec, "inclusions.json", {
        "group": group.to_document(table),
        "reduction": {"points": len(points), "failures": failures},
        "net_base_depth": net_depth,
        "inclusions": dataclasses.asdict(report),
        "tolerances": {"delta": args.delta},
    })
    _require(failures == 0, f"every sampled point reduces ({failures} failures out of {len(points)})")
    _require(report.ok, f"sandwich holds (inner {report.inner_violations}, outer {report.outer_violations}, "
                        f"weighted {report.weighted_violations} violations)")


def cmd_k0(args, spec):
    group = _group(spec)
    system, rep = _representation(group, spec)
    if not rep.is_zcase:
        raise DegenerateInputError("K0 needs an integer exponent assignment such as a1=1")
    table = _table(group, spec)
    ball = _ball(group, max(spec.grids.R), spec)
    estimate = k0_estimate(group, rep.exponents, spec.grids.R, ball, table)
    write_csv(estimate.table, Path(spec.output_dir) / "k0.csv")
    _summary(spec, "k0.json", {
        "K0_certified": estimate.certified,
        "generator_bound": estimate.generator_bound,
        "stability": estimate.stability,
        "superadditivity_violations": estimate.superadditivity_violations,
        "bound_violations": estimate.bound_violations,
    })
    if not estimate.stable:
        print(f"  ⚠ running sup moved {estimate.stability:.1%} over the last grid step")
    _require(estimate.superadditivity_violations == 0, "n(R) superadditive on the grid")
    _require(estimate.bound_violations == 0, "n(R) inside its generator bracket")


def _entropy_run(group, spec, system, rep, method):
    table = _table(group, spec)
    ball = _ball(group, max(spec.grids.R), spec)
    points = None
    if method == "greedy":
        points = sample_points(system, spec.grids.samples, spec.seed)
    print(f"Estimating entropies ({method}) over R={spec.grids.R} and eps={spec.grids.eps}...")
    report = suspension_entropy(rep, group, table, ball, system, spec.grids.R, spec.grids.eps, points,
                                spec.seed, method=method, tolerance=FIT_TOLERANCE,
                                transformation_budget=spec.budgets.transformations)
    print(f"  ✓ h(T0)={report.h_transversal:.4f}  h_w={report.h_weighted:.4f}  h_GLW={report.h_glw:.4f}")
    return table, ball, report


def _entropy_sections(report):
    return {
        "h_transversal": report.h_transversal,
        "h_weighted": report.h_weighted,
        "h_glw": report.h_glw,
        "h_foliation": report.h_foliation,
        "K_prime": report.K_prime,
        "c1": report.c1,
        "c2": report.c2,
        "slopes": {
            "transversal": report.transversal.slopes,
            "weighted": report.weighted.slopes,
            "glw": report.glw.slopes,
        },
        "lower_bounds": report.transversal.lower_bounds.to_dict(orient="list"),
        "tolerances": {"fit": report.tolerance},
    }


def cmd_entropy_transversal(args, spec):
    group = _group(spec)
    system, rep = _representation(group, spec)
    _, _, report = _entropy_run(group, spec, system, rep, spec.grids.method)
    write_csv(report.counts, Path(spec.output_dir) / "entropy_counts.csv")
    _summary(spec, "entropy.json", _entropy_sections(report))
    _require(report.sandwich_ok, "h_w <= h(T0) <= K'·h_w")
    _require(report.bracket_ok, "h_GLW/c2 <= h_w <= h_GLW/c1")


def cmd_zcase_check(args, spec):
    group = _group(spec)
    system, rep = _representation(group, spec)
    if not rep.is_zcase:
        raise DegenerateInputError("the Z-case check needs an integer exponent assignment such as a1=1")
    method = "oracle" if spec.grids.method == "oracle" or system.kind == "shift" else "greedy"
    table, ball, report = _entropy_run(group, spec, system, rep, method)
    estimate = k0_estimate(group, rep.exponents, spec.grids.R, ball, table)
    htop = reference_htop(system)
    predicted = 2.0 * estimate.certified * htop
    write_csv(estimate.table, Path(spec.output_dir) / "zcase_k0.csv")
    write_csv(report.counts, Path(spec.output_dir) / "zcase_counts.csv")
    sections = _entropy_sections(report)
    sections.update({
        "K0_certified": estimate.certified,
        "K0_stability": estimate.stability,
        "htop": htop,
        "formula": casz_formula(estimate.certified, htop),
        "h_foliation_estimate": report.h_foliation,
        "band": list(ZCASE_BAND),
    })
    _summary(spec, "zcase.json", sections)
    print(f"  ✓ h(F)={report.h_foliation:.4f} against 2 + 2·K0·h = {casz_formula(estimate.certified, htop):.4f}")
    lo, hi = ZCASE_BAND
    if predicted == 0:
        _require(report.h_transversal <= 0.02, f"h(T0)={report.h_transversal:.4f} vanishes with h_top")
    else:
        _require(lo * predicted <= report.h_transversal <= hi * predicted,
                 f"h(T0)={report.h_transversal:.4f} within [{lo}, {hi}]·{predicted:.4f}")
    _require(report.transversal.lower_bound_monotone, "per-R lower bounds for h(T0) nondecreasing")
    _require(report.sandwich_ok, "h_w <= h(T0) <= K'·h_w")


def cmd_bk(args, spec):
    p = np.asarray(_floats(args.p), dtype=float)
    samples = args.samples or spec.grids.samples
    print(f"Brin-Katok values for p={p.tolist()}, n={args.n}, m={args.m}, {samples} samples...")
    frame = brin_katok_table(p, args.n, args.m, samples, spec.seed)
    write_csv(frame, Path(spec.output_dir) / "bk.csv")
    h = bernoulli_entropy(p)
    corrected = float(frame["corrected_value"].mean())
    rescaled = float(frame["paper_value"].mean()) * args.n / (args.n + args.m)
    _summary(spec, "bk.json", {
        "p": p, "n": args.n, "m": args.m, "samples": samples,
        "h_nu": h, "mean_corrected": corrected, "mean_paper_value": float(frame["paper_value"].mean()),
        "tolerances": {"relative": args.tolerance},
    })
    print(f"  ✓ mean corrected value {corrected:.6f} (h = {h:.6f})")
    _require(abs(corrected - h) <= args.tolerance * h, f"corrected value within {args.tolerance:.0%} of h")
    _require(abs(rescaled - 2.0 * h) <= args.tolerance * 2.0 * h, "1/n value times n/(n + m) within tolerance of 2h")


def cmd_noninvariance(args, spec):
    print(f"Building regular genus-{spec.group.genus} group...")
    regular = build_regular(spec.group.genus)
    table = _table(regular, spec)
    report = noninvariance_check(regular, table, htop=args.htop, eps_factor=args.eps_factor)
    print(f"  ✓ degenerate group at eps={report.eps:.4g}: w2={report.weight_degenerate:.4g}")
    _summary(spec, "noninvariance.json", {**dataclasses.asdict(report), "holds": report.holds})
    _require(report.holds, f"upper bound {report.upper:.4f} < lower bound {report.lower:.4f}")


# =========================
# 3. ARGUMENT PARSING
# =========================

def _common(parser):
    parser.add_argument("--config", type=str, help="TOML experiment document")
    parser.add_argument("--genus", type=int)
    parser.add_argument("--mode", choices=["regular", "degenerate"])
    parser.add_argument("--eps", type=float, help="weight bound for a degenerate group")
    parser.add_argument("--system", type=str, help="e.g. shift:k=2,W=64, rotation:alpha=0.381966, catmap, perm:n=5")
    parser.add_argument("--assign", type=str, help="e.g. a1=1 or a1=shift,b1=flip")
    parser.add_argument("--R", type=str, help="comma-separated radius grid")
    parser.add_argument("--eps-sweep", type=str, help="comma-separated eps values")
    parser.add_argument("--samples", type=int)
    parser.add_argument("--method", choices=["greedy", "oracle"])
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output-dir", type=str)
    parser.add_argument("--ball-budget", type=int)
    parser.add_argument("--transformation-budget", type=int)


def build_parser():
    parser = argparse.ArgumentParser(description="Hyperbolic entropy of suspension foliations")
    commands = parser.add_subparsers(dest="command", required=True)

    group = commands.add_parser("group", help="surface group documents")
    group_actions = group.add_subparsers(dest="action", required=True)
    build = group_actions.add_parser("build", help="build a group and emit its document")
    _common(build)
    build.add_argument("--with-table", action="store_true", help="include K, K' and N0")
    build.add_argument("--output", type=str)
    build.set_defaults(handler=cmd_group_build)

    ball = commands.add_parser("ball", help="enumerate and cache a group ball")
    _common(ball)
    ball.add_argument("--radius", type=float)
    ball.add_argument("--slack", type=float)
    ball.add_argument("--dehn", action="store_true", help="cross-check words by Dehn reduction")
    ball.add_argument("--no-cache", action="store_true")
    ball.set_defaults(handler=cmd_ball)

    tiles = commands.add_parser("tiles", help="SVG tiling by word length")
    _common(tiles)
    tiles.add_argument("--depth", type=int, default=2)
    tiles.add_argument("--style", choices=STYLES, default="wordlength")
    tiles.add_argument("--no-markers", action="store_true")
    tiles.add_argument("--output", type=str)
    tiles.set_defaults(handler=cmd_tiles)

    verify = commands.add_parser("verify", help="geometric checks")
    verify_actions = verify.add_subparsers(dest="action", required=True)
    inclusions = verify_actions.add_parser("inclusions", help="covering sandwich and reduction")
    _common(inclusions)
    inclusions.set_defaults(samples=1000)
    inclusions.add_argument("--N", type=int, default=60)
    inclusions.add_argument("--delta", type=float, default=0.1)
    inclusions.add_argument("--tile-budget", type=int, default=TILE_BUDGET)
    inclusions.add_argument("--reduction-samples", type=int, default=1000)
    inclusions.add_argument("--reduction-radius", type=float, default=12.0)
    inclusions.set_defaults(handler=cmd_verify_inclusions)

    k0 = commands.add_parser("k0", help="growth constant of realized powers")
    _common(k0)
    k0.set_defaults(handler=cmd_k0)

    entropy = commands.add_parser("entropy", help="entropy estimates")
    entropy_actions = entropy.add_subparsers(dest="action", required=True)
    transversal = entropy_actions.add_parser("transversal", help="nets, slopes and comparisons")
    _common(transversal)
    transversal.set_defaults(handler=cmd_entropy_transversal)

    zcase = commands.add_parser("zcase", help="single-generator formula")
    zcase_actions = zcase.add_subparsers(dest="action", required=True)
    check = zcase_actions.add_parser("check", help="entropy against 2 + 2·K0·h")
    _common(check)
    check.set_defaults(handler=cmd_zcase_check)

    bk = commands.add_parser("bk", help="Brin-Katok tables on Bernoulli shifts")
    _common(bk)
    bk.add_argument("--p", type=str, default="0.5,0.5")
    bk.add_argument("--n", type=int, default=100)
    bk.add_argument("--m", type=int, default=2)
    bk.add_argument("--tolerance", type=float, default=0.05)
    bk.set_defaults(handler=cmd_bk, samples=100)

    nonin = commands.add_parser("noninvariance", help="entropy bounds for two groups")
    _common(nonin)
    nonin.add_argument("--htop", type=float, default=math.log(2.0))
    nonin.add_argument("--eps-factor", type=float, default=0.5)
    nonin.set_defaults(handler=cmd_noninvariance)
    return parser


def _overrides(args):
    return {
        "group.genus": args.genus,
        "group.mode": args.mode,
        "group.eps": args.eps,
        "representation.system": args.system,
        "representation.assign": args.assign,
        "grids.R": _floats(args.R),
        "grids.eps": _floats(args.eps_sweep),
        "grids.samples": args.samples,
        "grids.method": args.method,
        "seed": args.seed,
        "output_dir": args.output_dir,
        "budgets.ball": args.ball_budget,
        "budgets.transformations": args.transformation_budget,
    }


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(levelname)s %(message)s",
                        stream=sys.stdout)
    args = build_parser().parse_args(argv)
    title = " ".join(filter(None, [args.command, getattr(args, "action", None)]))
    _banner(f"hypent {title}")
    try:
        spec = load_experiment(args.config, _overrides(args))
        logger.info("experiment %s", spec.model_dump_json())
        args.handler(args, spec)
    except ValidationError as e:
        print(f"\n✗ Invalid experiment: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except HypentError as e:
        code = next(c for kind, c in EXIT_CODES.items() if isinstance(e, kind))
        print(f"\n✗ {type(e).__name__}: {e}", file=sys.stderr)
        return code
    print("=" * 60)
    print(f"✓ {title} completed successfully!")
    print("=" * 60)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
