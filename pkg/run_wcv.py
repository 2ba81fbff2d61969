#!/usr/bin/env python3
"""
WCV Toolkit - CLI Entry Point

Version: 1.0
Date: October 19, 2026

Computes Stokes data, unfolding parameters and unfolding maps for wild
character varieties of GL_n, and runs the seeded verification suites.
JSON results go to stdout (or --output); log lines go to stderr.

Exit codes: 0 success, 1 failed check or exhausted search, 2 invalid input.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

DEFAULT_CONFIG = Path(__file__).resolve().parent / 'config' / 'settings.json'


def log(message: str):
    print(message, file=sys.stderr)


def banner(title: str):
    log("=" * 70)
    log(title)
    log("=" * 70)


def load_settings(path: str, tolerance: float = None) -> dict:
    """Read settings.json and install the tolerances."""
    from wcv.core import configure

    settings = {}
    config_path = Path(path)
    if config_path.exists():
        with open(config_path) as f:
            settings = json.load(f)
    else:
        log(f"[WARN] Config file not found: {config_path} (using defaults)")
    if tolerance is not None:
        settings['residual_tolerance'] = tolerance
    configure(settings)
    return settings


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_stokes(args, settings) -> int:
    from wcv.loaders import JsonLoader, irregular_from_json
    from wcv.outputs import directions_table, stokes_summary, write_json

    q = irregular_from_json(JsonLoader(args.input).load(), args.mode)
    table = directions_table(q)
    log(f"[INFO] Pole order {q.r}, {len(table)} singular directions")
    if not table.empty:
        log(table.to_string(index=False))
    summary = stokes_summary(q)
    write_json(summary, args.output)
    if not summary['audit']['ok']:
        log(f"[ERROR] Dimension audit failed: {summary['audit']}")
        return EXIT_FAILED
    return EXIT_OK


def load_section(args, flag: str, key: str, what: str):
    """
    Payload for one input: the file given by --<flag> (bare, or a bundle
    holding key), else key from the bundled positional input.
    """
    from wcv.loaders import JsonLoader

    path = getattr(args, flag, None)
    if path:
        payload = JsonLoader(path).load()
        return payload[key] if isinstance(payload, dict) and key in payload else payload
    if args.input:
        bundle = JsonLoader(args.input).load()
        if isinstance(bundle, dict) and key in bundle:
            return bundle[key]
    raise ValueError(f"{what} input is missing required fields: {key} (pass --{flag.replace('_', '-')})")


def cmd_params(args, settings) -> int:
    """
    Input: --chain c.json (or --irregular q.json) and optionally --h0 h0.json,
    or one bundled file {"h0": matrix, "chain": chain} / {"h0", "irregular"}.
    h0 is given in the interval coordinates of the chain and defaults to I.
    """
    from wcv.core import EXACT, Matrix
    from wcv.irregular import levi_chain
    from wcv.loaders import JsonLoader, chain_from_json, irregular_from_json, matrix_from_json
    from wcv.outputs import params_to_json, write_json
    from wcv.unfolding import search_parameters

    bundle = JsonLoader(args.input).load() if args.input else {}
    if args.chain or 'chain' in bundle:
        chain = chain_from_json(load_section(args, 'chain', 'chain', "Parameter search"))
    elif args.irregular or 'irregular' in bundle:
        chain = levi_chain(irregular_from_json(load_section(args, 'irregular', 'irregular', "Parameter search"),
                                               args.mode))
    else:
        raise ValueError("Parameter search input needs a chain or an irregular type")
    if args.h0 or 'h0' in bundle:
        h0 = matrix_from_json(load_section(args, 'h0', 'h0', "Parameter search"), args.mode)
    else:
        h0 = Matrix.identity(chain.n, args.mode or EXACT)
    max_trials = args.max_trials if args.max_trials is not None else int(settings.get('max_trials', 1000))
    params = search_parameters(chain, h0, seed=args.seed, max_trials=max_trials,
                               pool_max=int(settings.get('scalar_pool_max', 13)))
    log(f"[SUCCESS] Found parameters for chain {[p.sizes for p in chain.partitions]}")
    write_json(params_to_json(params), args.output)
    return EXIT_OK


def cmd_unfold(args, settings) -> int:
    """Input: --point p.json --params t.json, or one bundled {"params", "point"} file."""
    from wcv.loaders import params_from_json, point_from_json
    from wcv.outputs import unfold_result_to_json, write_json
    from wcv.unfolding import etale_rank_check, moment_intertwine_residual, unfold_full

    params = params_from_json(load_section(args, 'params', 'params', "Unfold"), args.mode)
    point = point_from_json(load_section(args, 'point', 'point', "Unfold"), args.mode)
    result = unfold_full(params, point)
    out = unfold_result_to_json(result)
    checks = {}
    ok = True
    if args.check in ('all', 'moment'):
        rg, rh = moment_intertwine_residual(params, point)
        checks['moment_residual'] = max(rg.max_abs(), rh.max_abs())
        if not (rg.is_zero() and rh.is_zero()):
            log(f"[ERROR] Moment intertwining residual {checks['moment_residual']:.3e}")
            ok = False
    if args.check in ('all', 'etale'):
        full_rank, kernel_dim = etale_rank_check(params, point)
        checks['etale'] = full_rank
        checks['kernel_dim'] = kernel_dim
        if not full_rank:
            log(f"[WARN] Unfolding is not etale here (kernel dimension {kernel_dim})")
    if checks:
        out['checks'] = checks
    write_json(out, args.output)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_unfold_curve(args, settings) -> int:
    """Input: --curve curve.json --point pt.json, or one bundled {"curve", "point"} file."""
    from wcv.assembly import class_bookkeeping, on_fiber, unfold_wcv
    from wcv.loaders import curve_from_json, rep_point_from_json
    from wcv.outputs import curve_to_json, rep_point_to_json, write_json

    curve = curve_from_json(load_section(args, 'curve', 'curve', "Curve unfolding"), args.mode)
    pt = rep_point_from_json(load_section(args, 'point', 'point', "Curve unfolding"), args.mode)
    unfolded, tame = unfold_wcv(pt, curve)
    fiber_ok = on_fiber(unfolded, tame)
    classes_ok = all(class_bookkeeping(pt, curve))
    write_json({
        'curve': curve_to_json(tame),
        'point': rep_point_to_json(unfolded),
        'checks': {'on_fiber': fiber_ok, 'classes': classes_ok},
    }, args.output)
    log(f"[INFO] {len(curve.marked)} marked points unfolded to {len(tame.marked)} tame points")
    if not (fiber_ok and classes_ok):
        log(f"[ERROR] Postcondition failed (on_fiber={fiber_ok}, classes={classes_ok})")
        return EXIT_FAILED
    return EXIT_OK


def cmd_random_point(args, settings) -> int:
    from wcv.core import EXACT
    from wcv.outputs import curve_to_json, rep_point_to_json, write_json
    from wcv.sampling import random_curve_point

    if args.n < 1 or args.genus < 0 or args.r < 0:
        raise ValueError("Need n >= 1, genus >= 0 and r >= 0")
    rng = np.random.default_rng(args.seed)
    curve, pt = random_curve_point(rng, args.n, args.genus, args.r, args.mode or EXACT,
                                   max_trials=int(settings.get('max_trials', 1000)),
                                   pool_max=int(settings.get('scalar_pool_max', 13)))
    write_json({'curve': curve_to_json(curve), 'point': rep_point_to_json(pt)}, args.output)
    return EXIT_OK


def cmd_verify(args, settings) -> int:
    from wcv.core import EXACT
    from wcv.outputs import write_json, write_verify_report
    from wcv.validators import print_report, run_suites

    trials = args.trials if args.trials is not None else int(settings.get('default_trials', 100))
    mode = args.mode or EXACT
    log(f"[INFO] Suite {args.suite}: {trials} trials, mode {mode}, seed {args.seed}")
    report = run_suites(args.suite, trials, args.seed, mode, progress=lambda m: log(f"[INFO] {m}"))
    print_report(report)
    write_json(report.to_json(), args.output)
    if args.report_dir:
        write_verify_report(report, args.report_dir)
    return EXIT_FAILED if report.has_failures() else EXIT_OK


COMMANDS = {
    'stokes': cmd_stokes,
    'params': cmd_params,
    'unfold': cmd_unfold,
    'unfold-curve': cmd_unfold_curve,
    'random-point': cmd_random_point,
    'verify': cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    from wcv.validators import SUITES

    parser = argparse.ArgumentParser(
        description='WCV Toolkit - wild character varieties, Stokes data and unfolding maps',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Example usage:
  python run_wcv.py stokes irregular.json
  python run_wcv.py params --chain chain.json --h0 h0.json --seed 3
  python run_wcv.py unfold --point point.json --params params.json --check all
  python run_wcv.py random-point --n 3 --genus 1 --r 2 --seed 5 > curve.json
  python run_wcv.py unfold-curve curve.json
  python run_wcv.py unfold-curve --curve curve.json --point point.json
  python run_wcv.py verify --suite qh2 --trials 100 --mode exact --seed 7

Exit codes: 0 success, 1 failed check or exhausted search, 2 invalid input.
        """
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--mode', choices=['exact', 'float'], default=None,
                        help='Arithmetic mode (default: from the input, exact for generated data)')
    common.add_argument('--seed', type=int, default=None, help='Seed for the random generator')
    common.add_argument('--tolerance', type=float, default=None,
                        help='Float-mode residual tolerance (overrides config)')
    common.add_argument('--output', default=None, help='Write JSON here instead of stdout')
    common.add_argument('--config', default=str(DEFAULT_CONFIG), help='Path to settings.json')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('stokes', parents=[common], help='Singular directions, Stokes groups, Levi chain')
    p.add_argument('input', help='Irregular type JSON')

    p = sub.add_parser('params', parents=[common], help='Search unfolding parameters t_1..t_r')
    p.add_argument('input', nargs='?', default=None, help='Bundled JSON with h0 and a chain (or irregular type)')
    p.add_argument('--chain', default=None, help='Levi chain JSON')
    p.add_argument('--irregular', default=None, help='Irregular type JSON (chain taken from it)')
    p.add_argument('--h0', default=None, help='Class representative JSON in the first Levi (default: identity)')
    p.add_argument('--max-trials', type=int, default=None, help='Sampler cap (default: config max_trials)')

    p = sub.add_parser('unfold', parents=[common], help='Apply the unfolding map to a multi-fission point')
    p.add_argument('input', nargs='?', default=None, help='Bundled JSON with params and point')
    p.add_argument('--point', default=None, help='Multi-fission point JSON')
    p.add_argument('--params', default=None, help='Unfolding parameters JSON')
    p.add_argument('--check', choices=['all', 'moment', 'etale', 'none'], default='all',
                   help='Postconditions to evaluate (default: all)')

    p = sub.add_parser('unfold-curve', parents=[common], help='Unfold a representation point of a curve')
    p.add_argument('input', nargs='?', default=None, help='Bundled JSON with curve and point')
    p.add_argument('--curve', default=None, help='Curve JSON')
    p.add_argument('--point', default=None, help='Representation point JSON')

    p = sub.add_parser('random-point', parents=[common], help='Generate an on-fiber curve point')
    p.add_argument('--n', type=int, default=2, help='Matrix size (default: 2)')
    p.add_argument('--genus', type=int, default=0, help='Genus (default: 0)')
    p.add_argument('--r', type=int, default=1, help='Pole order of the irregular point (default: 1)')

    p = sub.add_parser('verify', parents=[common], help='Run seeded verification suites')
    p.add_argument('--suite', choices=list(SUITES) + ['all'], default='all', help='Suite to run')
    p.add_argument('--trials', type=int, default=None, help='Trials per suite (default: config)')
    p.add_argument('--report-dir', default=None, help='Also write verify_report.md here')
    return parser


def main(argv=None) -> int:
    """Main entry point for CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)

    banner("WCV Toolkit v1.0")
    try:
        settings = load_settings(args.config, args.tolerance)
    except (OSError, json.JSONDecodeError) as e:
        log(f"[ERROR] Cannot read config: {e}")
        return EXIT_INVALID
    if args.seed is None:
        args.seed = int(settings.get('default_seed', 0))
    if args.seed < 0:
        log("[ERROR] --seed must be non-negative")
        return EXIT_INVALID

    from wcv.core import InvalidPointError, SearchExhaustedError

    try:
        code = COMMANDS[args.command](args, settings)
    except SearchExhaustedError as e:
        log(f"[ERROR] {e}")
        log(f"[ERROR] Rejections by condition: {e.failure_counts}")
        return EXIT_FAILED
    except InvalidPointError as e:
        log("[ERROR] Invalid point:")
        for violation in e.violations:
            log(f"  - {violation}")
        return EXIT_INVALID
    except ValueError as e:
        log(f"[ERROR] {e}")
        return EXIT_INVALID

    if code == EXIT_OK:
        log("[SUCCESS] Done")
    log("=" * 70)
    return code


if __name__ == '__main__':
    sys.exit(main())
