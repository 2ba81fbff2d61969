"""
Output Generation for WCV computations

Produces:
1. JSON payloads (matrices, points, parameters, unfolding results) that
   loaders.py reads back unchanged
2. stokes table - singular directions as a pandas DataFrame
3. verify_report.md - residual audit trail for a verification run
"""

import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from .assembly import IrregularCurveData, MarkedPoint, RepPoint
from .core import EXACT, ComplexScalar, Matrix
from .irregular import IrregularType, LeviChain, dimension_audit, levi_chain, singular_directions
from .schemas import DIRECTION_SCHEMA
from .unfolding import UnfoldingParams, UnfoldResult
from .validators import VerifyReport


def scalar_to_json(s: ComplexScalar) -> list:
    """[re, im]; exact parts as "p/q" strings so nothing is rounded."""
    if s.mode == EXACT:
        return [str(s.re), str(s.im)]
    return [float(s.re), float(s.im)]


def matrix_to_json(m: Matrix) -> dict:
    return {
        'n': m.n,
        'mode': m.mode,
        'entries': [[scalar_to_json(x) for x in row] for row in m.rows()],
    }


def irregular_to_json(q: IrregularType) -> dict:
    return {
        'n': q.n,
        'mode': q.mode,
        'coeffs': [[scalar_to_json(x) for x in diag] for diag in q.coeffs],
    }


def chain_to_json(chain: LeviChain) -> dict:
    return {
        'partitions': [list(p.sizes) for p in chain.partitions],
        'perm': list(chain.perm),
    }


def params_to_json(params: UnfoldingParams) -> dict:
    return {
        'ts': [matrix_to_json(t) for t in params.ts],
        'chain': chain_to_json(params.chain),
    }


def point_to_json(point: Sequence[Matrix]) -> dict:
    return {'slots': [matrix_to_json(g) for g in point]}


def unfold_result_to_json(result: UnfoldResult) -> dict:
    return {
        'mpoint': point_to_json(result.mpoint),
        'ms': [matrix_to_json(m) for m in result.ms],
    }


def rep_point_to_json(pt: RepPoint) -> dict:
    return {
        'handles': [[matrix_to_json(a), matrix_to_json(b)] for a, b in pt.handles],
        'marked': [point_to_json(slots) for slots in pt.locals],
    }


def marked_point_to_json(mp: MarkedPoint) -> dict:
    out = {}
    if mp.irregular is not None:
        out['irregular'] = irregular_to_json(mp.irregular)
    if mp.chain is not None:
        out['chain'] = chain_to_json(mp.chain)
    if mp.params is not None:
        out['params'] = params_to_json(mp.params)
    if mp.class_rep is not None:
        out['class_rep'] = matrix_to_json(mp.class_rep)
    if mp.stokes:
        out['stokes'] = True
    return out


def curve_to_json(curve: IrregularCurveData) -> dict:
    return {
        'genus': curve.genus,
        'n': curve.n,
        'marked': [marked_point_to_json(mp) for mp in curve.marked],
    }


def directions_table(q: IrregularType) -> pd.DataFrame:
    """
    One row per singular direction, labelled d_1 < d_2 < ... from 1.

    Root pairs are printed 1-based.
    """
    rows = []
    for idx, d in enumerate(singular_directions(q), start=1):
        rows.append({
            'index': idx,
            'angle': d.angle,
            'unit': str(d.unit) if d.unit is not None else '',
            'roots': ' '.join(f"({k + 1},{l + 1})" for k, l in d.roots),
            'dim': len(d.roots),
        })
    return pd.DataFrame(rows, columns=list(DIRECTION_SCHEMA))


def stokes_summary(q: IrregularType) -> dict:
    """Directions, Levi chain and dimension audit for one irregular type."""
    table = directions_table(q)
    stokes_dim, unipotent_dim = dimension_audit(q)
    summary = {
        'pole_order': q.r,
        'directions': table.to_dict(orient='records'),
        'audit': {'stokes': stokes_dim, 'unipotent': unipotent_dim, 'ok': stokes_dim == unipotent_dim},
    }
    if q.r:
        chain = levi_chain(q)
        summary['chain'] = {
            'partitions': [list(p.sizes) for p in chain.partitions],
            'perm': [i + 1 for i in chain.perm],
        }
    return summary


def write_json(payload: dict, output: Optional[str] = None) -> Optional[Path]:
    """
    Write a payload to a file, or to stdout when no path is given.

    Returns:
        Path to created file, or None for stdout
    """
    text = json.dumps(payload, indent=2, default=str)
    if output is None:
        print(text)
        return None
    output_path = Path(output)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w') as f:
        f.write(text + '\n')
    print(f"[INFO] ✓ Wrote {output_path}", file=sys.stderr)
    return output_path


def write_verify_report(report: VerifyReport, output_dir: str,
                        metadata: Optional[dict] = None) -> Path:
    """
    Write a verification report in Markdown format.

    Args:
        report: VerifyReport filled by the suites
        output_dir: Output directory path
        metadata: Optional extra key/value lines

    Returns:
        Path to created file
    """
    output_path = Path(output_dir) / "verify_report.md"
    output_path.parent.mkdir(parents=True, exist_ok=True)

    lines = []
    lines.append(f"# Verification Report - {report.suite}")
    lines.append("")
    lines.append(f"**Summary:** {report.summary()}")
    lines.append("")

    lines.append("## Metadata")
    lines.append("")
    info = {
        'mode': report.mode,
        'seed': report.seed,
        'trials': report.trials,
        'max residual': f"{report.max_residual():.3e}",
        'wall time (s)': f"{report.wall_time:.2f}",
        'reproduce': f"`{report.reproduce_command()}`",
    }
    info.update(metadata or {})
    for key, value in info.items():
        lines.append(f"- **{key}:** {value}")
    lines.append("")

    summary = report.residual_summary()
    if not summary.empty:
        lines.append("## Residuals by check")
        lines.append("")
        lines.append("| suite | check | trials | max residual | failures |")
        lines.append("|---|---|---|---|---|")
        for row in summary.itertuples(index=False):
            lines.append(f"| {row.suite} | {row.check} | {row.trials} | {row.max_residual:.3e} | {row.failures} |")
        lines.append("")

    if report.warnings:
        lines.append("## ⚠ Warnings")
        lines.append("")
        for warning in report.warnings:
            lines.append(f"- {warning}")
        lines.append("")

    if report.failures:
        lines.append("## ✗ Failures")
        lines.append("")
        for failure in report.failures:
            lines.append(f"- {failure}")
        lines.append("")

    with open(output_path, 'w') as f:
        f.write('\n'.join(lines))
    print(f"[INFO] ✓ Wrote {output_path}", file=sys.stderr)
    return output_path
