"""
JSON Loaders for WCV inputs

Parses the payloads described in schemas.py:
1. Matrices (exact "p/q" strings or floats)
2. Irregular types and Levi chains
3. Unfolding parameters
4. Space points, representation points and curves
"""

import json
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from .assembly import IrregularCurveData, MarkedPoint, RepPoint
from .core import EXACT, MODES, ComplexScalar, Matrix, Partition
from .irregular import IrregularType, LeviChain
from .schemas import (
    CHAIN_SCHEMA, CURVE_SCHEMA, IRREGULAR_SCHEMA, MATRIX_SCHEMA, PARAMS_SCHEMA, POINT_SCHEMA,
    REP_POINT_SCHEMA, require_keys,
)
from .unfolding import UnfoldingParams


class JsonLoader:
    """
    Load a JSON document from disk.

    Raises ValueError (never a bare OSError/JSONDecodeError) so the CLI can
    map every input problem to one exit code.
    """

    def __init__(self, path: str):
        self.path = Path(path)

    def load(self):
        if not self.path.exists():
            raise ValueError(f"Input file not found: {self.path}")
        try:
            with open(self.path) as f:
                payload = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Malformed JSON in {self.path}: {e}")
        print(f"[INFO] Loaded {self.path}", file=sys.stderr)
        return payload


def parse_scalar(raw, mode: str) -> ComplexScalar:
    """A [re, im] pair, or a bare real number/string."""
    try:
        if isinstance(raw, (list, tuple)):
            if len(raw) != 2:
                raise ValueError(f"Complex entry must be [re, im], got {raw!r}")
            return ComplexScalar.of((raw[0], raw[1]), mode)
        return ComplexScalar.of(raw, mode)
    except (TypeError, ZeroDivisionError) as e:
        raise ValueError(f"Cannot parse scalar {raw!r}: {e}")


def _mode_of(payload: dict, default: str = EXACT) -> str:
    mode = payload.get('mode', default)
    if mode not in MODES:
        raise ValueError(f"Unknown mode '{mode}' (expected exact or float)")
    return mode


def matrix_from_json(payload: dict, mode: Optional[str] = None) -> Matrix:
    """
    Parse a matrix payload.

    Raises:
        ValueError: On missing fields, ragged rows or a size mismatch with n
    """
    require_keys(payload, MATRIX_SCHEMA, "Matrix", optional=("mode",) if mode else ())
    mode = mode or _mode_of(payload)
    rows = payload['entries']
    n = int(payload['n'])
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"Matrix entries do not form an {n}x{n} array")
    return Matrix.from_rows([[parse_scalar(x, mode) for x in row] for row in rows], mode)


def irregular_from_json(payload: dict, mode: Optional[str] = None) -> IrregularType:
    require_keys(payload, IRREGULAR_SCHEMA, "Irregular type")
    mode = mode or _mode_of(payload)
    n = int(payload['n'])
    diagonals = []
    for j, diag in enumerate(payload['coeffs'], start=1):
        if len(diag) != n:
            raise ValueError(f"Q_{j} has {len(diag)} diagonal entries, expected {n}")
        diagonals.append([parse_scalar(x, mode) for x in diag])
    return IrregularType(n, tuple(tuple(d) for d in diagonals), mode)


def chain_from_json(payload: dict) -> LeviChain:
    require_keys(payload, CHAIN_SCHEMA, "Levi chain")
    partitions = [Partition.from_sizes(sizes) for sizes in payload['partitions']]
    if 'perm' in payload:
        return LeviChain(tuple(int(i) for i in payload['perm']), tuple(partitions))
    return LeviChain.from_partitions(partitions)


def params_from_json(payload: dict, mode: Optional[str] = None) -> UnfoldingParams:
    require_keys(payload, PARAMS_SCHEMA, "Unfolding parameters")
    ts = tuple(matrix_from_json(t, mode) for t in payload['ts'])
    return UnfoldingParams(ts, chain_from_json(payload['chain']))


def point_from_json(payload: dict, mode: Optional[str] = None) -> Tuple[Matrix, ...]:
    require_keys(payload, POINT_SCHEMA, "Point")
    return tuple(matrix_from_json(m, mode) for m in payload['slots'])


def rep_point_from_json(payload: dict, mode: Optional[str] = None) -> RepPoint:
    require_keys(payload, REP_POINT_SCHEMA, "Representation point")
    handles = []
    for pair in payload['handles']:
        if len(pair) != 2:
            raise ValueError("Each handle must be a pair [A, B]")
        handles.append((matrix_from_json(pair[0], mode), matrix_from_json(pair[1], mode)))
    locals_ = [point_from_json(m, mode) for m in payload['marked']]
    return RepPoint(tuple(handles), tuple(locals_))


def marked_point_from_json(payload: dict, n: int, mode: Optional[str] = None) -> MarkedPoint:
    irregular = irregular_from_json(payload['irregular'], mode) if payload.get('irregular') else None
    chain = chain_from_json(payload['chain']) if payload.get('chain') else None
    params = params_from_json(payload['params'], mode) if payload.get('params') else None
    class_rep = matrix_from_json(payload['class_rep'], mode) if payload.get('class_rep') else None
    return MarkedPoint(n, irregular, chain, params, class_rep, bool(payload.get('stokes', False)))


def curve_from_json(payload: dict, mode: Optional[str] = None) -> IrregularCurveData:
    require_keys(payload, CURVE_SCHEMA, "Curve")
    n = int(payload['n'])
    marked: List[MarkedPoint] = [marked_point_from_json(m, n, mode) for m in payload['marked']]
    return IrregularCurveData(int(payload['genus']), tuple(marked), n)
