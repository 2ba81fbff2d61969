"""
Tests for JSON loaders and writers

Tests the loaders:
- JsonLoader
- matrix / irregular type / chain / params / point / curve parsers
and the payloads written by outputs.py.
"""

import json
import math
from fractions import Fraction

import pytest

from wcv.assembly import IrregularCurveData, MarkedPoint, RepPoint, complete_relation
from wcv.core import EXACT, FLOAT, ComplexScalar, Matrix, ModeMismatchError, Partition
from wcv.irregular import IrregularType, LeviChain
from wcv.loaders import (
    JsonLoader, chain_from_json, curve_from_json, irregular_from_json, matrix_from_json, params_from_json,
    parse_scalar, point_from_json, rep_point_from_json,
)
from wcv.outputs import (
    chain_to_json, curve_to_json, directions_table, matrix_to_json, params_to_json, rep_point_to_json,
    stokes_summary, write_json,
)
from wcv.unfolding import UnfoldingParams


def exact_payload(rows):
    return {'n': len(rows), 'mode': 'exact', 'entries': rows}


class TestJsonLoader:
    """Test file access errors."""

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            JsonLoader(tmp_path / "absent.json").load()

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="Malformed JSON"):
            JsonLoader(path).load()

    def test_loads(self, tmp_path):
        path = tmp_path / "ok.json"
        path.write_text('{"n": 2}')
        assert JsonLoader(path).load() == {'n': 2}


class TestParseScalar:
    """Test scalar parsing."""

    def test_fraction_pair(self):
        s = parse_scalar(["3/4", "-1"], EXACT)
        assert (s.re, s.im) == (Fraction(3, 4), Fraction(-1))

    def test_bare_integer(self):
        assert parse_scalar(5, EXACT) == ComplexScalar.of(5, EXACT)

    def test_float_in_exact_mode_raises(self):
        """Floats must not be silently rationalised."""
        with pytest.raises(ModeMismatchError):
            parse_scalar(0.1, EXACT)

    def test_bad_pair_length(self):
        with pytest.raises(ValueError, match=r"\[re, im\]"):
            parse_scalar([1, 2, 3], EXACT)

    def test_zero_denominator(self):
        with pytest.raises(ValueError, match="Cannot parse"):
            parse_scalar("1/0", EXACT)


class TestMatrixFromJson:
    """Test matrix payloads."""

    def test_exact(self):
        m = matrix_from_json(exact_payload([[["1/2", "0"], 1], [0, ["0", "1"]]]))
        assert m == Matrix.from_rows([[Fraction(1, 2), 1], [0, (0, 1)]], EXACT)

    def test_float(self):
        m = matrix_from_json({'n': 1, 'mode': 'float', 'entries': [[[0.5, -1.5]]]})
        assert m.mode == FLOAT
        assert m.rows()[0][0].to_complex() == complex(0.5, -1.5)

    def test_missing_field(self):
        with pytest.raises(ValueError, match="missing required fields: entries"):
            matrix_from_json({'n': 2, 'mode': 'exact'})

    def test_ragged(self):
        with pytest.raises(ValueError, match="2x2"):
            matrix_from_json(exact_payload([[1, 0], [0]]))

    def test_mode_supplied_by_caller(self):
        """A payload without mode is accepted when the caller passes one."""
        m = matrix_from_json({'n': 1, 'entries': [[0.5]]}, FLOAT)
        assert m.mode == FLOAT

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="Unknown mode"):
            matrix_from_json({'n': 1, 'mode': 'decimal', 'entries': [[1]]})

    def test_round_trip(self):
        m = Matrix.from_rows([[Fraction(-2, 3), (1, 1)], [0, 7]], EXACT)
        assert matrix_from_json(json.loads(json.dumps(matrix_to_json(m)))) == m


class TestStructuredPayloads:
    """Test irregular types, chains, params and curves."""

    def test_irregular(self):
        q = irregular_from_json({'n': 2, 'mode': 'exact', 'coeffs': [[1, -1], [0, 0]]})
        assert q.r == 1

    def test_irregular_length_mismatch(self):
        with pytest.raises(ValueError, match="Q_1 has 3"):
            irregular_from_json({'n': 2, 'coeffs': [[1, 2, 3]]})

    def test_chain_with_perm(self):
        chain = chain_from_json({'partitions': [[1, 1, 1], [2, 1]], 'perm': [0, 2, 1]})
        assert chain.perm == (0, 2, 1)
        assert chain.partitions[1] == Partition.from_sizes([2, 1])

    def test_chain_not_increasing(self):
        with pytest.raises(ValueError, match="not increasing"):
            chain_from_json({'partitions': [[2, 1], [1, 1, 1]]})

    def test_params_round_trip(self):
        params = UnfoldingParams((Matrix.diag([2, 1], EXACT),), LeviChain.from_partitions([Partition.discrete(2)]))
        parsed = params_from_json(json.loads(json.dumps(params_to_json(params))))
        assert parsed.ts == params.ts
        assert parsed.chain == params.chain
        assert chain_to_json(parsed.chain) == {'partitions': [[1, 1]], 'perm': [0, 1]}

    def test_point(self):
        pt = point_from_json({'slots': [exact_payload([[1, 0], [0, 1]]), exact_payload([[2, 0], [0, 3]])]})
        assert pt[1] == Matrix.diag([2, 3], EXACT)

    def test_handle_must_be_pair(self):
        with pytest.raises(ValueError, match="pair"):
            rep_point_from_json({'handles': [[exact_payload([[1]])]], 'marked': []})

    def test_curve_round_trip(self):
        """A curve with a pole and a reserved tame point should survive JSON."""
        params = UnfoldingParams((Matrix.diag([2, 1], EXACT),), LeviChain.from_partitions([Partition.discrete(2)]))
        curve = IrregularCurveData(1, (MarkedPoint(2, params=params, class_rep=Matrix.diag([3, 5], EXACT)),
                                       MarkedPoint(2)), 2)
        parsed = curve_from_json(json.loads(json.dumps(curve_to_json(curve))))
        assert parsed.genus == 1
        assert parsed.marked[0].params.ts == params.ts
        assert parsed.marked[0].class_rep == Matrix.diag([3, 5], EXACT)
        assert parsed.marked[1].is_tame

    def test_rep_point_round_trip(self):
        a, b = Matrix.from_rows([[1, 1], [0, 1]], EXACT), Matrix.from_rows([[1, 0], [1, 1]], EXACT)
        curve = IrregularCurveData(1, (MarkedPoint(2),))
        pt = complete_relation(RepPoint(((a, b),), ()), curve)
        assert rep_point_from_json(json.loads(json.dumps(rep_point_to_json(pt)))) == pt


class TestOutputs:
    """Test report payloads."""

    def test_directions_table(self):
        """diag(1,-1)/z should list 0 and pi with 1-based roots."""
        table = directions_table(IrregularType.from_diagonals(2, [[1, -1]], EXACT))
        assert list(table['roots']) == ['(2,1)', '(1,2)']
        assert table['angle'].iloc[1] == pytest.approx(math.pi)
        assert list(table['index']) == [1, 2]

    def test_stokes_summary(self):
        summary = stokes_summary(IrregularType.from_diagonals(3, [[0, 0, 0], [1, 2, 1]], EXACT))
        assert summary['audit']['ok']
        assert summary['chain']['perm'] == [1, 3, 2]

    def test_write_json_to_file(self, tmp_path):
        out = write_json({'a': 1}, str(tmp_path / "sub" / "out.json"))
        assert json.loads(out.read_text()) == {'a': 1}

    def test_write_json_to_stdout(self, capsys):
        assert write_json({'a': 1}) is None
        assert json.loads(capsys.readouterr().out) == {'a': 1}
