"""
Verification Suites for WCV computations

Each suite draws seeded random data and checks one family of identities:
- qh2: the quasi-Hamiltonian two-form/moment identity for every space model
- triangular: unipotent conjugation solver, class chart pullback, enriched chart
- unfold: moment and two-form intertwining, composite formula, etale rank,
  parameter search, unfolded residues
- wcv: end-to-end unfolding of on-fiber representation points
- stokes: dimension audit and antipodal pairing of singular directions
- stability: Burnside saturation against a brute-force invariant line search

Exact mode demands residuals that are identically zero; float mode compares
against residual_tolerance scaled by the size of the inputs.
"""

import math
import shlex
import sys
import time
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import core
from .assembly import (
    burnside_irreducible, class_bookkeeping, conjugate_point, det_condition_check, stability_check,
    moment_relation_residual, on_fiber, unfold_wcv,
)
from .core import (
    EXACT, ComplexScalar, Matrix, Partition, Pattern, SearchExhaustedError,
    centralizer_contained_in_levi,
)
from .irregular import (
    SingularDirection, dimension_audit, leading_term, levi_chain, singular_directions, stokes_pattern,
)
from .sampling import (
    random_chain, random_class_rep, random_curve_point, random_group_elem, random_irregular, random_lie,
    random_partition, random_point, random_scalar, random_set, random_tangent, random_triangular_set,
)
from .schemas import RESIDUAL_SCHEMA
from .spaces import (
    ConjClass, Double, Fission, MSpace, MultiFission, SpaceModel, StokesModel, dim_multifission, fuse,
    model_dimension, qh2_residual,
)
from .triangular import TriangularChart, solve_conj_unip, tau_form_residual
from .unfolding import (
    enriched_chart, enriched_tau, etale_rank_check, form_intertwine_residual,
    moment_intertwine_residual, search_parameters, unfold_composite, unfold_full, unfolded_residues,
)


class VerifyReport:
    """Residual rows plus pass/warn/fail messages for one verification run."""

    def __init__(self, suite: str, trials: int, mode: str, seed: int):
        self.suite = suite
        self.trials = trials
        self.mode = mode
        self.seed = seed
        self.rows: List[dict] = []
        self.passes: List[str] = []
        self.warnings: List[str] = []
        self.failures: List[str] = []
        self.wall_time = 0.0

    def add_pass(self, message: str):
        self.passes.append(f"✓ {message}")

    def add_warning(self, message: str):
        self.warnings.append(f"⚠ {message}")

    def add_failure(self, message: str):
        self.failures.append(f"✗ {message}")

    def record(self, suite: str, check: str, n: int, trial: int, residual, scale: float = 1.0,
               inputs: Optional[str] = None) -> bool:
        """
        Store one residual and flag it when it is not zero.

        Args:
            residual: ComplexScalar, Matrix, or a plain bool (True = holds)
            scale: Magnitude of the inputs for the float-mode relative test
            inputs: Text that reproduces the failing case

        Returns:
            Whether the residual is within tolerance
        """
        if isinstance(residual, bool):
            value, ok = (0.0 if residual else 1.0), residual
        elif isinstance(residual, ComplexScalar):
            value, ok = abs(residual), residual.is_zero(scale)
        else:
            value, ok = residual.max_abs(), residual.is_zero(scale)
        self.rows.append({
            'suite': suite, 'check': check, 'n': n, 'trial': trial,
            'residual': float(value), 'ok': bool(ok),
        })
        if not ok:
            detail = f" inputs: {inputs}" if inputs else ""
            self.add_failure(f"{suite}/{check} trial {trial} (n={n}): residual {value:.3e}{detail}")
        return ok

    def has_failures(self) -> bool:
        return len(self.failures) > 0

    def summary(self) -> str:
        lines = []
        lines.append(f"PASS: {sum(r['ok'] for r in self.rows) + len(self.passes)}")
        lines.append(f"WARN: {len(self.warnings)}")
        lines.append(f"FAIL: {len(self.failures)}")
        return " | ".join(lines)

    def max_residual(self) -> float:
        return max((r['residual'] for r in self.rows), default=0.0)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(RESIDUAL_SCHEMA))

    def residual_summary(self) -> pd.DataFrame:
        """Per (suite, check): trial count, max residual, failure count."""
        df = self.to_frame()
        if df.empty:
            return pd.DataFrame(columns=['suite', 'check', 'trials', 'max_residual', 'failures'])
        df['failed'] = ~df['ok'].astype(bool)
        return df.groupby(['suite', 'check'], sort=False).agg(
            trials=('trial', 'count'),
            max_residual=('residual', 'max'),
            failures=('failed', 'sum'),
        ).reset_index()

    def reproduce_command(self) -> str:
        parts = ['python', 'run_wcv.py', 'verify', '--suite', self.suite, '--trials', str(self.trials),
                 '--mode', self.mode, '--seed', str(self.seed)]
        return ' '.join(shlex.quote(p) for p in parts)

    def to_json(self) -> dict:
        return {
            'suite': self.suite,
            'trials': self.trials,
            'mode': self.mode,
            'seed': self.seed,
            'max_residual': self.max_residual(),
            'summary': self.summary(),
            'failures': list(self.failures),
            'warnings': list(self.warnings),
            'wall_time': round(self.wall_time, 3),
        }


def _scale(*mats: Matrix) -> float:
    """Squared largest entry among the matrices and their inverses."""
    biggest = 1.0
    for m in mats:
        biggest = max(biggest, m.max_abs())
        if m.is_invertible():
            biggest = max(biggest, m.inv().max_abs())
    return biggest * biggest


def _show(items: Sequence[Matrix]) -> str:
    return '; '.join(repr(m) for m in items)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

class QH2Suite:
    """
    omega(xi_M, Y) = 1/2 (mu^-1 d mu + d mu mu^-1, xi) for every acting factor.

    Models: conjugacy class, double, fission (r <= 2), multi-fission, Stokes
    model, M-space and a fusion of three spaces, in GL_2 and GL_3.
    """

    name = 'qh2'

    @staticmethod
    def models(rng: np.random.Generator, n: int, mode: str) -> List[SpaceModel]:
        part = random_partition(rng, n)
        base = random_group_elem(rng, Pattern.general(n), mode)
        return [
            ConjClass(base),
            Double(n),
            Fission(part, 1 + int(rng.integers(0, 2))),
            MultiFission(random_chain(rng, n, 2)),
            StokesModel(random_irregular(rng, n, 1 + int(rng.integers(0, 2)), mode)),
            MSpace(part),
            fuse([ConjClass(base), Double(n), Fission(part, 1)]),
        ]

    @staticmethod
    def run_trial(report: VerifyReport, trial: int, rng: np.random.Generator, mode: str):
        n = 2 + trial % 2
        for model in QH2Suite.models(rng, n, mode):
            point = random_point(rng, model, mode)
            y = random_tangent(rng, model, mode)
            for factor, pattern in enumerate(model.factors()):
                xi = random_lie(rng, pattern, mode)
                # float residuals come back relative to the size of the form terms
                residual = qh2_residual(model, point, xi, y, factor)
                report.record(QH2Suite.name, f"{model.variant}[{factor}]", n, trial, residual,
                              inputs=_show(point))


class TriangularSuite:
    """
    solve_conj_unip recovers u from u' = h^-1 u^-1 h u; tau pulls the class
    form back as stated; the enriched chart lands on enriched_tau.
    """

    name = 'triangular'

    @staticmethod
    def run_trial(report: VerifyReport, trial: int, rng: np.random.Generator, mode: str):
        n = 2 + trial % 3
        part = random_partition(rng, n)
        if len(part.blocks) < 2:
            part = Partition.discrete(n)
        h0 = random_class_rep(rng, part, mode)
        upper, lower, levi = Pattern.upper(part), Pattern.lower(part), Pattern.levi(part)

        u = random_group_elem(rng, upper, mode)
        u_prime = h0.inv() @ u.inv() @ h0 @ u
        solved = solve_conj_unip(h0, u_prime, part)
        report.record(TriangularSuite.name, 'solve_conj_unip', n, trial, solved - u, _scale(h0, u),
                      _show([h0, u]))

        chart = TriangularChart(part, h0)
        point = (random_group_elem(rng, levi, mode), random_group_elem(rng, upper, mode),
                 random_group_elem(rng, lower, mode))
        x = (random_lie(rng, levi, mode), random_lie(rng, upper, mode), random_lie(rng, lower, mode))
        y = (random_lie(rng, levi, mode), random_lie(rng, upper, mode), random_lie(rng, lower, mode))
        residual = tau_form_residual(chart, point, x, y)
        report.record(TriangularSuite.name, 'tau_form', n, trial, residual, _scale(h0, *point) ** 2,
                      _show((h0,) + point))

        k, u2, v = point
        h = k.inv() @ h0 @ k
        c, p = enriched_chart(h, u2, v, part)
        mu = MSpace(part).moment([c, p])[0]
        report.record(TriangularSuite.name, 'enriched_chart', n, trial, mu - enriched_tau(h, u2, v),
                      _scale(h, u2, v))


class UnfoldSuite:
    """Unfolding map identities on random chains with searched parameters."""

    name = 'unfold'

    @staticmethod
    def run_trial(report: VerifyReport, trial: int, rng: np.random.Generator, mode: str):
        n = 2 + trial % 2
        r = 1 + (trial // 2) % (2 if n == 2 else 3)
        chain = random_chain(rng, n, r)
        h0 = random_class_rep(rng, chain.partitions[0], mode)
        try:
            params = search_parameters(chain, h0, rng=rng)
        except SearchExhaustedError as e:
            report.add_failure(f"unfold/search_parameters trial {trial} (n={n}): {e} {e.failure_counts}")
            return
        shifted = h0 @ params.total().inv()
        report.record(UnfoldSuite.name, 'search_parameters', n, trial,
                      centralizer_contained_in_levi(shifted, chain.partitions[0]))

        model = MultiFission(chain)
        point = random_point(rng, model, mode)
        scale = _scale(*point, *params.ts) ** (r + 1)
        rg, rh = moment_intertwine_residual(params, point)
        report.record(UnfoldSuite.name, 'moment_G', n, trial, rg, scale, _show(point))
        report.record(UnfoldSuite.name, 'moment_H', n, trial, rh, scale, _show(point))

        full, composite = unfold_full(params, point), unfold_composite(params, point)
        diffs = [a - b for a, b in zip(full.mpoint + full.ms, composite.mpoint + composite.ms)]
        worst = max(diffs, key=lambda d: d.max_abs())
        report.record(UnfoldSuite.name, 'composite', n, trial, worst, scale)

        x, y = random_tangent(rng, model, mode), random_tangent(rng, model, mode)
        residual = form_intertwine_residual(params, point, x, y)
        report.record(UnfoldSuite.name, 'two_form', n, trial, residual, scale ** 2, _show(point))

        full_rank, kernel_dim = etale_rank_check(params, point)
        report.record(UnfoldSuite.name, 'etale_rank', n, trial, full_rank,
                      inputs=None if full_rank else f"kernel dim {kernel_dim}; {_show(point)}")

        lambdas = [Matrix.diag([random_scalar(rng, mode) for _ in range(n)], mode) for _ in range(r + 1)]
        eps = list(range(r + 1)) if mode == EXACT else [float(e) for e in range(r + 1)]
        rng.shuffle(eps)
        hats = unfolded_residues(lambdas, eps)
        total = hats[0]
        for hat in hats[1:]:
            total = total + hat
        report.record(UnfoldSuite.name, 'residue_sum', n, trial, total - lambdas[0],
                      max(m.max_abs() for m in lambdas) * (r + 1))


class WcvSuite:
    """
    End-to-end unfolding of on-fiber points: genus <= 1, one irregular marked
    point plus the reserved tame point used to close the relation.
    """

    name = 'wcv'

    @staticmethod
    def run_trial(report: VerifyReport, trial: int, rng: np.random.Generator, mode: str):
        n, genus, r = 2 + trial % 2, trial % 2, 1 + (trial // 2) % 2
        try:
            curve, pt = random_curve_point(rng, n, genus, r, mode)
        except SearchExhaustedError as e:
            report.add_failure(f"wcv/search_parameters trial {trial}: {e} {e.failure_counts}")
            return
        n = curve.n
        ident = Matrix.identity(n, mode)
        mats = [g for pair in pt.handles for g in pair] + [g for slots in pt.locals for g in slots]
        scale = _scale(*mats) ** (len(mats) + 1)

        report.record(WcvSuite.name, 'relation', n, trial, moment_relation_residual(pt, curve) - ident, scale)
        report.record(WcvSuite.name, 'det_condition', n, trial, det_condition_check(pt, curve))

        unfolded, tame = unfold_wcv(pt, curve)
        report.record(WcvSuite.name, 'unfolded_relation', n, trial,
                      moment_relation_residual(unfolded, tame) - ident, scale * scale)
        report.record(WcvSuite.name, 'unfolded_det_condition', n, trial, det_condition_check(unfolded, tame))
        report.record(WcvSuite.name, 'class_bookkeeping', n, trial, all(class_bookkeeping(pt, curve)))

        g = random_group_elem(rng, Pattern.general(n), mode)
        report.record(WcvSuite.name, 'conjugation_invariance', n, trial,
                      on_fiber(conjugate_point(pt, g), curve))

        if stability_check(pt, curve) and not stability_check(unfolded, tame):
            report.add_warning(f"wcv trial {trial}: stable point unfolded to an unstable one")


class StokesSuite:
    """Dimension audit, model dimension and antipodal pairing for random irregular types."""

    name = 'stokes'

    @staticmethod
    def antipodal_violations(q) -> List[str]:
        """
        For alpha supporting d with leading order k, -alpha must support
        d + pi / k.
        """
        directions = singular_directions(q)
        bad = []
        for d in directions:
            for (k, l) in d.roots:
                _, order = leading_term(q, (k, l))
                probe = SingularDirection((d.angle + math.pi / order) % (2 * math.pi), ())
                partner = [e for e in directions if e.matches(probe)]
                if not partner or (l, k) not in partner[0].roots:
                    bad.append(f"root ({k + 1},{l + 1}) at {d.angle:.6f} has no partner ({l + 1},{k + 1})")
        return bad

    @staticmethod
    def run_trial(report: VerifyReport, trial: int, rng: np.random.Generator, mode: str):
        n = 2 + trial % 3
        r = 1 + (trial // 3) % 3
        q = random_irregular(rng, n, r, mode)
        stokes_dim, unipotent_dim = dimension_audit(q)
        report.record(StokesSuite.name, 'dimension_audit', n, trial, stokes_dim == unipotent_dim,
                      inputs=f"coeffs {q.coeffs}")

        for d in singular_directions(q):
            stokes_pattern(q, d)
        if q.r:
            same = model_dimension(StokesModel(q)) == dim_multifission(levi_chain(q).partitions)
            report.record(StokesSuite.name, 'model_dimension', n, trial, same)

        bad = StokesSuite.antipodal_violations(q)
        report.record(StokesSuite.name, 'antipodal', n, trial, not bad, inputs='; '.join(bad))


def _invariant_line(mats: Sequence[np.ndarray], probe: np.ndarray, tol: float = 1e-7) -> bool:
    """Some eigenvector of a member (or of the probe combination) is invariant under all."""
    candidates = []
    for m in list(mats) + [probe]:
        _, vecs = np.linalg.eig(m)
        candidates += [vecs[:, i] for i in range(vecs.shape[1])]
    for v in candidates:
        v = v / np.linalg.norm(v)
        if all(np.linalg.norm(m @ v - (np.vdot(v, m @ v)) * v) <= tol * max(1.0, np.abs(m).max())
               for m in mats):
            return True
    return False


def brute_force_reducible(mats: Sequence[Matrix], rng: np.random.Generator) -> bool:
    """
    Search for a common proper invariant subspace of n <= 3 matrices.

    A proper subspace of C^2 or C^3 has dimension 1 or n - 1; invariant
    hyperplanes are invariant lines of the transposes.
    """
    arrays = [m.to_numpy() for m in mats]
    n = arrays[0].shape[0]
    if n > 3:
        raise ValueError("brute_force_reducible only handles n <= 3")
    weights = rng.normal(size=len(arrays)) + 1j * rng.normal(size=len(arrays))
    probe = sum(w * a for w, a in zip(weights, arrays))
    if _invariant_line(arrays, probe):
        return True
    return n == 3 and _invariant_line([a.T for a in arrays], probe.T)


class StabilitySuite:
    """Burnside saturation agrees with the brute-force invariant subspace search."""

    name = 'stability'

    @staticmethod
    def run_trial(report: VerifyReport, trial: int, rng: np.random.Generator, mode: str):
        n = 2 + trial % 2
        if trial % 4 < 2:
            mats = random_set(rng, n, 2, mode)
        else:
            g = random_group_elem(rng, Pattern.general(n), mode)
            sizes = [1, n - 1] if trial % 8 < 4 else [n - 1, 1]
            mats = [g @ m @ g.inv() for m in random_triangular_set(rng, n, 2, mode, sizes)]
        irreducible = burnside_irreducible(mats, n, mode)
        reducible = brute_force_reducible(mats, rng)
        report.record(StabilitySuite.name, 'burnside_vs_search', n, trial, irreducible != reducible,
                      inputs=_show(mats))


SUITES: Dict[str, type] = {
    suite.name: suite
    for suite in (QH2Suite, TriangularSuite, UnfoldSuite, WcvSuite, StokesSuite, StabilitySuite)
}


def trial_rng(seed: int, suite: str, trial: int) -> np.random.Generator:
    """Generator for one trial, derived from (seed, suite, trial) only."""
    return np.random.default_rng([seed, list(SUITES).index(suite), trial])


def run_suites(suite: str, trials: int, seed: int, mode: str,
               progress: Optional[Callable[[str], None]] = None) -> VerifyReport:
    """
    Run one suite (or 'all') and collect a VerifyReport.

    A trial that raises a domain error (ValueError and subclasses) is a
    failure; a trial whose random data could not be drawn is a warning.
    """
    names = list(SUITES) if suite == 'all' else [suite]
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suite: {', '.join(unknown)}")
    report = VerifyReport(suite, trials, mode, seed)
    start = time.perf_counter()
    for name in names:
        runner = SUITES[name]
        before = len(report.failures)
        for trial in range(trials):
            rng = trial_rng(seed, name, trial)
            try:
                runner.run_trial(report, trial, rng, mode)
            except core.InvalidPointError as e:
                report.add_failure(f"{name} trial {trial}: invalid point: {'; '.join(e.violations)}")
            except ValueError as e:
                report.add_failure(f"{name} trial {trial}: {e}")
            except RuntimeError as e:
                report.add_warning(f"{name} trial {trial} skipped: {e}")
        if len(report.failures) == before:
            report.add_pass(f"{name}: {trials} trials")
        if progress:
            progress(f"{name}: {trials} trials, {len(report.failures) - before} failures")
    report.wall_time = time.perf_counter() - start
    return report


def print_report(report: VerifyReport):
    """Log lines for the CLI (stderr)."""
    print(f"[INFO] {report.summary()}", file=sys.stderr)
    print(f"[INFO] max residual {report.max_residual():.3e} in {report.wall_time:.2f}s", file=sys.stderr)
    for failure in report.failures[:20]:
        print(f"[ERROR] {failure}", file=sys.stderr)
    if report.has_failures():
        print(f"[ERROR] Reproduce with: {report.reproduce_command()}", file=sys.stderr)
