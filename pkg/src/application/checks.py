"""One runner per requested check, executed in dependency order."""

import time
from typing import Callable, Dict, List, Optional

import numpy as np
import sympy as sp

from ..domain.deform import (
    DeformationSetup,
    FrameField,
    LocalConnection,
    central_pullback_deform,
    check_admissibility,
    deform_connection,
    deform_defining_section,
    deformed_frame,
    defining_section_wellposedness,
    extend_connection_rep,
    intrinsic_torsion,
    metric_compatibility_residual,
    torsion_change,
    torsion_change_direct,
    zeta_form,
)
from ..domain.entities import CheckName, CheckResult, CheckStatus
from ..domain.exceptions import AdmissibilityError, NormalDeformationError
from ..domain.expressions import coordinate_symbols, print_expression
from ..domain.fields import LieValuedForm, validate_group_field
from ..domain.instanton import instanton_bundle_preserved, instanton_check
from ..domain.interfaces import LoggingService
from ..domain.liealg import build_splitting
from ..domain.catalog import lie_algebra
from .scenario_builder import ScenarioModel

PREREQUISITE_FAILED = "error: prerequisite failed"
SETUP_DEPENDENT = {
    CheckName.DEFORM,
    CheckName.ZETA,
    CheckName.TORSION_CHANGE,
    CheckName.INSTANTON,
    CheckName.METRIC_COMPAT,
    CheckName.DEFINING_SECTION,
}


class CheckFailure(Exception):
    """Raised inside a check to report a failed verdict with evidence."""

    def __init__(self, residual: float, point=None, message: str = ""):
        super().__init__(message)
        self.residual = residual
        self.point = point


def _form_table(form: LieValuedForm) -> Dict[str, str]:
    """Printed components keyed like 'dx1' or 'dx1^dx2'."""
    table = {}
    for index, matrix in form.components.items():
        key = "^".join(f"dx{i + 1}" for i in index) or "1"
        rows = ["[" + ", ".join(print_expression(e) for e in matrix.row(r)) + "]"
                for r in range(matrix.rows)]
        table[key] = "[" + ", ".join(rows) + "]"
    return table


class CheckRunner:
    """Runs the checks of one scenario model; never fabricates results."""

    def __init__(self, model: ScenarioModel, logger: LoggingService,
                 tolerance_override: Optional[float] = None):
        self.model = model
        self.logger = logger
        self.tolerance_override = tolerance_override
        self._setup: Optional[DeformationSetup] = None
        self._setup_error: Optional[Exception] = None
        self._setup_attempted = False
        self._handlers: Dict[CheckName, Callable[[float], CheckResult]] = {
            CheckName.ADMISSIBILITY: self._admissibility,
            CheckName.DEFORM: self._deform,
            CheckName.ZETA: self._zeta,
            CheckName.TORSION: self._torsion,
            CheckName.TORSION_CHANGE: self._torsion_change,
            CheckName.PHI: self._phi,
            CheckName.INSTANTON: self._instanton,
            CheckName.METRIC_COMPAT: self._metric_compat,
            CheckName.DEFINING_SECTION: self._defining_section,
        }

    # =========================================================================
    # ORCHESTRATION (High Priority)
    # =========================================================================

    def run(self, checks: Optional[List[CheckName]] = None) -> List[CheckResult]:
        checks = CheckName.ordered(checks if checks is not None else self.model.scenario.checks)
        return [self.run_one(check) for check in checks]

    def run_one(self, check: CheckName) -> CheckResult:
        tolerance = self.model.scenario.tolerance_for(check, self.tolerance_override)
        started = time.perf_counter()
        self.logger.info(f"[{self.model.scenario.name}] running {check.value}")

        if check in SETUP_DEPENDENT and self.setup() is None:
            result = CheckResult(check, CheckStatus.ERROR, tolerance=tolerance,
                                 message=PREREQUISITE_FAILED)
        else:
            try:
                result = self._handlers[check](tolerance)
            except CheckFailure as failure:
                result = CheckResult(check, CheckStatus.FAIL, failure.residual, failure.point,
                                     tolerance=tolerance, message=str(failure))
            except NormalDeformationError as e:
                result = CheckResult(check, CheckStatus.ERROR, tolerance=tolerance, message=str(e))

        result.elapsed_ms = round((time.perf_counter() - started) * 1000.0, 3)
        level = self.logger.info if result.passed else self.logger.warning
        level(
            f"[{self.model.scenario.name}] {check.value}: {result.status.value} "
            f"(residual {result.residual}, {result.elapsed_ms} ms)"
        )
        return result

    def setup(self) -> Optional[DeformationSetup]:
        """Admissible setup of the scenario's h, or None if h is not admissible."""
        if not self._setup_attempted:
            self._setup_attempted = True
            tolerance = self.model.scenario.tolerance_for(
                CheckName.ADMISSIBILITY, self.tolerance_override
            )
            try:
                self._setup = check_admissibility(self.model.h, self.model.split, tolerance)
            except NormalDeformationError as e:
                self._setup_error = e
                self.logger.warning(f"[{self.model.scenario.name}] h is not admissible: {e}")
        return self._setup

    # =========================================================================
    # CHECKS
    # =========================================================================

    def _admissibility(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        if setup is None:
            error = self._setup_error
            if isinstance(error, AdmissibilityError):
                raise CheckFailure(error.residual, error.point, str(error))
            raise error
        table = {
            "centraliser_valued": setup.centraliser_valued,
            "constant": setup.constant,
            "conformal": setup.conformal,
            "splitting_invariance_residual": setup.invariance_residual,
        }
        return CheckResult.from_residual(
            CheckName.ADMISSIBILITY, setup.worst_residual, tolerance,
            point=setup.worst_point, table=table,
        )

    def _deform(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        A = self.model.connection
        deformed = deform_connection(A, setup)
        residual = deformed.incompatibility(setup.splitting)
        table = {"section": deformed.section_label}

        # affine structure: f(A) - f(0) = Ad(h^{-1}) A
        h, h_inv = setup.h.matrix, setup.h.inverse_matrix
        zero = LocalConnection(LieValuedForm.zero(A.chart, 1, A.matrix_size, A.form.value_algebra))
        affine = (deformed.form - deform_connection(zero, setup).form).max_difference(
            A.form.conjugate(h_inv, h)
        )
        residual = max(residual, affine)

        if setup.centraliser_valued:
            pulled = central_pullback_deform(A, setup)
            gauge_term = setup.maurer_cartan.apply_linear_map(setup.splitting.matrix_projector_g)
            coincidence = deformed.form.max_difference(pulled.form)
            table["coincidence_residual"] = coincidence
            table["gauge_term_norm"] = gauge_term.max_norm()
            residual = max(residual, (deformed.form - pulled.form).max_difference(gauge_term))
        return CheckResult.from_residual(CheckName.DEFORM, residual, tolerance, table=table)

    def _zeta(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        zeta = zeta_form(setup)
        values = zeta.evaluate(self.model.chart.sample_points)
        residual = 0.0
        if values.size:
            residual = float(np.max(np.sqrt(np.sum(
                np.square(setup.splitting.project_g(values)), axis=(-2, -1)))))
        table: Dict = {"components": _form_table(zeta), "is_zero": zeta.is_zero}

        if self.model.connection is not None:
            extended = extend_connection_rep(self.model.connection, setup)
            deformed = deform_connection(self.model.connection, setup)
            residual = max(residual, (extended - deformed.form).max_difference(zeta))

        phi = setup.h.field.scalar_factor()
        if phi is not None:
            symbols = coordinate_symbols(self.model.chart.dim)
            n = setup.h.matrix_size
            log_derivative = {(i,): sp.diff(sp.log(phi), symbols[i]) * sp.eye(n)
                              for i in range(self.model.chart.dim)}
            # h*mu = d log(phi) 1 exactly; only its m-part survives in zeta
            expected = LieValuedForm(self.model.chart, 1, n, log_derivative).apply_linear_map(
                setup.splitting.matrix_projector_m
            )
            mismatch = zeta.max_difference(expected)
            table["dlog_phi_residual"] = mismatch
            residual = max(residual, mismatch)
        return CheckResult.from_residual(CheckName.ZETA, residual, tolerance, table=table)

    def _torsion(self, tolerance: float) -> CheckResult:
        split = self.model.split
        A0 = self.model.reference
        torsion = intrinsic_torsion(A0, split)
        values = torsion.evaluate(self.model.chart.sample_points)
        residual = float(np.max(np.sqrt(np.sum(
            np.square(split.project_g(values)), axis=(-2, -1))))) if values.size else 0.0
        if split.sub.dimension == 0:
            residual = max(residual, torsion.max_difference(A0.with_value_algebra(None)))
        table = {"max_norm": torsion.max_norm(), "components": _form_table(torsion)}
        return CheckResult.from_residual(CheckName.TORSION, residual, tolerance, table=table)

    def _torsion_change(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        A0 = self.model.reference
        A0p = self.model.deformed_reference(setup)
        points = self.model.chart.sample_points
        formula = torsion_change(A0, A0p, setup).evaluate(points)
        direct = torsion_change_direct(A0, A0p, setup, points)
        delta = np.sqrt(np.sum(np.square(formula - direct), axis=(-2, -1)))
        worst = np.unravel_index(int(np.argmax(delta)), delta.shape) if delta.size else (0,)
        residual = float(np.max(delta)) if delta.size else 0.0
        magnitude = float(np.max(np.sqrt(np.sum(np.square(formula), axis=(-2, -1))))) if formula.size else 0.0
        return CheckResult.from_residual(
            CheckName.TORSION_CHANGE, residual, tolerance,
            point=points[worst[0]].tolist(), table={"max_norm": magnitude},
        )

    def _instanton_split(self):
        sub = self.model.split.sub
        D = sub.matrix_size
        so_D = lie_algebra(f"so({D})")
        if self.model.split.ambient.dimension == so_D.dimension and all(
            np.max(np.abs(E + E.T)) <= self.model.split.tolerance for E in self.model.split.ambient.basis
        ):
            return self.model.split
        return build_splitting(so_D, sub)

    def _phi(self, tolerance: float) -> CheckResult:
        membership = validate_group_field(self.model.h)
        if not membership.holds:
            raise CheckFailure(membership.residual, message=f"h leaves {self.model.group.name}")
        split = self._instanton_split()
        verdict = instanton_bundle_preserved(self.model.h, split.sub, split, tolerance)
        return CheckResult.from_residual(CheckName.PHI, verdict.residual, tolerance)

    def _instanton(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        split = self._instanton_split()
        frame = self.model.frame or FrameField.identity(self.model.chart)
        F = self.model.gauge_field_strength
        before = instanton_check(F, frame, split.sub, split, self.model.gauge_algebra, tolerance)
        table: Dict = {"Q": before.holds, "Q_residuals": before.residual_table}
        residual, point = before.worst_residual, before.worst_point
        if setup.h.matrix_size == frame.dim:
            after = instanton_check(F, deformed_frame(frame, setup.h), split.sub, split,
                                    self.model.gauge_algebra, tolerance)
            table.update({"Q_prime": after.holds, "Q_prime_residuals": after.residual_table})
            if after.worst_residual > residual:
                residual, point = after.worst_residual, after.worst_point
        return CheckResult.from_residual(CheckName.INSTANTON, residual, tolerance,
                                         point=point, table=table)

    def _metric_compat(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        A, frame = self.model.connection, self.model.frame
        residual = metric_compatibility_residual(A, frame)
        table = {"original": residual}
        if setup.h.matrix_size == frame.dim:
            deformed = deform_connection(A, setup)
            after = metric_compatibility_residual(deformed, deformed_frame(frame, setup.h))
            table["deformed"] = after
            residual = max(residual, after)
        return CheckResult.from_residual(CheckName.METRIC_COMPAT, residual, tolerance, table=table)

    def _defining_section(self, tolerance: float) -> CheckResult:
        setup = self.setup()
        ds = self.model.defining_section
        verdict = defining_section_wellposedness(ds, setup)
        centre = np.array([0.5 * (lo + hi) for lo, hi in self.model.chart.bounds])
        table = {"tau_at_centre": deform_defining_section(ds, setup, centre).round(12).tolist()}
        return CheckResult.from_residual(CheckName.DEFINING_SECTION, verdict.residual,
                                         tolerance, table=table)
