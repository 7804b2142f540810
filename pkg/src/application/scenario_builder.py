"""Turns a Scenario entity into the domain objects the checks operate on."""

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import numpy as np

from ..domain.catalog import group_model, lie_algebra, representation
from ..domain.deform import (
    DeformationSetup,
    DefiningSectionModel,
    FrameField,
    LocalConnection,
    deformed_frame,
    levi_civita_connection,
    pullback_to_section,
)
from ..domain.entities import CheckName, FormComponents, Scenario, ToolkitConfiguration
from ..domain.exceptions import NormalDeformationError, ScenarioError
from ..domain.fields import Chart, GroupValuedField, LieValuedForm, field_strength
from ..domain.liealg import GroupModel, Invertibility, LieAlgebraModel, Splitting, build_splitting


REQUIREMENTS = {
    CheckName.DEFORM: ("connection",),
    CheckName.TORSION: ("reference",),
    CheckName.TORSION_CHANGE: ("reference",),
    CheckName.INSTANTON: ("gauge",),
    CheckName.METRIC_COMPAT: ("connection", "frame"),
    CheckName.DEFINING_SECTION: ("representation",),
}


def parse_form_key(key: str) -> Tuple[int, ...]:
    """'1' -> (1,), '1,2' -> (1, 2)."""
    try:
        return tuple(int(part) for part in str(key).split(","))
    except ValueError as e:
        raise ScenarioError(f"form component key '{key}' is not a list of coordinate indices") from e


def build_form(chart: Chart, degree: int, components: FormComponents,
               algebra: Optional[LieAlgebraModel], matrix_size: int) -> LieValuedForm:
    keyed = {parse_form_key(key): rows for key, rows in components.items()}
    for index in keyed:
        if len(index) != degree:
            raise ScenarioError(f"component {index} does not belong to a {degree}-form")
    return LieValuedForm.from_strings(chart, degree, keyed, algebra, matrix_size)


@dataclass(frozen=True, eq=False)
class ScenarioModel:
    """Domain objects for one scenario; derived references are built lazily."""

    scenario: Scenario
    chart: Chart
    split: Splitting
    group: GroupModel
    h: GroupValuedField
    connection: Optional[LocalConnection]
    explicit_reference: Optional[LieValuedForm]
    explicit_deformed_reference: Optional[LieValuedForm]
    frame: Optional[FrameField]
    defining_section: Optional[DefiningSectionModel]
    gauge_algebra: Optional[LieAlgebraModel]
    gauge_field_strength: Optional[LieValuedForm]

    @property
    def matrix_size(self) -> int:
        return self.split.matrix_size

    @property
    def is_metric(self) -> bool:
        """A frame is present and the structure acts on its tangent indices."""
        return self.frame is not None and self.frame.dim == self.matrix_size

    @cached_property
    def reference(self) -> Optional[LieValuedForm]:
        """A0: the explicit reference connection or the Levi-Civita connection of e."""
        if self.explicit_reference is not None:
            return self.explicit_reference
        if self.is_metric:
            return levi_civita_connection(self.frame, self.split)
        return None

    def deformed_reference(self, setup: DeformationSetup) -> Optional[LieValuedForm]:
        """A0' relative to s.

        Metric structures use the Levi-Civita connection of e h, moved from
        s' back to s by the section change h^{-1}.
        """
        if self.explicit_deformed_reference is not None:
            return self.explicit_deformed_reference
        if self.explicit_reference is None and self.is_metric:
            deformed_levi_civita = levi_civita_connection(deformed_frame(self.frame, setup.h), self.split)
            return pullback_to_section(deformed_levi_civita, setup.h_inverse)
        return self.reference


class ScenarioBuilder:
    """Builds ScenarioModel instances using the runtime configuration."""

    def __init__(self, config: ToolkitConfiguration):
        self.config = config

    # =========================================================================
    # BUILDING (High Priority)
    # =========================================================================

    def build(self, scenario: Scenario, grid: Optional[int] = None) -> ScenarioModel:
        try:
            return self._build(scenario, grid)
        except ScenarioError:
            raise
        except NormalDeformationError as e:
            raise ScenarioError(f"scenario '{scenario.name}': {e}") from e

    def _build(self, scenario: Scenario, grid: Optional[int]) -> ScenarioModel:
        n = len(scenario.h)
        if n == 0 or any(len(row) != n for row in scenario.h):
            raise ScenarioError("h must be a square matrix of expressions")

        chart = Chart.box(
            scenario.chart.bounds,
            grid or scenario.chart.grid or self.config.grid,
            random_points=self.config.random_points,
            seed=self.config.seed,
        )
        ambient = self._algebra(scenario.ambient, n)
        structure = self._algebra(scenario.structure, n)
        split = build_splitting(ambient, structure)
        group = self._group(scenario, ambient, n)
        h = GroupValuedField.from_strings(chart, scenario.h, group)

        connection = None
        if scenario.connection is not None:
            form = build_form(chart, 1, scenario.connection, structure, n)
            connection = LocalConnection(form)

        reference = deformed_reference = None
        if scenario.reference_connection is not None:
            reference = build_form(chart, 1, scenario.reference_connection, ambient, n)
        if scenario.deformed_reference_connection is not None:
            deformed_reference = build_form(chart, 1, scenario.deformed_reference_connection, ambient, n)

        frame = FrameField.from_strings(chart, scenario.frame) if scenario.frame else None

        defining_section = None
        if scenario.representation is not None:
            rep = representation(
                scenario.representation.name, n, np.asarray(scenario.representation.tau0, dtype=float)
            )
            defining_section = DefiningSectionModel(rep, structure)

        gauge_algebra = gauge_field_strength = None
        if scenario.gauge is not None:
            gauge_algebra = self._algebra(scenario.gauge.algebra, None)
            size = gauge_algebra.matrix_size
            if scenario.gauge.connection is not None:
                gauge_connection = build_form(chart, 1, scenario.gauge.connection, gauge_algebra, size)
                gauge_field_strength = field_strength(gauge_connection)
            else:
                gauge_field_strength = build_form(chart, 2, scenario.gauge.field_strength, gauge_algebra, size)

        model = ScenarioModel(
            scenario=scenario,
            chart=chart,
            split=split,
            group=group,
            h=h,
            connection=connection,
            explicit_reference=reference,
            explicit_deformed_reference=deformed_reference,
            frame=frame,
            defining_section=defining_section,
            gauge_algebra=gauge_algebra,
            gauge_field_strength=gauge_field_strength,
        )
        self._check_requirements(model)
        return model

    # =========================================================================
    # HELPER METHODS
    # =========================================================================

    def _algebra(self, ref, matrix_size: Optional[int]) -> LieAlgebraModel:
        if isinstance(ref, str):
            return lie_algebra(ref, matrix_size)
        basis = tuple(np.asarray(E, dtype=float) for E in ref.get("basis", []))
        size = basis[0].shape[0] if basis else ref.get("matrix_size", matrix_size)
        if size is None:
            raise ScenarioError(f"explicit algebra '{ref.get('name')}' needs a basis or matrix_size")
        return LieAlgebraModel(ref.get("name", "explicit"), int(size), basis)

    def _group(self, scenario: Scenario, ambient: LieAlgebraModel, n: int) -> GroupModel:
        if scenario.h_group is not None:
            return group_model(scenario.h_group, n)
        if isinstance(scenario.ambient, str):
            return group_model(scenario.ambient, n)
        return GroupModel(ambient.name.upper(), n, ambient, (Invertibility(),))

    def _check_requirements(self, model: ScenarioModel) -> None:
        available: Dict[str, bool] = {
            "connection": model.connection is not None,
            "reference": model.reference is not None,
            "frame": model.frame is not None,
            "gauge": model.gauge_field_strength is not None,
            "representation": model.defining_section is not None,
        }
        for check in model.scenario.checks:
            for requirement in REQUIREMENTS.get(check, ()):
                if not available[requirement]:
                    raise ScenarioError(
                        f"check '{check.value}' needs a {requirement} in scenario '{model.scenario.name}'"
                    )
