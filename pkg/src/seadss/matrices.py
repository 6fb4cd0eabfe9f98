"""Coaxial matrix data model, validation, and file ingestion.

A matrix set links plan activities to environmental impacts (``mop``) and
impacts to environmental receptors (``mpr``).  Coefficients are reals in
[0, 1]; qualitative cells (null/low/medium/high) are converted through a
configurable level mapping.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

LEVEL_LABELS = ("null", "low", "medium", "high")

DEFAULT_LEVEL_VALUES = {"null": 0.0, "low": 0.25, "medium": 0.5, "high": 0.75}

ACTIVITY_CATEGORIES = (
    "infrastructures_plants",
    "buildings_land_use",
    "resource_extraction",
    "hydraulic_modifications",
    "industrial_transformations",
    "environmental_management",
)


class MatrixFormatError(Exception):
    """Raised when matrix/scenario source files cannot be ingested.

    Carries the full list of findings so callers can report every defect
    (with row/column locations) in one pass.
    """

    def __init__(self, findings: list[str]):
        self.findings = list(findings)
        super().__init__("; ".join(self.findings))


class UnknownEntityError(KeyError):
    """Raised when an operation references an id absent from the matrices."""


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class LevelMapping:
    """Conversion table from qualitative levels to coefficients in [0, 1]."""

    values: tuple[tuple[str, float], ...] = tuple(DEFAULT_LEVEL_VALUES.items())

    @cached_property
    def as_dict(self) -> dict[str, float]:
        return dict(self.values)

    @cached_property
    def image(self) -> frozenset[float]:
        return frozenset(v for _, v in self.values)

    def coefficient(self, label: str) -> float:
        key = label.strip().lower() or "null"
        if key not in self.as_dict:
            raise KeyError(label)
        return self.as_dict[key]

    @staticmethod
    def from_dict(d: Mapping[str, float]) -> "LevelMapping":
        unknown = set(d) - set(LEVEL_LABELS)
        if unknown:
            raise ValueError(f"unknown level labels: {sorted(unknown)}")
        merged = dict(DEFAULT_LEVEL_VALUES)
        merged.update({k: float(v) for k, v in d.items()})
        return LevelMapping(tuple(merged.items()))


DEFAULT_MAPPING = LevelMapping()


@dataclass(frozen=True)
class Activity:
    id: str
    name: str
    category: str
    magnitude_unit: str = ""


@dataclass(frozen=True)
class Impact:
    id: str
    name: str
    polarity: Polarity


@dataclass(frozen=True)
class Receptor:
    id: str
    name: str


@dataclass(frozen=True)
class CoaxialMatrices:
    """Immutable matrix set: activities x impacts (mop), impacts x receptors (mpr).

    Coefficient rows are stored as tuples so instances are hashable and
    compare by value; dense arrays are derived lazily.  The constructor is
    deliberately permissive -- ``validate`` reports invariant violations
    instead of refusing to build the object.
    """

    activities: tuple[Activity, ...]
    impacts: tuple[Impact, ...]
    receptors: tuple[Receptor, ...]
    mop: tuple[tuple[float, ...], ...]
    mpr: tuple[tuple[float, ...], ...]
    level_mapping: LevelMapping = DEFAULT_MAPPING
    strict_levels: bool = True

    @property
    def nope(self) -> int:
        return len(self.activities)

    @property
    def npre(self) -> int:
        return len(self.impacts)

    @property
    def nric(self) -> int:
        return len(self.receptors)

    @cached_property
    def mop_array(self) -> np.ndarray:
        a = np.array(self.mop, dtype=float).reshape(self.nope, self.npre)
        a.flags.writeable = False
        return a

    @cached_property
    def mpr_array(self) -> np.ndarray:
        a = np.array(self.mpr, dtype=float).reshape(self.npre, self.nric)
        a.flags.writeable = False
        return a

    @cached_property
    def activity_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.activities)

    @cached_property
    def impact_ids(self) -> tuple[str, ...]:
        return tuple(i.id for i in self.impacts)

    @cached_property
    def receptor_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.receptors)

    @cached_property
    def _activity_index(self) -> dict[str, int]:
        return {a.id: i for i, a in enumerate(self.activities)}

    @cached_property
    def _impact_index(self) -> dict[str, int]:
        return {imp.id: i for i, imp in enumerate(self.impacts)}

    @cached_property
    def _receptor_index(self) -> dict[str, int]:
        return {r.id: i for i, r in enumerate(self.receptors)}

    @cached_property
    def polarity_signs(self) -> np.ndarray:
        """+1 for positive impacts, -1 for negative, aligned with impact order."""
        s = np.array(
            [1.0 if i.polarity is Polarity.POSITIVE else -1.0 for i in self.impacts]
        )
        s.flags.writeable = False
        return s

    def activity_index(self, activity_id: str) -> int:
        try:
            return self._activity_index[activity_id]
        except KeyError:
            raise UnknownEntityError(f"unknown activity id: {activity_id!r}") from None

    def impact_index(self, impact_id: str) -> int:
        try:
            return self._impact_index[impact_id]
        except KeyError:
            raise UnknownEntityError(f"unknown impact id: {impact_id!r}") from None

    def receptor_index(self, receptor_id: str) -> int:
        try:
            return self._receptor_index[receptor_id]
        except KeyError:
            raise UnknownEntityError(f"unknown receptor id: {receptor_id!r}") from None


@dataclass(frozen=True)
class DemandGroup:
    """Lower bound on the total magnitude of a set of activities."""

    activity_ids: tuple[str, ...]
    lower_bound: float


@dataclass(frozen=True)
class Scenario:
    """Named assignment of magnitudes plus optional planning constraints.

    Activities absent from ``magnitudes`` have magnitude 0.  Limits cap
    receptor values from above; ``costs``/``budget`` bound total spending;
    each demand group requires a minimum combined magnitude.
    """

    name: str
    magnitudes: Mapping[str, float] = field(default_factory=dict)
    receptor_limits: Mapping[str, float] = field(default_factory=dict)
    costs: Mapping[str, float] | None = None
    budget: float | None = None
    demand_groups: tuple[DemandGroup, ...] = ()

    def __post_init__(self):
        for aid, mag in self.magnitudes.items():
            if mag < 0:
                raise ValueError(f"magnitude for {aid!r} must be >= 0, got {mag}")
        if self.budget is not None and self.budget < 0:
            raise ValueError(f"budget must be >= 0, got {self.budget}")
        if self.costs is not None:
            for aid, c in self.costs.items():
                if c < 0:
                    raise ValueError(f"cost for {aid!r} must be >= 0, got {c}")

    def magnitude(self, activity_id: str) -> float:
        return float(self.magnitudes.get(activity_id, 0.0))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    path: str = ""  # dotted field path when the finding maps to an input field


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def empty(self) -> bool:
        return not self.findings

    def add_error(self, code: str, message: str, path: str = "") -> None:
        self.findings.append(Finding("error", code, message, path))

    def add_warning(self, code: str, message: str, path: str = "") -> None:
        self.findings.append(Finding("warning", code, message, path))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "findings": [
                {"severity": f.severity, "code": f.code, "message": f.message,
                 "path": f.path}
                for f in self.findings
            ],
        }


def _check_unique(report: ValidationReport, kind: str, ids: Iterable[str]) -> None:
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            report.add_error("duplicate-id", f"duplicate {kind} id: {i!r}")
        seen.add(i)


def validate(m: CoaxialMatrices) -> ValidationReport:
    """Check every matrix-set invariant and return a report of violations.

    Errors cover range/shape/duplicate-id/polarity defects; all-zero rows
    and columns are reported as warnings.  The report is empty exactly
    when the matrix set is fully well-formed.
    """
    report = ValidationReport()

    _check_unique(report, "activity", (a.id for a in m.activities))
    _check_unique(report, "impact", (i.id for i in m.impacts))
    _check_unique(report, "receptor", (r.id for r in m.receptors))

    for a in m.activities:
        if a.category not in ACTIVITY_CATEGORIES:
            report.add_error(
                "unknown-category",
                f"activity {a.id!r} has unknown category {a.category!r}",
            )
    for imp in m.impacts:
        if not isinstance(imp.polarity, Polarity):
            report.add_error(
                "bad-polarity", f"impact {imp.id!r} has invalid polarity"
            )

    def check_grid(name, grid, nrows, ncols, row_ids, col_ids):
        if len(grid) != nrows:
            report.add_error(
                "shape-mismatch",
                f"{name} has {len(grid)} rows, expected {nrows}",
            )
        for ri, row in enumerate(grid):
            row_id = row_ids[ri] if ri < len(row_ids) else f"#{ri}"
            if len(row) != ncols:
                report.add_error(
                    "shape-mismatch",
                    f"{name} row {row_id!r} has {len(row)} cells, expected {ncols}",
                )
                continue
            for ci, v in enumerate(row):
                col_id = col_ids[ci] if ci < len(col_ids) else f"#{ci}"
                loc = f"{name}[{row_id}][{col_id}]"
                if not math.isfinite(v) or v < 0.0 or v > 1.0:
                    report.add_error(
                        "coefficient-range", f"{loc} = {v} outside [0, 1]"
                    )
                elif m.strict_levels and v not in m.level_mapping.image:
                    report.add_error(
                        "coefficient-not-in-mapping",
                        f"{loc} = {v} not a level-mapping value "
                        f"{sorted(m.level_mapping.image)}",
                    )

    check_grid("mop", m.mop, m.nope, m.npre, m.activity_ids, m.impact_ids)
    check_grid("mpr", m.mpr, m.npre, m.nric, m.impact_ids, m.receptor_ids)

    for label, value in m.level_mapping.values:
        if not 0.0 <= value <= 1.0:
            report.add_error(
                "mapping-range", f"level {label!r} maps to {value} outside [0, 1]"
            )

    if report.ok and m.nope and m.npre and m.nric:
        mop = m.mop_array
        mpr = m.mpr_array
        for i, a in enumerate(m.activities):
            if not mop[i].any():
                report.add_warning(
                    "zero-activity-row", f"activity {a.id!r} has no impacts"
                )
        for j, imp in enumerate(m.impacts):
            if not mop[:, j].any():
                report.add_warning(
                    "zero-impact-column", f"no activity causes impact {imp.id!r}"
                )
            if not mpr[j].any():
                report.add_warning(
                    "zero-impact-row", f"impact {imp.id!r} affects no receptor"
                )
        for k, r in enumerate(m.receptors):
            if not mpr[:, k].any():
                report.add_warning(
                    "zero-receptor-column", f"receptor {r.id!r} is unaffected"
                )

    return report


def validate_scenario(m: CoaxialMatrices, s: Scenario) -> ValidationReport:
    """Cross-reference a scenario against a matrix set.

    Findings carry dotted field paths (e.g. ``magnitudes.x``) so API
    consumers can map them back onto the offending input field.
    """
    report = ValidationReport()
    for aid in s.magnitudes:
        if aid not in m._activity_index:
            report.add_error("unknown-id", f"magnitudes.{aid}: unknown activity",
                             path=f"magnitudes.{aid}")
    for rid in s.receptor_limits:
        if rid not in m._receptor_index:
            report.add_error("unknown-id", f"receptor_limits.{rid}: unknown receptor",
                             path=f"receptor_limits.{rid}")
    if s.costs:
        for aid in s.costs:
            if aid not in m._activity_index:
                report.add_error("unknown-id", f"costs.{aid}: unknown activity",
                                 path=f"costs.{aid}")
    for gi, group in enumerate(s.demand_groups):
        if not group.activity_ids:
            report.add_error(
                "empty-demand-group", f"demand_groups[{gi}]: empty activity set",
                path=f"demand_groups.{gi}",
            )
        for aid in group.activity_ids:
            if aid not in m._activity_index:
                report.add_error(
                    "unknown-id", f"demand_groups[{gi}].{aid}: unknown activity",
                    path=f"demand_groups.{gi}.{aid}",
                )
    return report


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def _parse_cell(
    raw: str,
    mapping: LevelMapping,
    strict: bool,
    where: str,
    errors: list[str],
) -> float:
    text = raw.strip()
    if not text:
        return mapping.coefficient("null")
    lowered = text.lower()
    if lowered in mapping.as_dict:
        return mapping.as_dict[lowered]
    try:
        value = float(text)
    except ValueError:
        errors.append(f"{where}: unrecognized cell {raw!r}")
        return 0.0
    if not 0.0 <= value <= 1.0:
        errors.append(f"{where}: coefficient {value} outside [0, 1]")
        return 0.0
    if strict and value not in mapping.image:
        errors.append(
            f"{where}: numeric cell {value} not a level-mapping value "
            f"{sorted(mapping.image)}"
        )
        return 0.0
    return value


def _read_table(
    text: str,
    row_index: Mapping[str, int],
    col_index: Mapping[str, int],
    mapping: LevelMapping,
    strict: bool,
    name: str,
    errors: list[str],
) -> list[list[float]]:
    """Parse a delimiter-separated grid into a dense coefficient table.

    First row holds column ids (first cell ignored), first column holds
    row ids.  Cells may be level labels or decimals; missing rows/cells
    read as 0.  Ids are cross-referenced against the entity metadata.
    """
    grid = [[0.0] * len(col_index) for _ in range(len(row_index))]
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if any(cell.strip() for cell in r)]
    if not rows:
        errors.append(f"{name}: empty table")
        return grid

    header = rows[0]
    col_positions: list[int | None] = []
    for ci, col_id in enumerate(header[1:], start=1):
        cid = col_id.strip()
        if cid not in col_index:
            errors.append(f"{name} header column {ci}: unknown id {cid!r}")
            col_positions.append(None)
        else:
            col_positions.append(col_index[cid])

    seen_rows: set[str] = set()
    for ri, row in enumerate(rows[1:], start=2):
        row_id = row[0].strip()
        if row_id not in row_index:
            errors.append(f"{name} row {ri}: unknown id {row_id!r}")
            continue
        if row_id in seen_rows:
            errors.append(f"{name} row {ri}: duplicate row for id {row_id!r}")
            continue
        seen_rows.add(row_id)
        if len(row) - 1 > len(col_positions):
            errors.append(
                f"{name} row {ri} ({row_id!r}): {len(row) - 1} cells for "
                f"{len(col_positions)} columns"
            )
        for ci, raw in enumerate(row[1:]):
            if ci >= len(col_positions) or col_positions[ci] is None:
                continue
            where = f"{name} row {ri} ({row_id!r}), column {header[ci + 1].strip()!r}"
            grid[row_index[row_id]][col_positions[ci]] = _parse_cell(
                raw, mapping, strict, where, errors
            )
    return grid


def _source_text(source: str | Path) -> str:
    if isinstance(source, Path):
        return source.read_text()
    # Heuristic: multi-line strings are inline documents, otherwise a path.
    if "\n" not in source and Path(source).exists():
        return Path(source).read_text()
    return source


def load_matrices(
    activity_impact_table: str | Path,
    impact_receptor_table: str | Path,
    entities: str | Path | Mapping,
) -> CoaxialMatrices:
    """Build a validated matrix set from two tables plus entity metadata.

    Every ingestion defect (unknown id, out-of-mapping coefficient, shape
    problem) is collected with its row/column location and raised as a
    single :class:`MatrixFormatError`.
    """
    errors: list[str] = []

    if isinstance(entities, Mapping):
        meta = dict(entities)
    else:
        try:
            meta = json.loads(_source_text(entities))
        except json.JSONDecodeError as exc:
            raise MatrixFormatError([f"entities: invalid JSON ({exc})"]) from exc

    try:
        mapping = (
            LevelMapping.from_dict(meta["level_mapping"])
            if "level_mapping" in meta
            else DEFAULT_MAPPING
        )
    except ValueError as exc:
        raise MatrixFormatError([f"entities.level_mapping: {exc}"]) from exc
    strict = not bool(meta.get("allow_free_coefficients", False))

    activities = []
    for i, a in enumerate(meta.get("activities", [])):
        cat = a.get("category", "")
        if cat not in ACTIVITY_CATEGORIES:
            errors.append(
                f"entities.activities[{i}]: unknown category {cat!r} "
                f"(expected one of {', '.join(ACTIVITY_CATEGORIES)})"
            )
        activities.append(
            Activity(
                id=str(a["id"]),
                name=str(a.get("name", a["id"])),
                category=cat,
                magnitude_unit=str(a.get("unit", "")),
            )
        )
    impacts = []
    for i, imp in enumerate(meta.get("impacts", [])):
        pol = imp.get("polarity", "")
        if pol not in (Polarity.POSITIVE.value, Polarity.NEGATIVE.value):
            errors.append(f"entities.impacts[{i}]: invalid polarity {pol!r}")
            pol = Polarity.NEGATIVE.value
        impacts.append(
            Impact(id=str(imp["id"]), name=str(imp.get("name", imp["id"])),
                   polarity=Polarity(pol))
        )
    receptors = [
        Receptor(id=str(r["id"]), name=str(r.get("name", r["id"])))
        for r in meta.get("receptors", [])
    ]

    act_index = {a.id: i for i, a in enumerate(activities)}
    imp_index = {i.id: j for j, i in enumerate(impacts)}
    rec_index = {r.id: k for k, r in enumerate(receptors)}
    if len(act_index) != len(activities):
        errors.append("entities.activities: duplicate ids")
    if len(imp_index) != len(impacts):
        errors.append("entities.impacts: duplicate ids")
    if len(rec_index) != len(receptors):
        errors.append("entities.receptors: duplicate ids")

    mop = _read_table(
        _source_text(activity_impact_table),
        act_index, imp_index, mapping, strict, "activity_impact", errors,
    )
    mpr = _read_table(
        _source_text(impact_receptor_table),
        imp_index, rec_index, mapping, strict, "impact_receptor", errors,
    )

    if errors:
        raise MatrixFormatError(errors)

    return CoaxialMatrices(
        activities=tuple(activities),
        impacts=tuple(impacts),
        receptors=tuple(receptors),
        mop=tuple(tuple(row) for row in mop),
        mpr=tuple(tuple(row) for row in mpr),
        level_mapping=mapping,
        strict_levels=strict,
    )


def load_matrices_dir(directory: str | Path) -> CoaxialMatrices:
    """Load a matrix set from a directory holding the three standard files."""
    d = Path(directory)
    return load_matrices(
        d / "activity_impact.csv",
        d / "impact_receptor.csv",
        d / "entities.json",
    )


# ---------------------------------------------------------------------------
# Serialization (exact round trip)
# ---------------------------------------------------------------------------


def matrices_to_files(m: CoaxialMatrices) -> dict[str, str]:
    """Serialize to the three-file ingestion format, coefficient-exact.

    Cells are written as shortest exact decimal reprs, so loading the
    output reproduces the identical matrix set.
    """

    def table(row_ids, col_ids, grid):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["id", *col_ids])
        for rid, row in zip(row_ids, grid):
            w.writerow([rid, *[repr(v) for v in row]])
        return out.getvalue()

    entities = {
        "activities": [
            {"id": a.id, "name": a.name, "category": a.category, "unit": a.magnitude_unit}
            for a in m.activities
        ],
        "impacts": [
            {"id": i.id, "name": i.name, "polarity": i.polarity.value}
            for i in m.impacts
        ],
        "receptors": [{"id": r.id, "name": r.name} for r in m.receptors],
        "level_mapping": dict(m.level_mapping.values),
        "allow_free_coefficients": not m.strict_levels,
    }
    return {
        "activity_impact.csv": table(m.activity_ids, m.impact_ids, m.mop),
        "impact_receptor.csv": table(m.impact_ids, m.receptor_ids, m.mpr),
        "entities.json": json.dumps(entities, indent=2) + "\n",
    }


def save_matrices(m: CoaxialMatrices, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in matrices_to_files(m).items():
        (d / name).write_text(text)


# ---------------------------------------------------------------------------
# Scenario documents
# ---------------------------------------------------------------------------


def scenario_from_dict(doc: Mapping) -> Scenario:
    groups = tuple(
        DemandGroup(
            activity_ids=tuple(str(a) for a in g.get("activities", [])),
            lower_bound=float(g.get("lower_bound", 0.0)),
        )
        for g in doc.get("demand_groups", [])
    )
    costs = doc.get("costs")
    return Scenario(
        name=str(doc.get("name", "")),
        magnitudes={str(k): float(v) for k, v in doc.get("magnitudes", {}).items()},
        receptor_limits={
            str(k): float(v) for k, v in doc.get("receptor_limits", {}).items()
        },
        costs={str(k): float(v) for k, v in costs.items()} if costs else None,
        budget=float(doc["budget"]) if doc.get("budget") is not None else None,
        demand_groups=groups,
    )


def scenario_to_dict(s: Scenario) -> dict:
    doc: dict = {
        "name": s.name,
        "magnitudes": dict(s.magnitudes),
        "receptor_limits": dict(s.receptor_limits),
    }
    if s.costs is not None:
        doc["costs"] = dict(s.costs)
    if s.budget is not None:
        doc["budget"] = s.budget
    if s.demand_groups:
        doc["demand_groups"] = [
            {"activities": list(g.activity_ids), "lower_bound": g.lower_bound}
            for g in s.demand_groups
        ]
    return doc


def load_scenario(source: str | Path) -> Scenario:
    try:
        doc = json.loads(_source_text(source))
    except json.JSONDecodeError as exc:
        raise MatrixFormatError([f"scenario: invalid JSON ({exc})"]) from exc
    if not isinstance(doc, dict):
        raise MatrixFormatError(["scenario: expected a JSON object"])
    try:
        return scenario_from_dict(doc)
    except (ValueError, TypeError, KeyError) as exc:
        raise MatrixFormatError([f"scenario: {exc}"]) from exc


def builder(
    activities: Iterable[tuple[str, str] | str],
    impacts: Iterable[tuple[str, str] | str],
    receptors: Iterable[str],
    mop: Iterable[Iterable[float]],
    mpr: Iterable[Iterable[float]],
    strict_levels: bool = False,
) -> CoaxialMatrices:
    """Compact constructor for tests and programmatic callers.

    Activities are ``id`` or ``(id, category)``; impacts are ``id`` (negative
    by default) or ``(id, polarity)``.  Coefficients are taken as-is, so
    ``strict_levels`` defaults to off.
    """

    def act(spec) -> Activity:
        if isinstance(spec, str):
            return Activity(spec, spec, ACTIVITY_CATEGORIES[0])
        aid, cat = spec
        return Activity(aid, aid, cat)

    def imp(spec) -> Impact:
        if isinstance(spec, str):
            return Impact(spec, spec, Polarity.NEGATIVE)
        iid, pol = spec
        return Impact(iid, iid, Polarity(pol))

    return CoaxialMatrices(
        activities=tuple(act(a) for a in activities),
        impacts=tuple(imp(i) for i in impacts),
        receptors=tuple(Receptor(r, r) for r in receptors),
        mop=tuple(tuple(float(v) for v in row) for row in mop),
        mpr=tuple(tuple(float(v) for v in row) for row in mpr),
        strict_levels=strict_levels,
    )
