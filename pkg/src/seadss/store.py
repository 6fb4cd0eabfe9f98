"""Workspace persistence: one matrix set plus named scenarios on disk.

Writes are crash-safe (temp file + atomic rename) and mutations serialize
per scenario id behind a lock registry; reads never take a lock.  Restarting
on the same directory reloads the identical state.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

from .matrices import (
    CoaxialMatrices,
    Scenario,
    load_matrices,
    scenario_from_dict,
    scenario_to_dict,
    validate,
)

_ID_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

MATRIX_FILES = ("activity_impact.csv", "impact_receptor.csv", "entities.json")


class DuplicateScenarioError(KeyError):
    pass


class StaleVersionError(RuntimeError):
    def __init__(self, scenario_id: str, expected: int, current: int):
        self.scenario_id = scenario_id
        self.expected = expected
        self.current = current
        super().__init__(
            f"scenario {scenario_id!r}: expected version {expected}, "
            f"current is {current}"
        )


class InvalidScenarioIdError(ValueError):
    pass


@dataclass(frozen=True)
class StoredScenario:
    id: str
    version: int
    scenario: Scenario


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class WorkspaceStore:
    """Single-workspace state: current matrices and a scenario collection."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.matrices_dir = self.root / "matrices"
        self.scenarios_dir = self.root / "scenarios"
        self.matrices_dir.mkdir(parents=True, exist_ok=True)
        self.scenarios_dir.mkdir(parents=True, exist_ok=True)

        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        self._scenarios: dict[str, StoredScenario] = {}
        self.matrices: CoaxialMatrices | None = None

        self._load_existing()

    # -- loading -----------------------------------------------------------

    def _load_existing(self) -> None:
        paths = [self.matrices_dir / name for name in MATRIX_FILES]
        if all(p.exists() for p in paths):
            self.matrices = load_matrices(paths[0], paths[1], paths[2])
        for path in sorted(self.scenarios_dir.glob("*.json")):
            doc = json.loads(path.read_text())
            stored = StoredScenario(
                id=doc["id"],
                version=int(doc["version"]),
                scenario=scenario_from_dict(doc["scenario"]),
            )
            self._scenarios[stored.id] = stored

    def _lock_for(self, scenario_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(scenario_id, threading.Lock())

    # -- matrices ----------------------------------------------------------

    def set_matrices(
        self, activity_impact: str, impact_receptor: str, entities: str | dict
    ) -> CoaxialMatrices:
        entities_text = (
            json.dumps(entities, indent=2) if isinstance(entities, dict) else entities
        )
        m = load_matrices(activity_impact, impact_receptor, entities_text)
        _atomic_write(self.matrices_dir / MATRIX_FILES[0], activity_impact)
        _atomic_write(self.matrices_dir / MATRIX_FILES[1], impact_receptor)
        _atomic_write(self.matrices_dir / MATRIX_FILES[2], entities_text)
        self.matrices = m
        return m

    def matrices_summary(self) -> dict:
        if self.matrices is None:
            return {"loaded": False}
        m = self.matrices
        return {
            "loaded": True,
            "nope": m.nope,
            "npre": m.npre,
            "nric": m.nric,
            "activities": [
                {"id": a.id, "name": a.name, "category": a.category,
                 "unit": a.magnitude_unit}
                for a in m.activities
            ],
            "impacts": [
                {"id": i.id, "name": i.name, "polarity": i.polarity.value}
                for i in m.impacts
            ],
            "receptors": [{"id": r.id, "name": r.name} for r in m.receptors],
            "validation": validate(m).to_dict(),
        }

    # -- scenarios ---------------------------------------------------------

    def _scenario_path(self, scenario_id: str) -> Path:
        return self.scenarios_dir / f"{scenario_id}.json"

    def _persist(self, stored: StoredScenario) -> None:
        doc = {
            "id": stored.id,
            "version": stored.version,
            "scenario": scenario_to_dict(stored.scenario),
        }
        _atomic_write(self._scenario_path(stored.id),
                      json.dumps(doc, indent=2, sort_keys=True) + "\n")

    @staticmethod
    def _check_id(scenario_id: str) -> None:
        if not _ID_PATTERN.match(scenario_id):
            raise InvalidScenarioIdError(
                f"scenario id {scenario_id!r} must match {_ID_PATTERN.pattern}"
            )

    def create_scenario(self, scenario_id: str, scenario: Scenario) -> StoredScenario:
        self._check_id(scenario_id)
        with self._lock_for(scenario_id):
            if scenario_id in self._scenarios:
                raise DuplicateScenarioError(scenario_id)
            stored = StoredScenario(scenario_id, 1, scenario)
            self._persist(stored)
            self._scenarios[scenario_id] = stored
            return stored

    def get_scenario(self, scenario_id: str) -> StoredScenario:
        return self._scenarios[scenario_id]

    def list_scenarios(self) -> list[StoredScenario]:
        return sorted(self._scenarios.values(), key=lambda s: s.id)

    def put_scenario(
        self,
        scenario_id: str,
        scenario: Scenario,
        expected_version: int | None = None,
    ) -> StoredScenario:
        """Replace a scenario; mutations to one id serialize, last writer wins.

        When ``expected_version`` is given, a mismatch raises
        :class:`StaleVersionError` instead (optimistic concurrency).
        """
        with self._lock_for(scenario_id):
            current = self._scenarios[scenario_id]
            if expected_version is not None and expected_version != current.version:
                raise StaleVersionError(scenario_id, expected_version, current.version)
            stored = StoredScenario(scenario_id, current.version + 1, scenario)
            self._persist(stored)
            self._scenarios[scenario_id] = stored
            return stored

    def delete_scenario(self, scenario_id: str) -> None:
        with self._lock_for(scenario_id):
            del self._scenarios[scenario_id]
            path = self._scenario_path(scenario_id)
            if path.exists():
                path.unlink()
