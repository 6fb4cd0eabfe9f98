"""Shared fixtures: small hand-checkable matrix sets."""

import json

import pytest

from seadss import builder


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one PASS/FAIL line per acceptance criterion."""
    outcome = yield
    rep = outcome.get_result()
    label = getattr(item.function, "_criterion", None)
    if rep.when == "call" and label:
        writer = item.config.pluginmanager.get_plugin("terminalreporter")
        if writer is not None:
            verdict = "PASS" if rep.passed else "FAIL"
            writer.write_line(f"[{verdict}] {label}")


def criterion(label):
    """Tag an acceptance test with its human-readable criterion line."""

    def mark(fn):
        fn._criterion = label
        return fn

    return mark


@pytest.fixture()
def signed_matrices():
    """One activity hitting a negative and a positive impact.

    Unit footprint of ``a`` on ``r``: -0.5*0.75 + 0.25*0.5 = -0.25.
    """
    return builder(
        activities=["a"],
        impacts=[("n", "negative"), ("p", "positive")],
        receptors=["r"],
        mop=[[0.5, 0.25]],
        mpr=[[0.75], [0.5]],
    )


@pytest.fixture()
def two_activity_matrices():
    """Unit receptor effects (-0.25, +0.10) for the two activities."""
    return builder(
        activities=["a1", "a2"],
        impacts=[("n", "negative"), ("p", "positive")],
        receptors=["r"],
        mop=[[0.5, 0.25], [0.0, 0.2]],
        mpr=[[0.75], [0.5]],
    )


@pytest.fixture()
def chain_matrices():
    """Single positive chain: a -> p (0.5) -> r (0.75)."""
    return builder(
        activities=["a"],
        impacts=[("p", "positive")],
        receptors=["r"],
        mop=[[0.5]],
        mpr=[[0.75]],
    )


@pytest.fixture()
def movements_matrices():
    """Dangerous-materials logistics demo: two movement activities, a
    dispersion impact (0.75 from each), a work-opportunities impact, and a
    health receptor."""
    return builder(
        activities=["ext_mov", "int_mov"],
        impacts=[("disp", "negative"), ("work", "positive")],
        receptors=["health"],
        mop=[[0.75, 0.5], [0.75, 0.0]],
        mpr=[[0.25], [0.75]],
        strict_levels=True,
    )


DEMO_ENTITIES = {
    "activities": [
        {"id": "ext_mov", "name": "External movements of dangerous materials",
         "category": "industrial_transformations", "unit": "t"},
        {"id": "int_mov", "name": "Internal movements of dangerous materials",
         "category": "industrial_transformations", "unit": "t"},
    ],
    "impacts": [
        {"id": "disp", "name": "Dispersion of dangerous materials",
         "polarity": "negative"},
        {"id": "work", "name": "Creation of work opportunities",
         "polarity": "positive"},
    ],
    "receptors": [
        {"id": "health", "name": "Human health and wellbeing"},
    ],
}

DEMO_ACTIVITY_IMPACT = "id,disp,work\next_mov,high,medium\nint_mov,high,\n"
DEMO_IMPACT_RECEPTOR = "id,health\ndisp,low\nwork,high\n"


@pytest.fixture()
def demo_matrices_dir(tmp_path):
    """The movements fixture written in the on-disk ingestion format."""
    d = tmp_path / "matrices"
    d.mkdir()
    (d / "activity_impact.csv").write_text(DEMO_ACTIVITY_IMPACT)
    (d / "impact_receptor.csv").write_text(DEMO_IMPACT_RECEPTOR)
    (d / "entities.json").write_text(json.dumps(DEMO_ENTITIES, indent=2))
    return d
