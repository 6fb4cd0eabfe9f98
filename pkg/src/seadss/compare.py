"""Cell-by-cell comparison of the linear and causal interpretations.

For every (activity, receptor) pair the table holds the linear unit effect
next to the receptor probability under do({activity}).  A monotone
least-squares curve through the scatter identifies the cells on which the
two interpretations diverge the most, and the sign-agreement statistics
summarize whether they at least agree on the direction of the effect.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .causal import CombinationParams, DEFAULT_COMBINATION, build_program, \
    intervene, receptor_probabilities
from .linear import SignConvention, unit_receptor_effects
from .matrices import CoaxialMatrices

_NEUTRAL_EPS = 1e-12


@dataclass(frozen=True)
class ComparisonCell:
    activity_id: str
    receptor_id: str
    linear_value: float
    causal_prob: float


@dataclass(frozen=True)
class ComparisonTable:
    cells: tuple[ComparisonCell, ...]
    nope: int
    nric: int


def build_table(
    m: CoaxialMatrices,
    convention: SignConvention = SignConvention.POLARITY_SIGNED,
    combination_params: CombinationParams = DEFAULT_COMBINATION,
) -> ComparisonTable:
    """One cell per (activity, receptor): linear unit effect vs causal
    probability of the receptor when just that activity is performed."""
    effects = unit_receptor_effects(m, convention)
    base = build_program(m, combination_params=combination_params)
    cells = []
    for i, act in enumerate(m.activities):
        probs = receptor_probabilities(intervene(base, {act.id}))
        for k, rec in enumerate(m.receptors):
            cells.append(
                ComparisonCell(
                    activity_id=act.id,
                    receptor_id=rec.id,
                    linear_value=float(effects[i, k]),
                    causal_prob=probs[rec.id],
                )
            )
    return ComparisonTable(tuple(cells), nope=m.nope, nric=m.nric)


# ---------------------------------------------------------------------------
# Scatter export
# ---------------------------------------------------------------------------

SCATTER_HEADER = ("linear", "probability", "activity", "receptor")


def scatter_export(t: ComparisonTable) -> str:
    """Tabular text for plotting, linear value in the first column (x-axis),
    probability second (y-axis)."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SCATTER_HEADER)
    for c in t.cells:
        w.writerow(
            [f"{c.linear_value:.12g}", f"{c.causal_prob:.12g}",
             c.activity_id, c.receptor_id]
        )
    return out.getvalue()


def parse_scatter(text: str) -> ComparisonTable:
    """Read a scatter export back into a table (round-trip helper)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != SCATTER_HEADER:
        raise ValueError(f"unexpected scatter header: {rows[0] if rows else None!r}")
    cells = tuple(
        ComparisonCell(
            activity_id=act, receptor_id=rec,
            linear_value=float(lin), causal_prob=float(prob),
        )
        for lin, prob, act, rec in rows[1:]
    )
    acts = {c.activity_id for c in cells}
    recs = {c.receptor_id for c in cells}
    return ComparisonTable(cells, nope=len(acts), nric=len(recs))


# ---------------------------------------------------------------------------
# Divergence ranking
# ---------------------------------------------------------------------------


def isotonic_fit(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares nondecreasing fit of y against x (pool adjacent
    violators over the distinct x values, ties averaged)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]

    # Collapse duplicate x values to their weighted mean.
    uniq_x, start = np.unique(xs, return_index=True)
    groups = np.split(np.arange(len(xs)), start[1:])
    weights = np.array([len(g) for g in groups], dtype=float)
    means = np.array([ys[g].mean() for g in groups])

    # PAVA blocks: (weight, mean) merged while monotonicity is violated.
    block_w: list[float] = []
    block_v: list[float] = []
    block_n: list[int] = []
    for w, v in zip(weights, means):
        block_w.append(w)
        block_v.append(v)
        block_n.append(1)
        while len(block_v) > 1 and block_v[-2] > block_v[-1]:
            w2, v2, n2 = block_w.pop(), block_v.pop(), block_n.pop()
            w1, v1, n1 = block_w.pop(), block_v.pop(), block_n.pop()
            block_w.append(w1 + w2)
            block_v.append((w1 * v1 + w2 * v2) / (w1 + w2))
            block_n.append(n1 + n2)

    fitted_by_group = np.repeat(block_v, block_n)
    group_of_x = {ux: gi for gi, ux in enumerate(uniq_x)}
    return np.array([fitted_by_group[group_of_x[v]] for v in x])


@dataclass(frozen=True)
class DivergenceEntry:
    cell: ComparisonCell
    fitted: float
    residual: float


def divergence_rank(t: ComparisonTable) -> list[DivergenceEntry]:
    """Cells ordered by distance from the monotone curve, farthest first.

    Requires at least two distinct linear values; a table of identical
    cells has no curve to diverge from.
    """
    linear = np.array([c.linear_value for c in t.cells])
    prob = np.array([c.causal_prob for c in t.cells])
    if len({(c.linear_value, c.causal_prob) for c in t.cells}) < 2:
        raise ValueError("degenerate table: all cells identical")
    if len(set(linear.tolist())) < 2:
        raise ValueError("divergence ranking needs >= 2 distinct linear values")

    fitted = isotonic_fit(linear, prob)
    entries = [
        DivergenceEntry(cell=c, fitted=float(f), residual=float(abs(c.causal_prob - f)))
        for c, f in zip(t.cells, fitted)
    ]
    entries.sort(key=lambda e: (-e.residual, e.cell.activity_id, e.cell.receptor_id))
    return entries


# ---------------------------------------------------------------------------
# Sign agreement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignAgreement:
    n_cells: int
    n_agree: int
    n_positive_agree: int
    n_negative_agree: int
    n_neutral_agree: int
    disagreements: tuple[ComparisonCell, ...]

    @property
    def fraction_agree(self) -> float:
        return self.n_agree / self.n_cells if self.n_cells else 1.0

    def to_dict(self) -> dict:
        return {
            "n_cells": self.n_cells,
            "n_agree": self.n_agree,
            "fraction_agree": self.fraction_agree,
            "n_positive_agree": self.n_positive_agree,
            "n_negative_agree": self.n_negative_agree,
            "n_neutral_agree": self.n_neutral_agree,
            "disagreements": [
                {
                    "activity": c.activity_id,
                    "receptor": c.receptor_id,
                    "linear": c.linear_value,
                    "probability": c.causal_prob,
                }
                for c in self.disagreements
            ],
        }


def sign_agreement(t: ComparisonTable) -> SignAgreement:
    """Do the two interpretations agree on the direction of each effect?

    Agreement means positive linear value with probability above 0.5,
    negative with below, or a neutral pair (0 and 0.5).  Disagreements are
    reported, never suppressed: direction agreement is an empirical
    observation, not a theorem of the two models.
    """
    pos = neg = neu = 0
    disagreements = []
    for c in t.cells:
        lin_sign = 0 if abs(c.linear_value) <= _NEUTRAL_EPS else (
            1 if c.linear_value > 0 else -1)
        prob_sign = 0 if abs(c.causal_prob - 0.5) <= _NEUTRAL_EPS else (
            1 if c.causal_prob > 0.5 else -1)
        if lin_sign == prob_sign == 1:
            pos += 1
        elif lin_sign == prob_sign == -1:
            neg += 1
        elif lin_sign == prob_sign == 0:
            neu += 1
        else:
            disagreements.append(c)
    return SignAgreement(
        n_cells=len(t.cells),
        n_agree=pos + neg + neu,
        n_positive_agree=pos,
        n_negative_agree=neg,
        n_neutral_agree=neu,
        disagreements=tuple(disagreements),
    )
