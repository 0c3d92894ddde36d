"""Reference curve tables: hiring probability against letter quality or
productivity, before and after the tool becomes available.

Three tables are produced:

* hiring vs. own letter quality h, pooled over access (the post curve is
  flatter than the pre curve);
* hiring vs. productivity q, separately for workers with and without
  access under post-tool beliefs (treated gain, control loss);
* hiring vs. productivity q ex ante, averaging over access (gains at low
  q, losses at high q).

Curves share one Monte Carlo draw block across grid points and regimes,
so pre/post differences and finite-difference slopes are estimated with
common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError
from .model import hire_prob_ex_ante, hire_prob_ex_ante_given_q, hire_prob_given_q
from .params import IntegrationConfig, ModelParams

AXIS_LETTER = "cover_letter_h"
AXIS_PRODUCTIVITY = "productivity_q"

DEFAULT_H_GRID = (-4.0, 4.0, 0.05)
DEFAULT_Q_GRID = (-3.0, 3.0, 0.05)


def parse_grid(spec) -> np.ndarray:
    """Expand a (min, max, step) triple into a grid; endpoint included."""
    try:
        lo, hi, step = (float(v) for v in spec)
    except (TypeError, ValueError) as exc:
        raise InputError(f"grid spec must be (min, max, step), got {spec!r}") from exc
    if not lo < hi:
        raise InputError(f"grid min must be < max, got {lo} >= {hi}")
    if not step > 0:
        raise InputError(f"grid step must be > 0, got {step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


@dataclass
class CurveTable:
    """Pre/post value pairs over a grid for one worker group."""

    axis: str
    group: str
    x: np.ndarray
    pre: np.ndarray
    post: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.pre = np.asarray(self.pre, dtype=float)
        self.post = np.asarray(self.post, dtype=float)
        if self.x.size == 0:
            raise InputError("empty grid")
        if self.x.size > 1 and not np.all(np.diff(self.x) > 0):
            raise InputError("grid must be strictly increasing")
        for name, v in (("pre", self.pre), ("post", self.post)):
            if v.shape != self.x.shape:
                raise InputError(f"{name} values misaligned with grid")
            if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
                raise InputError(f"{name} values must be probabilities in [0, 1]")

    def rows(self):
        return list(zip(self.x, self.pre, self.post))


def figure_curves(
    params: ModelParams,
    cfg: IntegrationConfig,
    h_grid=DEFAULT_H_GRID,
    q_grid=DEFAULT_Q_GRID,
) -> dict:
    """Compute all three reference curve tables.

    Returns {"letter": CurveTable, "by_access": [treated, control],
    "ex_ante": CurveTable}. Deterministic given cfg.seed.
    """
    h = parse_grid(h_grid)
    q = parse_grid(q_grid)
    pre_params = params.with_shift(0.0)

    letter = CurveTable(
        axis=AXIS_LETTER,
        group="pooled",
        x=h,
        pre=hire_prob_ex_ante(h, pre_params, cfg),
        post=hire_prob_ex_ante(h, params, cfg),
    )

    pre_q = np.asarray(hire_prob_given_q(q, 0, 0.0, pre_params, cfg))
    treated = CurveTable(
        axis=AXIS_PRODUCTIVITY,
        group="treated",
        x=q,
        pre=pre_q,
        post=hire_prob_given_q(q, 1, params.A, params, cfg),
    )
    control = CurveTable(
        axis=AXIS_PRODUCTIVITY,
        group="control",
        x=q,
        pre=pre_q,
        post=hire_prob_given_q(q, 0, params.A, params, cfg),
    )
    ex_ante = CurveTable(
        axis=AXIS_PRODUCTIVITY,
        group="ex_ante",
        x=q,
        pre=pre_q,
        post=hire_prob_ex_ante_given_q(q, params, cfg),
    )
    return {"letter": letter, "by_access": [treated, control], "ex_ante": ex_ante}


def write_curves_csv(path, tables: Sequence[CurveTable]) -> None:
    """Serialize tables as CSV rows axis,x,group,regime,value (10 sig. digits)."""
    lines = ["axis,x,group,regime,value"]
    for t in tables:
        for x, pre, post in t.rows():
            lines.append(f"{t.axis},{x:.10g},{t.group},pre,{pre:.10g}")
            lines.append(f"{t.axis},{x:.10g},{t.group},post,{post:.10g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
