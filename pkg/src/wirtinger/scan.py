"""Phase-diagram scans over ``(p, q, r)`` grids.

Each cell minimizes J and compares the observed class (``mu_star`` above or
below ``OBSERVED_MU_TOL``) with the threshold prediction.  Cells are
independent, keyed by their index in the ``(r, p, q)``-ordered grid, and
appended to an optional JSON-lines checkpoint as they finish so that an
interrupted scan can be resumed.
"""

from __future__ import annotations

import itertools
import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import BoundaryWarning
from .jfun import minimize_j
from .params import ASYMMETRIC, SYMMETRIC, classify, derive
from .quad import DEFAULT_SPEC, QuadratureSpec

OBSERVED_MU_TOL = 1e-6
RESOLUTION_BAND = 0.05
CSV_HEADER = (
    "index", "p", "q", "r", "mu_star", "j_at_zero", "j_min",
    "lambda_w", "lambda_p", "predicted", "observed", "agree", "in_band",
)


@dataclass(frozen=True)
class ScanCell:
    index: int
    p: float
    q: float
    r: float
    mu_star: float
    j_at_zero: float
    j_min: float
    lambda_w: float
    lambda_p: float
    predicted: str
    observed: str
    agree: bool
    in_band: bool

    def row(self):
        return tuple(getattr(self, name) for name in CSV_HEADER)


def grid_points(p_values, q_values, r_values):
    """Cells sorted by ``(r, p, q)`` as ``(index, p, q, r)`` tuples."""
    pts = itertools.product(sorted(r_values), sorted(p_values), sorted(q_values))
    return [(i, float(p), float(q), float(r)) for i, (r, p, q) in enumerate(pts)]


def axis(lo: float, hi: float, steps: int):
    if steps < 1:
        raise ValueError("steps must be positive")
    if steps == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, steps)


def evaluate_cell(index: int, p: float, q: float, r: float, mu_max: float = 10.0, spec: QuadratureSpec = DEFAULT_SPEC) -> ScanCell:
    params = derive(p, q, r)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        res = minimize_j(params, mu_max, spec)
    cls = classify(params)
    observed = SYMMETRIC if res.mu_star <= OBSERVED_MU_TOL else ASYMMETRIC
    return ScanCell(
        index=index, p=p, q=q, r=r,
        mu_star=res.mu_star, j_at_zero=res.j_at_zero, j_min=res.j_min,
        lambda_w=res.lambda_w, lambda_p=res.lambda_p,
        predicted=cls.tag, observed=observed,
        agree=cls.tag == observed,
        in_band=abs(cls.margin) <= RESOLUTION_BAND,
    )


def _evaluate_packed(args):
    index, p, q, r, mu_max, spec = args
    return evaluate_cell(index, p, q, r, mu_max, spec)


def load_checkpoint(path: str) -> dict:
    """Completed cells from a JSON-lines checkpoint; a torn last line is ignored."""
    done = {}
    if not path or not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError:
                continue
            done[int(data["index"])] = ScanCell(**data)
    return done


def _checkpoint_line(cell: ScanCell) -> str:
    from .output import dumps

    return dumps(asdict(cell), indent=0)


def run_scan(
    points,
    mu_max: float = 10.0,
    spec: QuadratureSpec = DEFAULT_SPEC,
    threads: int = 1,
    checkpoint: Optional[str] = None,
):
    """Evaluate all cells, reusing any already present in ``checkpoint``."""
    done = load_checkpoint(checkpoint) if checkpoint else {}
    todo = [pt for pt in points if pt[0] not in done]
    torn = False
    if checkpoint and os.path.exists(checkpoint) and os.path.getsize(checkpoint) > 0:
        with open(checkpoint, "rb") as raw:
            raw.seek(-1, os.SEEK_END)
            torn = raw.read(1) != b"\n"
    fh = open(checkpoint, "a", encoding="utf-8") if checkpoint else None
    try:
        if torn:
            # keep a torn last line from swallowing the next record
            fh.write("\n")
        tasks = [(i, p, q, r, mu_max, spec) for i, p, q, r in todo]
        if threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = pool.map(_evaluate_packed, tasks, chunksize=max(1, len(tasks) // (4 * threads)))
                for cell in results:
                    done[cell.index] = cell
                    if fh:
                        fh.write(_checkpoint_line(cell) + "\n")
                        fh.flush()
        else:
            for task in tasks:
                cell = _evaluate_packed(task)
                done[cell.index] = cell
                if fh:
                    fh.write(_checkpoint_line(cell) + "\n")
                    fh.flush()
    finally:
        if fh:
            fh.close()
    wanted = [pt[0] for pt in points]
    return [done[i] for i in wanted]


def summary(cells) -> dict:
    outside = [c for c in cells if not c.in_band]
    return {
        "cells": len(cells),
        "agree": sum(c.agree for c in cells),
        "outside_band": len(outside),
        "agree_outside_band": sum(c.agree for c in outside),
        "all_agree_outside_band": all(c.agree for c in outside),
    }


def observed_boundaries(cells):
    """Per ``(r, p)`` row: last symmetric and first asymmetric ``q``.

    Returns dicts with the predicted threshold and whether it lies within
    one grid step of the observed transition.
    """
    rows = {}
    for c in cells:
        rows.setdefault((c.r, c.p), []).append(c)
    out = []
    for (r, p), row in sorted(rows.items()):
        row.sort(key=lambda c: c.q)
        qs = [c.q for c in row]
        step = (qs[-1] - qs[0]) / (len(qs) - 1) if len(qs) > 1 else 0.0
        first_asym = next((c.q for c in row if c.observed == ASYMMETRIC), None)
        sym = [c.q for c in row if c.observed == SYMMETRIC]
        last_sym = max(sym) if sym else None
        threshold = (2.0 * r - 1.0) * p
        if first_asym is None:
            ok = threshold >= qs[-1] - step
        elif last_sym is None:
            ok = threshold <= qs[0] + step
        else:
            ok = last_sym - step <= threshold <= first_asym + step and last_sym < first_asym
        out.append({"r": r, "p": p, "threshold": threshold, "last_symmetric_q": last_sym,
                    "first_asymmetric_q": first_asym, "grid_step": step, "within_one_step": ok})
    return out


def scan_region(p_values, q_values, r_values, **kwargs):
    """Evaluate the full ``(r, p, q)`` grid; keyword arguments go to :func:`run_scan`."""
    return run_scan(grid_points(p_values, q_values, r_values), **kwargs)
