"""Parameter sweeps over a two-parameter slice of the no-signaling set,
criterion boundary location by bisection, and catalog classification.

The default slice mixes three 3-party generators,

    p(gamma, epsilon) = gamma p_45 + epsilon p_D + (1 - gamma - epsilon) p_W,

with p_45 the XOR-game extremal box, p_D the deterministic all-zeros box and
p_W white noise.  `epsilon` here is always the slice mixing weight; channel
noise is a separate knob named epsilon_channel throughout.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

from .behaviors import Behavior, CatalogEntry, mix, named_box
from .criteria import (CriterionReport, eval_uffink, evaluate,
                       multicopy_orbit_max)

BISECTION_TOL = 1e-6
DEFAULT_GRID_STEP = 0.01

CSV_HEADER = ("gamma", "epsilon", "criterion", "lhs", "rhs", "margin",
              "violated")
BOUNDARY_HEADER = ("criterion", "epsilon", "gamma_star", "bracket_width")

REFERENCE_VIOLATORS = {
    "ic-multicopy": frozenset({35, 37, 38, 40, 41, 42, 43, 44, 45}),
    "uffink-3": frozenset({21, 22, 30, 34, 36, 39, 41, 44, 46}),
}


@dataclass(frozen=True)
class SliceSpec:
    """Generators (p_45-like, deterministic, white) plus grid and criteria."""

    generators: tuple[Behavior, Behavior, Behavior]
    gamma_step: float = DEFAULT_GRID_STEP
    epsilon_step: float = DEFAULT_GRID_STEP
    criteria: tuple[str, ...] = ("ic-multi", "ic-multicopy")

    def __post_init__(self) -> None:
        if len(self.generators) != 3:
            raise ValueError("a slice needs exactly 3 generators")
        parties = {g.parties for g in self.generators}
        if len(parties) != 1:
            raise ValueError("slice generators must share the party count")
        for step in (self.gamma_step, self.epsilon_step):
            if not 0.0 < step <= 1.0:
                raise ValueError(f"grid step must be in (0, 1], got {step}")

    @property
    def parties(self) -> int:
        return self.generators[0].parties


def default_slice(criteria: Sequence[str] = ("ic-multi", "ic-multicopy"),
                  gamma_step: float = DEFAULT_GRID_STEP,
                  epsilon_step: float = DEFAULT_GRID_STEP) -> SliceSpec:
    return SliceSpec(
        generators=(named_box("box45", parties=3),
                    named_box("deterministic-zero", parties=3),
                    named_box("white", parties=3)),
        gamma_step=gamma_step, epsilon_step=epsilon_step,
        criteria=tuple(criteria))


def slice_point(spec: SliceSpec, gamma: float, epsilon: float) -> Behavior:
    if gamma < 0.0 or epsilon < 0.0 or gamma + epsilon > 1.0 + 1e-12:
        raise ValueError(f"need gamma, epsilon >= 0 with gamma + epsilon <= 1,"
                         f" got ({gamma}, {epsilon})")
    rest = max(0.0, 1.0 - gamma - epsilon)
    g45, g_det, g_white = spec.generators
    return mix(((gamma, g45), (epsilon, g_det), (rest, g_white)))


@dataclass(frozen=True)
class ScanRow:
    gamma: float
    epsilon: float
    criterion: str
    lhs: float
    rhs: float
    margin: float
    violated: bool


def _grid(step: float) -> list[float]:
    count = int(round(1.0 / step))
    return [round(i * step, 12) for i in range(count + 1) if i * step <= 1.0 + 1e-9]


def _eval_point(spec: SliceSpec, criterion: str, gamma: float, epsilon: float,
                depth: int | None, epsilon_channel: float | None
                ) -> CriterionReport:
    box = slice_point(spec, gamma, epsilon)
    return evaluate(criterion, box, depth=depth, epsilon=epsilon_channel)


def scan_slice(spec: SliceSpec, *, depth: int | None = None,
               epsilon_channel: float | None = None) -> list[ScanRow]:
    """Evaluate every listed criterion at every admissible grid point.

    Rows come back sorted by (epsilon, gamma, criterion).  Points with
    gamma + epsilon > 1 are outside the simplex and skipped.
    """
    rows = []
    for eps in _grid(spec.epsilon_step):
        for gamma in _grid(spec.gamma_step):
            if gamma + eps > 1.0 + 1e-9:
                continue
            for criterion in spec.criteria:
                rep = _eval_point(spec, criterion, gamma, eps, depth,
                                  epsilon_channel)
                rows.append(ScanRow(gamma, eps, criterion, rep.lhs, rep.rhs,
                                    rep.margin, rep.violated))
    rows.sort(key=lambda r: (r.epsilon, r.gamma, r.criterion))
    return rows


def write_scan_csv(rows: Iterable[ScanRow], stream: io.TextIOBase) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([f"{r.gamma:.12g}", f"{r.epsilon:.12g}", r.criterion,
                         f"{r.lhs:.12g}", f"{r.rhs:.12g}", f"{r.margin:.12g}",
                         "true" if r.violated else "false"])


def bisect_threshold(predicate: Callable[[float], bool], lo: float, hi: float,
                     tol: float = BISECTION_TOL) -> tuple[float, float]:
    """Shrink [lo, hi] to width <= tol keeping predicate False at lo and
    True at hi.  The initial endpoints must already bracket the change."""
    if predicate(lo):
        raise ValueError(f"predicate already true at {lo}")
    if not predicate(hi):
        raise ValueError(f"predicate never turns true by {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


@dataclass(frozen=True)
class BoundaryPoint:
    criterion: str
    epsilon: float
    gamma_star: float | None
    bracket_width: float | None
    status: str  # "ok" or "no boundary on ray"


def boundary(spec: SliceSpec, criterion: str, epsilon: float,
             tol: float = BISECTION_TOL, *, depth: int | None = None,
             epsilon_channel: float | None = None) -> BoundaryPoint:
    """Critical gamma on the fixed-epsilon ray, located by bisection.

    The ray runs from gamma = 0 to gamma = 1 - epsilon.  A boundary is
    reported only when the criterion is satisfied at the bottom and violated
    at the top (certified bracket); anything else is "no boundary on ray".
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    hi_gamma = 1.0 - epsilon

    def is_violated(gamma: float) -> bool:
        return _eval_point(spec, criterion, gamma, epsilon, depth,
                           epsilon_channel).violated

    if is_violated(0.0) or not is_violated(hi_gamma):
        return BoundaryPoint(criterion, epsilon, None, None,
                             "no boundary on ray")
    lo, hi = bisect_threshold(is_violated, 0.0, hi_gamma, tol)
    return BoundaryPoint(criterion, epsilon, 0.5 * (lo + hi), hi - lo, "ok")


def write_boundary_csv(points: Iterable[BoundaryPoint],
                       stream: io.TextIOBase) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(BOUNDARY_HEADER)
    for p in points:
        if p.status == "ok":
            writer.writerow([p.criterion, f"{p.epsilon:.12g}",
                             f"{p.gamma_star:.12g}", f"{p.bracket_width:.12g}"])
        else:
            writer.writerow([p.criterion, f"{p.epsilon:.12g}",
                             p.status, ""])


@dataclass(frozen=True)
class ClassificationResult:
    """Per-class violation flags plus the comparison against the published
    violator rows.  Orbit maxima are used for both criteria so arbitrary
    labelings of the class representatives cannot hide a violation."""

    rows: dict[int, dict[str, CriterionReport]]
    criteria: tuple[str, ...]

    def violators(self, criterion: str) -> list[int]:
        return sorted(cid for cid, reps in self.rows.items()
                      if reps[criterion].violated)

    def diff_vs_reference(self) -> list[str]:
        """Labeled mismatch lines against the published rows; empty when every
        class present in the catalog agrees.  Classes absent from the catalog
        are reported as coverage gaps, not mismatches."""
        lines = []
        for criterion in self.criteria:
            want = REFERENCE_VIOLATORS.get(criterion)
            if want is None:
                continue
            for cid in sorted(self.rows):
                expect = cid in want
                got = self.rows[cid][criterion].violated
                if expect != got:
                    lines.append(
                        f"MISMATCH class {cid} {criterion}: reference says "
                        f"violated={str(expect).lower()}, computed "
                        f"violated={str(got).lower()}")
        return lines

    def coverage_gaps(self) -> list[int]:
        referenced = set()
        for criterion in self.criteria:
            referenced |= REFERENCE_VIOLATORS.get(criterion, frozenset())
        return sorted(referenced - set(self.rows))

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "criteria": list(self.criteria),
            "classes": {str(cid): {c: reps[c].to_json_obj()
                                   for c in self.criteria}
                        for cid, reps in sorted(self.rows.items())},
            "violators": {c: self.violators(c) for c in self.criteria},
            "reference_violators": {
                c: sorted(REFERENCE_VIOLATORS[c])
                for c in self.criteria if c in REFERENCE_VIOLATORS},
            "diff": self.diff_vs_reference(),
            "missing_classes": self.coverage_gaps(),
        }

    def text_table(self) -> str:
        head = ["class"] + [f"{c} (lhs)" for c in self.criteria]
        body = []
        for cid, reps in sorted(self.rows.items()):
            cells = [str(cid)]
            for c in self.criteria:
                rep = reps[c]
                mark = "violated" if rep.violated else "ok"
                cells.append(f"{mark} ({rep.lhs:.6g})")
            body.append(cells)
        widths = [max(len(row[i]) for row in [head] + body)
                  for i in range(len(head))]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        out = [fmt.format(*head)]
        out.extend(fmt.format(*row) for row in body)
        return "\n".join(out)


def classify_catalog(catalog: Sequence[CatalogEntry],
                     criteria: Sequence[str] = ("ic-multicopy", "uffink-3")
                     ) -> ClassificationResult:
    allowed = {"ic-multicopy", "uffink-3"}
    bad = set(criteria) - allowed
    if bad:
        raise ValueError(f"classification supports {sorted(allowed)}, "
                         f"got extra {sorted(bad)}")
    rows: dict[int, dict[str, CriterionReport]] = {}
    for entry in catalog:
        reps = {}
        for criterion in criteria:
            if criterion == "ic-multicopy":
                reps[criterion] = multicopy_orbit_max(entry.behavior)
            else:
                reps[criterion] = eval_uffink(entry.behavior)
        rows[entry.class_id] = reps
    return ClassificationResult(rows, tuple(criteria))
