from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

SPREAD_BOUND = 10.0
DRIFT_BOUND = 0.25


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


@dataclass
class VerificationReport:
    """Ratio statistics for one inequality at one parameter tuple.

    Passing is consistency evidence, not a proof: the largest ratio is
    finite, the ratios do not spread by more than ``spread_bound`` above
    their median, and refining the grid moves no ratio by more than
    ``drift_bound`` (relative).
    """

    lemma: str
    direction: str
    params: dict
    ratios: list
    ratios_refined: list
    probe: bool = False
    lower_bounded: bool = False
    spread_bound: float = SPREAD_BOUND
    drift_bound: float = DRIFT_BOUND
    grid: dict = field(default_factory=dict)

    @property
    def max(self) -> float:
        return float(np.max(self.ratios)) if self.ratios else float("nan")

    @property
    def min(self) -> float:
        return float(np.min(self.ratios)) if self.ratios else float("nan")

    @property
    def median(self) -> float:
        return float(np.median(self.ratios)) if self.ratios else float("nan")

    @property
    def spread(self) -> float:
        med = self.median
        return self.max / med if med > 0 else float("inf")

    @property
    def lower_spread(self) -> float:
        return self.median / self.min if self.min > 0 else float("inf")

    @property
    def drift(self) -> float:
        if not self.ratios_refined:
            return 0.0
        a = np.asarray(self.ratios, dtype=float)
        b = np.asarray(self.ratios_refined, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(a > 0, np.abs(b - a) / a, np.where(b == a, 0.0, np.inf))
        return float(rel.max())

    @property
    def passed(self) -> bool:
        ok = bool(np.isfinite(self.max)) and self.spread < self.spread_bound and self.drift < self.drift_bound
        if self.lower_bounded:
            ok = ok and self.lower_spread < self.spread_bound
        return ok

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "direction": self.direction,
            "params": {k: _num(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v
                       for k, v in self.params.items()},
            "grid": self.grid,
            "probe": self.probe,
            "ratios": [_num(r) for r in self.ratios],
            "ratios_refined": [_num(r) for r in self.ratios_refined],
            "max": _num(self.max),
            "min": _num(self.min),
            "median": _num(self.median),
            "spread": _num(self.spread),
            "drift": _num(self.drift),
            "lower_bounded": self.lower_bounded,
            "passed": self.passed,
        }

    def summary_line(self) -> str:
        tag = "PROBE" if self.probe else ("PASS" if self.passed else "FAIL")
        params = ",".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        return (
            f"[{tag}] {self.lemma}/{self.direction} ({params}) d={self.grid.get('d')}: "
            f"max={self.max:.4g} spread={self.spread:.3g} drift={self.drift:.2e}"
        )


def _fmt(v):
    return f"{v:g}" if isinstance(v, float) else str(v)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lemma", "direction", "d", "params", "probe", "member", "ratio", "ratio_refined"])
    for r in reports:
        params = ";".join(f"{k}={_fmt(v)}" for k, v in r.params.items())
        refined = r.ratios_refined or [float("nan")] * len(r.ratios)
        for i, (a, b) in enumerate(zip(r.ratios, refined)):
            w.writerow([r.lemma, r.direction, r.grid.get("d"), params, int(r.probe), i, repr(float(a)), repr(float(b))])
    return buf.getvalue()
