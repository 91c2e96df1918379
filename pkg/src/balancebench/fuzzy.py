"""Mamdani fuzzy inference engine with fuzzy-PD and fuzzy-PD+I variants.

Each variable carries five sets with peaks evenly spaced at
{-W, -W/2, 0, W/2, W} over its universe of halfwidth W. Interior sets are
triangles whose feet sit on the neighboring peaks (50% overlap); the outer
sets are shoulders that saturate beyond their peaks. This layout makes the
five membership degrees sum to one everywhere.

Inference is the classic Mamdani pipeline: rule strength is the min of the
two input memberships, each fired output set is clipped at its strength,
clipped sets are aggregated pointwise by max, and the result is
defuzzified by centroid over a uniform 1001-point discretization of the
output universe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InputError

INPUT_LABELS = ("LN", "SN", "M", "SP", "LP")
OUTPUT_LABELS = ("HN", "N", "Z", "P", "HP")

GRID_POINTS = 1001
MIN_AREA = 1e-12

VARIANT_PD = "pd"
VARIANT_PDI = "pdi"
VARIANTS = (VARIANT_PD, VARIANT_PDI)

# Default rule grid: rows follow the error-rate labels (LN, SN, M, SP, LP),
# columns follow the error labels in the same order. Deliberately not
# antisymmetric; transcribed as designed, asymmetries included.
DEFAULT_RULES = (
    ("HN", "N", "Z", "P", "P"),
    ("HN", "N", "Z", "HP", "HP"),
    ("HN", "HN", "Z", "HP", "HP"),
    ("HN", "N", "Z", "P", "HP"),
    ("N", "N", "Z", "P", "HP"),
)

DEFAULT_ERROR_HALFWIDTH = 0.5    # rad
DEFAULT_RATE_HALFWIDTH = 2.0     # rad/s
DEFAULT_OUTPUT_HALFWIDTH = 20.0  # force units
DEFAULT_INTEGRAL_GAIN = 0.8


@dataclass(frozen=True)
class FuzzyVariable:
    """Five-set linguistic variable over [-halfwidth, halfwidth]."""

    halfwidth: float
    labels: tuple[str, ...] = INPUT_LABELS

    def __post_init__(self) -> None:
        if not (math.isfinite(self.halfwidth) and self.halfwidth > 0.0):
            raise InputError(f"universe halfwidth must be positive, got {self.halfwidth}")
        if len(self.labels) != 5:
            raise InputError("a fuzzy variable needs exactly five sets")

    @property
    def peaks(self) -> tuple[float, ...]:
        w = self.halfwidth
        return (-w, -w / 2.0, 0.0, w / 2.0, w)


def membership(var: FuzzyVariable, label: str, x: float) -> float:
    """Membership degree of x in the named set; shoulders saturate."""
    try:
        i = var.labels.index(label)
    except ValueError:
        raise InputError(f"unknown label {label!r}; expected one of {var.labels}") from None
    peaks = var.peaks
    peak = peaks[i]
    if i == 0:
        if x <= peak:
            return 1.0
        right = peaks[1]
        return (right - x) / (right - peak) if x < right else 0.0
    if i == len(peaks) - 1:
        if x >= peak:
            return 1.0
        left = peaks[-2]
        return (x - left) / (peak - left) if x > left else 0.0
    left, right = peaks[i - 1], peaks[i + 1]
    if x <= left or x >= right:
        return 0.0
    if x <= peak:
        return (x - left) / (peak - left)
    return (right - x) / (right - peak)


def _membership_grid(var: FuzzyVariable, label: str, xs: np.ndarray) -> np.ndarray:
    """Vectorized membership; elementwise identical to membership()."""
    try:
        i = var.labels.index(label)
    except ValueError:
        raise InputError(f"unknown label {label!r}; expected one of {var.labels}") from None
    peaks = var.peaks
    peak = peaks[i]
    if i == 0:
        right = peaks[1]
        ramp = (right - xs) / (right - peak)
        return np.where(xs <= peak, 1.0, np.where(xs < right, ramp, 0.0))
    if i == len(peaks) - 1:
        left = peaks[-2]
        ramp = (xs - left) / (peak - left)
        return np.where(xs >= peak, 1.0, np.where(xs > left, ramp, 0.0))
    left, right = peaks[i - 1], peaks[i + 1]
    up = (xs - left) / (peak - left)
    down = (right - xs) / (right - peak)
    inside = np.where(xs <= peak, up, down)
    return np.where((xs <= left) | (xs >= right), 0.0, inside)


@dataclass(frozen=True)
class RuleBase:
    """5x5 grid: rows indexed by rate label, columns by error label."""

    cells: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if len(self.cells) != 5 or any(len(row) != 5 for row in self.cells):
            raise InputError("rule base must be a 5x5 grid")
        for row in self.cells:
            for cell in row:
                if cell not in OUTPUT_LABELS:
                    raise InputError(f"unknown output label {cell!r}; expected one of {OUTPUT_LABELS}")

    def consequent(self, rate_label: str, error_label: str) -> str:
        return self.cells[INPUT_LABELS.index(rate_label)][INPUT_LABELS.index(error_label)]


def parse_rulebase(text: str) -> RuleBase:
    """Parse the plain-text rule grid: 5 lines of 5 tokens, '#' comments."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise InputError(f"rule line {lineno}: expected 5 tokens, got {len(tokens)}")
        rows.append(tuple(tokens))
    if len(rows) != 5:
        raise InputError(f"expected 5 rule lines, got {len(rows)}")
    return RuleBase(cells=tuple(rows))


def load_rulebase(path) -> RuleBase:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return parse_rulebase(handle.read())
    except OSError as exc:
        raise InputError(f"cannot read rule base file {path}: {exc}") from exc


@dataclass(frozen=True)
class FuzzyConfig:
    error_var: FuzzyVariable
    rate_var: FuzzyVariable
    output_var: FuzzyVariable
    rules: RuleBase
    variant: str = VARIANT_PD
    ki: float = DEFAULT_INTEGRAL_GAIN

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}")
        if not (math.isfinite(self.ki) and self.ki >= 0.0):
            raise InputError(f"ki must be finite and >= 0, got {self.ki}")


def default_config(variant: str = VARIANT_PD, *,
                   error_halfwidth: float = DEFAULT_ERROR_HALFWIDTH,
                   rate_halfwidth: float = DEFAULT_RATE_HALFWIDTH,
                   output_halfwidth: float = DEFAULT_OUTPUT_HALFWIDTH,
                   ki: float = DEFAULT_INTEGRAL_GAIN,
                   rules: RuleBase | None = None) -> FuzzyConfig:
    return FuzzyConfig(
        error_var=FuzzyVariable(error_halfwidth),
        rate_var=FuzzyVariable(rate_halfwidth),
        output_var=FuzzyVariable(output_halfwidth, labels=OUTPUT_LABELS),
        rules=rules if rules is not None else RuleBase(DEFAULT_RULES),
        variant=variant,
        ki=ki,
    )


class FiredRule(NamedTuple):
    rate_label: str
    error_label: str
    strength: float
    output_label: str


def fired_rules(cfg: FuzzyConfig, e: float, e_rate: float) -> list[FiredRule]:
    """All rules with positive strength for the given inputs."""
    fired = []
    for rate_label in INPUT_LABELS:
        mu_rate = membership(cfg.rate_var, rate_label, e_rate)
        if mu_rate <= 0.0:
            continue
        for error_label in INPUT_LABELS:
            mu_err = membership(cfg.error_var, error_label, e)
            if mu_err <= 0.0:
                continue
            strength = min(mu_rate, mu_err)
            fired.append(FiredRule(rate_label, error_label, strength,
                                   cfg.rules.consequent(rate_label, error_label)))
    return fired


def infer(cfg: FuzzyConfig, e: float, e_rate: float) -> float:
    """Mamdani inference: fuzzify, fire, clip, aggregate, centroid."""
    strengths: dict[str, float] = {}
    for rule in fired_rules(cfg, e, e_rate):
        prev = strengths.get(rule.output_label, 0.0)
        if rule.strength > prev:
            strengths[rule.output_label] = rule.strength
    if not strengths:
        return 0.0
    w = cfg.output_var.halfwidth
    xs = np.linspace(-w, w, GRID_POINTS)
    aggregated = np.zeros(GRID_POINTS)
    for label, strength in strengths.items():
        clipped = np.minimum(strength, _membership_grid(cfg.output_var, label, xs))
        aggregated = np.maximum(aggregated, clipped)
    dx = 2.0 * w / (GRID_POINTS - 1)
    area = float(np.sum(aggregated)) * dx
    if area < MIN_AREA:
        return 0.0
    return float(np.dot(aggregated, xs) / np.sum(aggregated))


def fuzzy_control(cfg: FuzzyConfig, integral: float, e: float, e_rate: float,
                  dt: float) -> tuple[float, float]:
    """Controller output and updated integral state.

    The PD variant is the bare inference; PD+I adds a crisp integral term
    ki * sum(e*dt) outside the fuzzy map. PD leaves the integral untouched.
    """
    if not (dt > 0.0):
        raise InputError(f"dt must be positive, got {dt}")
    base = infer(cfg, e, e_rate)
    if cfg.variant == VARIANT_PD:
        return base, integral
    integral = integral + e * dt
    return base + cfg.ki * integral, integral
