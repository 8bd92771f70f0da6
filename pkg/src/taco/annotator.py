"""Assigning descriptive time-series classes from detector scores.

A :class:`ThresholdConfig` holds one rule per class (score name, comparison
direction, cutoff).  Paired classes (Rising/Falling, Linear/Nonlinear, ...)
are mutually exclusive; the config validator proves at load time that no
pair can fire together.  Cutoff pairs deliberately leave a gap band in which
neither class of a pair is assigned, so only confident classes make it into
captions.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .detectors import DetectorParams, ScoreVector, score_all
from .errors import InvalidConfig
from .signal import Series, minmax_normalize


class TimeSeriesClass(enum.Enum):
    """The 21 descriptive classes, in canonical display order."""

    RISING = "Rising"
    FALLING = "Falling"
    CONSTANT = "Constant"
    CONVEX = "Convex"
    CONCAVE = "Concave"
    LINEAR = "Linear"
    NONLINEAR = "Nonlinear"
    SMOOTH = "Smooth"
    NOISY = "Noisy"
    SIMPLE = "Simple"
    COMPLEX = "Complex"
    SPIKY = "Spiky"
    DROPOUT = "Dropout"
    PERIODIC = "Periodic"
    APERIODIC = "Aperiodic"
    SYMMETRY = "Symmetry"
    ASYMMETRY = "Asymmetry"
    STEP = "Step"
    NOSTEP = "NoStep"
    HIGH_AMPLITUDE = "HighAmplitude"
    LOW_AMPLITUDE = "LowAmplitude"

    @classmethod
    def from_name(cls, name: str) -> "TimeSeriesClass":
        for member in cls:
            if member.value == name:
                return member
        raise InvalidConfig(f"unknown time-series class: {name!r}")


#: Canonical ordering index, used to sort class sets for display and JSON.
CLASS_ORDER = {member: i for i, member in enumerate(TimeSeriesClass)}

#: Pairs of which at most one class may be assigned.
EXCLUSIVITY_GROUPS = (
    (TimeSeriesClass.RISING, TimeSeriesClass.FALLING),
    (TimeSeriesClass.CONVEX, TimeSeriesClass.CONCAVE),
    (TimeSeriesClass.LINEAR, TimeSeriesClass.NONLINEAR),
    (TimeSeriesClass.SIMPLE, TimeSeriesClass.COMPLEX),
    (TimeSeriesClass.PERIODIC, TimeSeriesClass.APERIODIC),
    (TimeSeriesClass.SYMMETRY, TimeSeriesClass.ASYMMETRY),
    (TimeSeriesClass.STEP, TimeSeriesClass.NOSTEP),
    (TimeSeriesClass.HIGH_AMPLITUDE, TimeSeriesClass.LOW_AMPLITUDE),
)

#: Classes a Constant assignment suppresses: a flat signal trivially fits a
#: line but must not be called rising or periodic.
CONSTANT_EXCLUDES = frozenset({
    TimeSeriesClass.RISING,
    TimeSeriesClass.FALLING,
    TimeSeriesClass.CONVEX,
    TimeSeriesClass.CONCAVE,
    TimeSeriesClass.NONLINEAR,
    TimeSeriesClass.PERIODIC,
})

#: Score names a rule may reference: the detector outputs plus the signed
#: curvature alias (sign times gap) used by the Convex/Concave pair.
RULE_SCORE_NAMES = frozenset({
    "trend", "constancy", "curvature", "curvature_sign", "linearity_mse",
    "smooth_mse", "noise_mse", "complexity", "spike_pos", "spike_neg",
    "periodicity_gap", "symmetry_err", "step_response", "amplitude_var",
    "curvature_signed",
})


@dataclass(frozen=True)
class ClassRule:
    """Fire the class when ``score <direction> cutoff``."""

    score: str
    direction: str  # "greater" | "less"
    cutoff: float

    def __post_init__(self):
        if self.score not in RULE_SCORE_NAMES:
            raise InvalidConfig(f"rule references unknown score {self.score!r}")
        if self.direction not in ("greater", "less"):
            raise InvalidConfig(
                f"rule direction must be 'greater' or 'less', got {self.direction!r}")
        if not math.isfinite(self.cutoff):
            raise InvalidConfig("rule cutoff must be finite")

    def fires(self, scores: dict) -> bool:
        value = scores[self.score]
        if self.direction == "greater":
            return value > self.cutoff
        return value < self.cutoff


#: Default decision rules.  Cutoffs are tuned so clean synthetic signals of
#: each class land comfortably on the right side; override via a config file
#: for other data distributions.
DEFAULT_RULES = {
    TimeSeriesClass.RISING: ClassRule("trend", "greater", 0.8),
    TimeSeriesClass.FALLING: ClassRule("trend", "less", -0.8),
    TimeSeriesClass.CONSTANT: ClassRule("constancy", "less", 0.02),
    TimeSeriesClass.CONVEX: ClassRule("curvature_signed", "greater", 0.005),
    TimeSeriesClass.CONCAVE: ClassRule("curvature_signed", "less", -0.005),
    TimeSeriesClass.LINEAR: ClassRule("linearity_mse", "less", 0.002),
    TimeSeriesClass.NONLINEAR: ClassRule("linearity_mse", "greater", 0.01),
    TimeSeriesClass.SMOOTH: ClassRule("smooth_mse", "less", 5e-4),
    TimeSeriesClass.NOISY: ClassRule("noise_mse", "greater", 5e-3),
    TimeSeriesClass.SIMPLE: ClassRule("complexity", "less", 0.01),
    TimeSeriesClass.COMPLEX: ClassRule("complexity", "greater", 0.05),
    TimeSeriesClass.SPIKY: ClassRule("spike_pos", "greater", 0.1),
    TimeSeriesClass.DROPOUT: ClassRule("spike_neg", "greater", 0.1),
    TimeSeriesClass.PERIODIC: ClassRule("periodicity_gap", "less", -0.005),
    TimeSeriesClass.APERIODIC: ClassRule("periodicity_gap", "greater", 0.005),
    TimeSeriesClass.SYMMETRY: ClassRule("symmetry_err", "less", 0.005),
    TimeSeriesClass.ASYMMETRY: ClassRule("symmetry_err", "greater", 0.02),
    TimeSeriesClass.STEP: ClassRule("step_response", "greater", 0.4),
    TimeSeriesClass.NOSTEP: ClassRule("step_response", "less", 0.1),
    TimeSeriesClass.HIGH_AMPLITUDE: ClassRule("amplitude_var", "greater", 0.05),
    TimeSeriesClass.LOW_AMPLITUDE: ClassRule("amplitude_var", "less", 0.01),
}


def _rules_can_overlap(a: ClassRule, b: ClassRule) -> bool:
    """Whether some score value satisfies both rules.

    Rules on different scores cannot be proven exclusive; they count as
    overlapping so exclusivity stays verifiable by construction.
    """
    if a.score != b.score:
        return True
    if a.direction == b.direction:
        return True
    greater, less = (a, b) if a.direction == "greater" else (b, a)
    return less.cutoff > greater.cutoff


@dataclass(frozen=True)
class ThresholdConfig:
    """A complete rule set: exactly one rule per class, exclusivity proven."""

    rules: dict

    def __post_init__(self):
        missing = [c.value for c in TimeSeriesClass if c not in self.rules]
        if missing:
            raise InvalidConfig(f"config missing rules for classes: {missing}")
        extra = [c for c in self.rules if not isinstance(c, TimeSeriesClass)]
        if extra:
            raise InvalidConfig(f"config contains unknown classes: {extra}")
        for first, second in EXCLUSIVITY_GROUPS:
            if _rules_can_overlap(self.rules[first], self.rules[second]):
                raise InvalidConfig(
                    f"rules for {first.value} and {second.value} can fire together")

    def to_json_dict(self) -> dict:
        return {
            cls.value: {
                "score": rule.score,
                "direction": rule.direction,
                "cutoff": rule.cutoff,
            }
            for cls, rule in sorted(self.rules.items(), key=lambda kv: CLASS_ORDER[kv[0]])
        }


def default_config() -> ThresholdConfig:
    return ThresholdConfig(rules=dict(DEFAULT_RULES))


def load_config(path: str | Path | None = None) -> ThresholdConfig:
    """Load a threshold config from JSON, or the embedded defaults.

    The file must map every class name to ``{score, direction, cutoff}``;
    unknown class names or rule keys are rejected.
    """
    if path is None:
        return default_config()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig("config must be a JSON object mapping class to rule")
    rules = {}
    for name, body in data.items():
        cls = TimeSeriesClass.from_name(name)
        if not isinstance(body, dict):
            raise InvalidConfig(f"rule for {name} must be an object")
        unknown = set(body) - {"score", "direction", "cutoff"}
        if unknown:
            raise InvalidConfig(f"rule for {name} has unknown keys: {sorted(unknown)}")
        try:
            rules[cls] = ClassRule(
                score=body["score"],
                direction=body["direction"],
                cutoff=float(body["cutoff"]),
            )
        except KeyError as exc:
            raise InvalidConfig(f"rule for {name} missing key {exc}") from exc
    return ThresholdConfig(rules=rules)


def assign_classes(scores: ScoreVector, cfg: ThresholdConfig) -> set[TimeSeriesClass]:
    """Apply every class rule to a score vector.

    Exclusivity of the paired classes holds by config construction; on top of
    that, a Constant assignment suppresses the trend/curvature/periodicity
    classes a flat signal should never carry.
    """
    values = scores.rule_values()
    assigned = {cls for cls, rule in cfg.rules.items() if rule.fires(values)}
    if TimeSeriesClass.CONSTANT in assigned:
        assigned -= CONSTANT_EXCLUDES
    return assigned


def sorted_classes(classes) -> list[TimeSeriesClass]:
    """Classes in canonical display order."""
    return sorted(classes, key=lambda c: CLASS_ORDER[c])


def class_names(classes) -> list[str]:
    return [c.value for c in sorted_classes(classes)]


def config_digest(params: DetectorParams, cfg: ThresholdConfig) -> str:
    """Stable short hash of detector params plus threshold rules."""
    payload = json.dumps(
        {"params": params.to_json_dict(), "thresholds": cfg.to_json_dict()},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Annotation:
    """Classes assigned to one series, with the scores that produced them."""

    series_id: str
    classes: frozenset
    scores: ScoreVector
    params_digest: str

    def class_names(self) -> list[str]:
        return class_names(self.classes)


def annotate(s: Series, p: DetectorParams | None = None,
             cfg: ThresholdConfig | None = None,
             series_id: str = "") -> Annotation:
    """Normalize, score and classify one raw series."""
    if p is None:
        p = DetectorParams()
    if cfg is None:
        cfg = default_config()
    if not isinstance(s, Series):
        s = Series(values=s)
    normalized = minmax_normalize(s)
    scores = score_all(normalized, p)
    classes = assign_classes(scores, cfg)
    return Annotation(
        series_id=series_id,
        classes=frozenset(classes),
        scores=scores,
        params_digest=config_digest(p, cfg),
    )
