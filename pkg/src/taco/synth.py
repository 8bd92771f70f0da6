"""Synthetic labeled signals: named function shapes plus optional overlays.

Every base shape is a closed-form expression on the uniform grid over [0, 1]
with a unit value scale, so overlay magnitudes mean the same thing for every
shape.  Overlays are applied on top in a fixed order (noise, smoothing,
quantized steps, spikes) using a generator seeded from the spec, so a spec
fully determines its output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidSpec
from .signal import moving_average

DEFAULT_LENGTH = 2048

#: Fraction of samples at each edge where spikes are never placed, so the
#: detectors' edge padding cannot swallow them.
SPIKE_EDGE_MARGIN = 0.02

#: Base shape names in canonical order.
SHAPE_NAMES = (
    "Constant",
    "LinearIncrease",
    "LinearDecrease",
    "Concave",
    "Convex",
    "ExpGrowth",
    "ExpDecay",
    "InvExpGrowth",
    "InvExpDecay",
    "Sigmoid",
    "InvSigmoid",
    "Cubic",
    "NegCubic",
    "Gaussian",
    "InvGaussian",
    "Sinusoidal",
    "Square",
    "Sawtooth",
    "ReverseSawtooth",
    "Triangle",
)

#: Overlay names in canonical (application and caption) order.
OVERLAY_NAMES = (
    "Noisy",
    "Smooth",
    "Steppy",
    "PosSpiky",
    "NegSpiky",
    "PosNegSpiky",
)

FORWARD_BASE_CAPTIONS = {
    "Constant": "The signal is constant.",
    "LinearIncrease": "The signal increases linearly.",
    "LinearDecrease": "The signal decreases linearly.",
    "Concave": "The signal has a concave shape.",
    "Convex": "The signal has a convex shape.",
    "ExpGrowth": "The signal grows exponentially.",
    "ExpDecay": "The signal decays exponentially.",
    "InvExpGrowth": "The signal follows an inverted exponential growth curve.",
    "InvExpDecay": "The signal follows an inverted exponential decay curve.",
    "Sigmoid": "The signal follows a sigmoid curve.",
    "InvSigmoid": "The signal follows an inverted sigmoid curve.",
    "Cubic": "The signal follows a cubic curve.",
    "NegCubic": "The signal follows a negative cubic curve.",
    "Gaussian": "The signal follows a Gaussian curve.",
    "InvGaussian": "The signal follows an inverted Gaussian curve.",
    "Sinusoidal": "The signal follows a sinusoidal wave.",
    "Square": "The signal follows a square wave.",
    "Sawtooth": "The signal follows a sawtooth wave.",
    "ReverseSawtooth": "The signal follows a reverse sawtooth wave.",
    "Triangle": "The signal follows a triangle wave.",
}

FORWARD_OVERLAY_CAPTIONS = {
    "Noisy": "The signal contains a lot of noise.",
    "Smooth": "The signal has a smooth shape.",
    "Steppy": "The signal changes in step-like increments.",
    "PosSpiky": "The signal contains sudden positive spikes.",
    "NegSpiky": "The signal contains sudden negative spikes.",
    "PosNegSpiky": "The signal contains sudden positive and negative spikes.",
}


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic signal.

    ``shape_params`` hold the named knobs of the base shape (period count,
    center, width, steepness); ``overlays`` maps overlay name to its own
    parameter dict.  The seed drives every random choice inside
    :func:`generate`.
    """

    base_shape: str
    shape_params: dict = field(default_factory=dict)
    overlays: dict = field(default_factory=dict)
    length: int = DEFAULT_LENGTH
    seed: int = 0


@dataclass(frozen=True)
class SynthRecord:
    """A generated signal with its shape/overlay names and forward caption."""

    values: np.ndarray
    forward_classes: list
    caption: str


def _frac(x: np.ndarray) -> np.ndarray:
    return np.mod(x, 1.0)


def _shape_constant(t, params):
    return np.full_like(t, 0.5)


def _shape_linear_increase(t, params):
    return t.copy()


def _shape_linear_decrease(t, params):
    return 1.0 - t


def _shape_convex(t, params):
    c = params.get("center", 0.5)
    return (t - c) ** 2 / max(c * c, (1.0 - c) ** 2)


def _shape_concave(t, params):
    return 1.0 - _shape_convex(t, params)


def _shape_exp_growth(t, params):
    k = params.get("steepness", 3.0)
    return (np.exp(k * t) - 1.0) / (math.exp(k) - 1.0)


def _shape_exp_decay(t, params):
    k = params.get("steepness", 3.0)
    return (np.exp(-k * t) - math.exp(-k)) / (1.0 - math.exp(-k))


def _shape_inv_exp_growth(t, params):
    k = params.get("steepness", 3.0)
    return (1.0 - np.exp(-k * t)) / (1.0 - math.exp(-k))


def _shape_inv_exp_decay(t, params):
    k = params.get("steepness", 3.0)
    return (math.exp(k) - np.exp(k * t)) / (math.exp(k) - 1.0)


def _shape_sigmoid(t, params):
    k = params.get("steepness", 10.0)
    c = params.get("center", 0.5)
    raw = 1.0 / (1.0 + np.exp(-k * (t - c)))
    lo = 1.0 / (1.0 + math.exp(k * c))
    hi = 1.0 / (1.0 + math.exp(-k * (1.0 - c)))
    return (raw - lo) / (hi - lo)


def _shape_inv_sigmoid(t, params):
    return 1.0 - _shape_sigmoid(t, params)


def _shape_cubic(t, params):
    c = params.get("center", 0.5)
    return ((t - c) ** 3 + c ** 3) / ((1.0 - c) ** 3 + c ** 3)


def _shape_neg_cubic(t, params):
    return 1.0 - _shape_cubic(t, params)


def _shape_gaussian(t, params):
    c = params.get("center", 0.5)
    w = params.get("width", 0.15)
    return np.exp(-0.5 * ((t - c) / w) ** 2)


def _shape_inv_gaussian(t, params):
    return 1.0 - _shape_gaussian(t, params)


def _shape_sinusoidal(t, params):
    p = params.get("periods", 4)
    phase = params.get("phase", 0.0)
    return 0.5 + 0.5 * np.sin(2.0 * np.pi * p * t + phase)


def _shape_square(t, params):
    p = params.get("periods", 4)
    return np.where(_frac(p * t) < 0.5, 1.0, 0.0)


def _shape_sawtooth(t, params):
    p = params.get("periods", 4)
    return _frac(p * t)


def _shape_reverse_sawtooth(t, params):
    p = params.get("periods", 4)
    return 1.0 - _frac(p * t)


def _shape_triangle(t, params):
    p = params.get("periods", 2)
    return 1.0 - np.abs(1.0 - 2.0 * _frac(p * t))


_SHAPE_FUNCS = {
    "Constant": _shape_constant,
    "LinearIncrease": _shape_linear_increase,
    "LinearDecrease": _shape_linear_decrease,
    "Concave": _shape_concave,
    "Convex": _shape_convex,
    "ExpGrowth": _shape_exp_growth,
    "ExpDecay": _shape_exp_decay,
    "InvExpGrowth": _shape_inv_exp_growth,
    "InvExpDecay": _shape_inv_exp_decay,
    "Sigmoid": _shape_sigmoid,
    "InvSigmoid": _shape_inv_sigmoid,
    "Cubic": _shape_cubic,
    "NegCubic": _shape_neg_cubic,
    "Gaussian": _shape_gaussian,
    "InvGaussian": _shape_inv_gaussian,
    "Sinusoidal": _shape_sinusoidal,
    "Square": _shape_square,
    "Sawtooth": _shape_sawtooth,
    "ReverseSawtooth": _shape_reverse_sawtooth,
    "Triangle": _shape_triangle,
}

_PERIODIC_SHAPES = {"Sinusoidal", "Square", "Sawtooth", "ReverseSawtooth", "Triangle"}


def _spike_positions(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    margin = max(1, int(round(SPIKE_EDGE_MARGIN * n)))
    candidates = np.arange(margin, n - margin)
    count = min(count, candidates.size)
    return np.sort(rng.choice(candidates, size=count, replace=False))


def _apply_overlay(values: np.ndarray, name: str, params: dict,
                   rng: np.random.Generator) -> np.ndarray:
    n = values.size
    if name == "Noisy":
        magnitude = float(params.get("magnitude", 0.2))
        if not 0.0 <= magnitude <= 0.5:
            raise InvalidSpec(f"noise magnitude must be in [0, 0.5], got {magnitude}")
        return values + rng.uniform(-magnitude, magnitude, n)
    if name == "Smooth":
        window = max(3, int(round(float(params.get("window_frac", 0.02)) * n)))
        return moving_average(values, min(window, n))
    if name == "Steppy":
        count = int(params.get("count", 2))
        if count < 1:
            raise InvalidSpec(f"step count must be >= 1, got {count}")
        return np.round(values * count) / count
    if name in ("PosSpiky", "NegSpiky", "PosNegSpiky"):
        amplitude = float(params.get("amplitude", 0.5))
        count = int(params.get("count", 3))
        if count < 1:
            raise InvalidSpec(f"spike count must be >= 1, got {count}")
        out = values.copy()
        positions = _spike_positions(rng, n, count)
        if name == "PosSpiky":
            out[positions] += amplitude
        elif name == "NegSpiky":
            out[positions] -= amplitude
        else:
            signs = np.where(np.arange(positions.size) % 2 == 0, 1.0, -1.0)
            out[positions] += signs * amplitude
        return out
    raise InvalidSpec(f"unknown overlay: {name!r}")


def _validate_spec(spec: SynthSpec) -> None:
    if spec.base_shape not in _SHAPE_FUNCS:
        raise InvalidSpec(f"unknown base shape: {spec.base_shape!r}")
    for name in spec.overlays:
        if name not in OVERLAY_NAMES:
            raise InvalidSpec(f"unknown overlay: {name!r}")
    if spec.base_shape in _PERIODIC_SHAPES:
        if spec.shape_params.get("periods", 1) < 1:
            raise InvalidSpec("period count must be >= 1 for periodic shapes")
    if spec.length < 2:
        raise InvalidSpec(f"length must be >= 2, got {spec.length}")


def forward_caption(spec: SynthSpec) -> str:
    """Caption derived from the shape and overlay names, canonical order."""
    _validate_spec(spec)
    sentences = [FORWARD_BASE_CAPTIONS[spec.base_shape]]
    for name in OVERLAY_NAMES:
        if name in spec.overlays:
            sentences.append(FORWARD_OVERLAY_CAPTIONS[name])
    return " ".join(sentences)


def forward_class_names(spec: SynthSpec) -> list[str]:
    return [spec.base_shape] + [n for n in OVERLAY_NAMES if n in spec.overlays]


def generate(spec: SynthSpec) -> SynthRecord:
    """Evaluate a spec into a signal, fully determined by the spec itself."""
    _validate_spec(spec)
    t = np.linspace(0.0, 1.0, spec.length)
    values = np.asarray(_SHAPE_FUNCS[spec.base_shape](t, spec.shape_params), dtype=float)
    rng = np.random.default_rng(spec.seed)
    for name in OVERLAY_NAMES:
        if name in spec.overlays:
            values = _apply_overlay(values, name, spec.overlays[name], rng)
    return SynthRecord(
        values=values,
        forward_classes=forward_class_names(spec),
        caption=forward_caption(spec),
    )


#: Sampling ranges for shape parameters, one entry per knob.
_PARAM_RANGES = {
    "center": (0.25, 0.75),
    "sigmoid_center": (0.35, 0.65),
    "cubic_center": (0.4, 0.6),
    "width": (0.05, 0.3),
    "exp_steepness": (2.0, 5.0),
    "sigmoid_steepness": (5.0, 20.0),
    "periods": (1, 8),
    "triangle_periods": (1, 4),
    "noise_magnitude": (0.05, 0.5),
    "smooth_window_frac": (0.01, 0.05),
    "spike_amplitude": (0.3, 0.8),
    "spike_count": (1, 5),
    "step_count": (1, 4),
}

#: Probability that each overlay is present in a sampled spec.
OVERLAY_PROBABILITY = 0.3


def _sample_shape_params(rng: np.random.Generator, shape: str) -> dict:
    u = rng.uniform
    if shape in ("Convex", "Concave"):
        return {"center": float(u(*_PARAM_RANGES["center"]))}
    if shape in ("ExpGrowth", "ExpDecay", "InvExpGrowth", "InvExpDecay"):
        return {"steepness": float(u(*_PARAM_RANGES["exp_steepness"]))}
    if shape in ("Sigmoid", "InvSigmoid"):
        return {
            "steepness": float(u(*_PARAM_RANGES["sigmoid_steepness"])),
            "center": float(u(*_PARAM_RANGES["sigmoid_center"])),
        }
    if shape in ("Cubic", "NegCubic"):
        return {"center": float(u(*_PARAM_RANGES["cubic_center"]))}
    if shape in ("Gaussian", "InvGaussian"):
        return {
            "center": float(u(*_PARAM_RANGES["center"])),
            "width": float(u(*_PARAM_RANGES["width"])),
        }
    if shape == "Sinusoidal":
        lo, hi = _PARAM_RANGES["periods"]
        return {
            "periods": int(rng.integers(lo, hi + 1)),
            "phase": float(u(0.0, 2.0 * np.pi)),
        }
    if shape in ("Square", "Sawtooth", "ReverseSawtooth"):
        lo, hi = _PARAM_RANGES["periods"]
        return {"periods": int(rng.integers(lo, hi + 1))}
    if shape == "Triangle":
        lo, hi = _PARAM_RANGES["triangle_periods"]
        return {"periods": int(rng.integers(lo, hi + 1))}
    return {}


def _sample_overlay_params(rng: np.random.Generator, name: str) -> dict:
    u = rng.uniform
    if name == "Noisy":
        return {"magnitude": float(u(*_PARAM_RANGES["noise_magnitude"]))}
    if name == "Smooth":
        return {"window_frac": float(u(*_PARAM_RANGES["smooth_window_frac"]))}
    if name == "Steppy":
        lo, hi = _PARAM_RANGES["step_count"]
        return {"count": int(rng.integers(lo, hi + 1))}
    lo, hi = _PARAM_RANGES["spike_count"]
    return {
        "amplitude": float(u(*_PARAM_RANGES["spike_amplitude"])),
        "count": int(rng.integers(lo, hi + 1)),
    }


def sample_spec(rng_seed: int, constraints=None,
                length: int = DEFAULT_LENGTH) -> SynthSpec:
    """Sample a random spec: uniform shape choice, documented param ranges,
    each overlay included with probability :data:`OVERLAY_PROBABILITY`."""
    if constraints is not None:
        shapes = sorted(set(constraints))
        if not shapes:
            raise InvalidArgument("constraint set must not be empty")
        for shape in shapes:
            if shape not in _SHAPE_FUNCS:
                raise InvalidSpec(f"unknown base shape in constraints: {shape!r}")
    else:
        shapes = list(SHAPE_NAMES)
    rng = np.random.default_rng(rng_seed)
    base = str(rng.choice(shapes))
    shape_params = _sample_shape_params(rng, base)
    overlays = {}
    for name in OVERLAY_NAMES:
        if rng.random() < OVERLAY_PROBABILITY:
            overlays[name] = _sample_overlay_params(rng, name)
    seed = int(rng.integers(0, 2 ** 63 - 1))
    return SynthSpec(
        base_shape=base,
        shape_params=shape_params,
        overlays=overlays,
        length=length,
        seed=seed,
    )
