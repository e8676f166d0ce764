"""Penalty families, scalar thresholding rules and penalty-curve data."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidA, InvalidPenalty, UnsupportedKind

KINDS = ("lasso", "ridge", "enet", "scad", "adaptive_lasso", "sqrt_lasso",
         "scaled_lasso", "relaxed_lasso", "bridge")

# fields each kind may carry besides lambda
_ALLOWED = {
    "lasso": set(),
    "ridge": set(),
    "enet": {"alpha"},
    "scad": {"scad_a"},
    "adaptive_lasso": {"weights", "gamma"},
    "sqrt_lasso": set(),
    "scaled_lasso": set(),
    "relaxed_lasso": {"phi"},
    "bridge": {"bridge_q"},
}
_OPTIONAL = ("alpha", "scad_a", "weights", "gamma", "phi", "bridge_q")

DEFAULT_SCAD_A = 3.7


@dataclass(frozen=True)
class PenaltySpec:
    """A penalty family with its parameters.

    Only the fields that belong to `kind` may be set; everything else must be
    left as None.  Adaptive weights of ``inf`` exclude a covariate.
    """

    kind: str
    lam: float
    alpha: Optional[float] = None
    scad_a: Optional[float] = None
    weights: Optional[np.ndarray] = None
    gamma: Optional[float] = None
    phi: Optional[float] = None
    bridge_q: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidPenalty(f"unknown penalty kind {self.kind!r}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise InvalidPenalty(f"lambda must be finite and >= 0, got {self.lam}")
        allowed = _ALLOWED[self.kind]
        for name in _OPTIONAL:
            if getattr(self, name) is not None and name not in allowed:
                raise InvalidPenalty(f"field {name!r} does not apply to kind {self.kind!r}")
        if self.kind == "enet":
            if self.alpha is None or not 0 < self.alpha <= 1:
                raise InvalidPenalty("enet needs alpha in (0, 1]")
        if self.kind == "scad":
            if self.scad_a is None:
                object.__setattr__(self, "scad_a", DEFAULT_SCAD_A)
            if not self.scad_a > 2:
                raise InvalidA(f"SCAD a must exceed 2, got {self.scad_a}")
        if self.kind == "adaptive_lasso":
            if self.weights is None:
                raise InvalidPenalty("adaptive_lasso needs weights")
            w = np.array(self.weights, dtype=float)
            if np.any(np.isnan(w)) or np.any(w < 0):
                raise InvalidPenalty("adaptive weights must be >= 0")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)
            if self.gamma is not None and not self.gamma > 0:
                raise InvalidPenalty("gamma must be positive")
        if self.kind == "relaxed_lasso":
            if self.phi is None or not 0 <= self.phi <= 1:
                raise InvalidPenalty("relaxed_lasso needs phi in [0, 1]")
        if self.kind == "bridge":
            if self.bridge_q is None or not self.bridge_q > 0:
                raise InvalidPenalty("bridge needs a positive exponent q")

    @property
    def scad_param(self) -> float:
        return DEFAULT_SCAD_A if self.scad_a is None else self.scad_a


def soft_threshold(z: float, t: float) -> float:
    if t < 0:
        raise ValueError("threshold must be non-negative")
    return float(np.sign(z) * max(abs(z) - t, 0.0))


def scad_threshold(z: float, lam: float, a: float = DEFAULT_SCAD_A) -> float:
    """Minimizer of (b - z)^2 / 2 + SCAD(b; lam, a) for a unit-curvature coordinate."""
    if not a > 2:
        raise InvalidA(f"SCAD a must exceed 2, got {a}")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    az = abs(z)
    if az <= 2 * lam:
        return soft_threshold(z, lam)
    if az <= a * lam:
        return float(((a - 1) * z - np.sign(z) * a * lam) / (a - 2))
    return float(z)


def scad_value(b, lam: float, a: float = DEFAULT_SCAD_A):
    ab = np.abs(b)
    return np.where(
        ab <= lam,
        lam * ab,
        np.where(ab <= a * lam,
                 (2 * a * lam * ab - ab ** 2 - lam ** 2) / (2 * (a - 1)),
                 lam ** 2 * (a + 1) / 2),
    )


def penalty_value(spec: PenaltySpec, beta):
    """Scalar (or elementwise) penalty contribution p_lambda(beta)."""
    b = np.asarray(beta, dtype=float)
    lam = spec.lam
    if spec.kind == "lasso":
        out = lam * np.abs(b)
    elif spec.kind == "ridge":
        out = lam * b ** 2
    elif spec.kind == "enet":
        out = lam * (spec.alpha * np.abs(b) + (1 - spec.alpha) * b ** 2)
    elif spec.kind == "scad":
        out = scad_value(b, lam, spec.scad_param)
    elif spec.kind == "bridge":
        out = lam * np.abs(b) ** spec.bridge_q
    else:
        raise UnsupportedKind(f"penalty_value does not evaluate {spec.kind!r}")
    return float(out) if np.ndim(out) == 0 else out


CURVE_COLUMNS = (
    ("ridge", PenaltySpec("ridge", 1.0)),
    ("lasso", PenaltySpec("lasso", 1.0)),
    ("scad", PenaltySpec("scad", 1.0)),
    ("enet_0.7", PenaltySpec("enet", 1.0, alpha=0.7)),
    ("l0.5", PenaltySpec("bridge", 1.0, bridge_q=0.5)),
)


def penalty_curves(lo: float = -3.0, hi: float = 3.0, step: float = 0.01):
    """Grid of beta values and one penalty column per family (unit lambda)."""
    count = int(round((hi - lo) / step)) + 1
    grid = np.round(lo + step * np.arange(count), 10)
    cols = {name: penalty_value(spec, grid) for name, spec in CURVE_COLUMNS}
    return grid, cols
