"""Source point generation on parametric curves and bounding geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Default wave curve: x(t) = t, y(t) = A sin(2 pi f t), t in [0, 4].
# An elongated 1D structure embedded in 2D, giving a sparse quadtree.
WAVE_AMPLITUDE = 0.35
WAVE_FREQUENCY = 1.5
WAVE_T_MAX = 4.0

CURVE_KINDS = ("wave", "circle", "annulus-random")


@dataclass(frozen=True)
class CurveSpec:
    """Description of the curve the source points are sampled from."""

    kind: str = "wave"
    amplitude: float = WAVE_AMPLITUDE
    frequency: float = WAVE_FREQUENCY
    radius: float = 1.0
    inner_radius: float = 1.0
    outer_radius: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "wave" and self.amplitude <= 0:
            raise ValueError("wave amplitude must be positive")
        if self.kind == "circle" and self.radius <= 0:
            raise ValueError("circle radius must be positive")
        if self.kind == "annulus-random" and not (
            0 < self.inner_radius < self.outer_radius
        ):
            raise ValueError("annulus needs 0 < inner_radius < outer_radius")


@dataclass(frozen=True)
class BBox:
    """Tight axis-aligned bounding box."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @property
    def extent(self) -> tuple[float, float]:
        return (self.xmax - self.xmin, self.ymax - self.ymin)

    @property
    def longest_side(self) -> float:
        return max(self.extent)


def parse_curve_spec(text: str, seed: int = 0) -> CurveSpec:
    """Parse "kind" or "kind:key=value,key=value" into a CurveSpec.

    Example: "annulus-random:inner_radius=1,outer_radius=2".
    """
    kind, _, rest = text.partition(":")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"malformed curve parameter {item!r}")
            key = key.strip()
            kwargs[key] = int(value) if key == "seed" else float(value)
    kwargs.setdefault("seed", seed)
    return CurveSpec(kind=kind.strip(), **kwargs)


def generate_sources(spec: CurveSpec, n: int) -> np.ndarray:
    """Generate n source points for the given curve.

    Returns an (n, 2) float64 array. Deterministic: the same (spec, n)
    always yields bit-identical output. The random annulus kind uses a
    Philox counter-based stream keyed by spec.seed.
    """
    if n < 2:
        raise ValueError("need at least 2 source points")

    if spec.kind == "wave":
        # Midpoint sampling of t in [0, T]: t_i = T (i + 1/2) / n.
        t = WAVE_T_MAX * (np.arange(n) + 0.5) / n
        pts = np.column_stack(
            (t, spec.amplitude * np.sin(2.0 * np.pi * spec.frequency * t))
        )
    elif spec.kind == "circle":
        theta = 2.0 * np.pi * np.arange(n) / n
        pts = spec.radius * np.column_stack((np.cos(theta), np.sin(theta)))
    else:  # annulus-random
        rng = np.random.Generator(np.random.Philox(spec.seed))
        # Area-uniform radius, uniform angle; one draw of shape (n, 2).
        u = rng.random((n, 2))
        r = np.sqrt(
            spec.inner_radius**2
            + u[:, 0] * (spec.outer_radius**2 - spec.inner_radius**2)
        )
        theta = 2.0 * np.pi * u[:, 1]
        pts = np.column_stack((r * np.cos(theta), r * np.sin(theta)))

    if not np.isfinite(pts).all():
        raise ValueError("generated non-finite coordinates")
    # The singular kernel requires pairwise-distinct points.
    uniq = np.unique(pts, axis=0)
    if uniq.shape[0] != n:
        raise ValueError("generated coincident points; change n or seed")
    return pts


def bounding_box(points: np.ndarray) -> BBox:
    """Tightest axis-aligned box containing all points."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty (n, 2) array")
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    return BBox(lo[0], lo[1], hi[0], hi[1])
