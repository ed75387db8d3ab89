"""
Catalog of base manifolds and scaling functions, and deterministic sampling
of points of T*M over a chart box.
"""
import functools
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import jax.numpy as jnp
import numpy as np

from base_geometry import MetricField
from cg_metric import ScalingField
from cgverify_logging import get_logger, logged_method
from cotangent_frame import CotangentPoint

logger = get_logger(__name__)

MANIFOLD_NAMES = ("flat", "sphere", "hyperbolic", "polynomial")
SCALING_NAMES = ("one", "exp", "poly")

# Symmetric coefficients of the quadratic height function whose graph metric
# I + (Qx)(Qx)^T gives the polynomial base.
_GRAPH_HESSIAN = np.array([
    [0.6, 0.2, 0.1, 0.0],
    [0.2, 0.4, 0.0, 0.1],
    [0.1, 0.0, 0.5, 0.2],
    [0.0, 0.1, 0.2, 0.3],
])


@dataclass(frozen=True)
class ManifoldSpec:
    """A catalog base: metric, chart box and a closed-form curvature.

    ``curvature(x)`` returns the lowered tensor R_ijls = g(R(∂_i, ∂_j)∂_l, ∂_s).
    """

    name: str
    metric: MetricField
    box: Tuple[Tuple[float, float], ...]
    sectional_curvature: Optional[float]
    curvature: Callable[[np.ndarray], np.ndarray]
    description: str = ""

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.box])

    @property
    def is_flat(self) -> bool:
        return self.sectional_curvature == 0.0


def _flat_metric(n: int):
    def euclidean(x):
        return jnp.eye(n)
    return euclidean


def round_sphere(x):
    """Unit sphere in (θ, φ): diag(1, sin²θ)."""
    return jnp.diag(jnp.array([1.0, jnp.sin(x[0]) ** 2]))


def half_plane(x):
    """Hyperbolic upper half-plane in (u, y): diag(1/y², 1/y²)."""
    return jnp.eye(2) / (x[1] * x[1])


def _graph_metric(n: int):
    hessian = _GRAPH_HESSIAN[:n, :n]

    def quadratic_graph(x):
        slope = jnp.dot(hessian, x)
        return jnp.eye(n) + jnp.outer(slope, slope)
    return quadratic_graph


def constant_curvature(metric: MetricField, k: float) -> Callable[[np.ndarray], np.ndarray]:
    """R_ijls = K (g_is g_jl - g_js g_il), from metric values only."""
    def lowered(x):
        g = np.asarray(metric(x), dtype=float)
        return k * (np.einsum("is,jl->ijls", g, g) - np.einsum("il,js->ijls", g, g))
    return lowered


def graph_curvature(n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Gauss equation for the graph of u = ½ xᵀQx: R_ijls = (Q_is Q_jl - Q_il Q_js) / (1 + |Qx|²)."""
    hessian = _GRAPH_HESSIAN[:n, :n]

    def lowered(x):
        slope = hessian @ np.asarray(x, dtype=float)
        return ((np.einsum("is,jl->ijls", hessian, hessian) - np.einsum("il,js->ijls", hessian, hessian))
                / (1.0 + slope @ slope))
    return lowered


@functools.lru_cache(maxsize=None)
def manifold_spec(name: str, dim: Optional[int] = None) -> ManifoldSpec:
    """Catalog entry; ``dim`` applies to flat and polynomial (2..4, default 2)."""
    if name not in MANIFOLD_NAMES:
        raise ValueError(f"unknown manifold {name!r}; expected one of {MANIFOLD_NAMES}")
    if name in ("sphere", "hyperbolic"):
        if dim not in (None, 2):
            raise ValueError(f"{name} is only available in dimension 2")
        dim = 2
    dim = 2 if dim is None else dim
    if not 2 <= dim <= 4:
        raise ValueError(f"dimension must be 2..4, got {dim}")

    if name == "flat":
        metric = MetricField(name, dim, _flat_metric(dim))
        return ManifoldSpec(name, metric, ((-1.0, 1.0),) * dim, 0.0,
                            constant_curvature(metric, 0.0), f"Euclidean R^{dim}")
    if name == "sphere":
        metric = MetricField(name, 2, round_sphere)
        return ManifoldSpec(name, metric, ((0.2, np.pi - 0.2), (-np.pi, np.pi)), 1.0,
                            constant_curvature(metric, 1.0), "unit sphere S^2")
    if name == "hyperbolic":
        metric = MetricField(name, 2, half_plane)
        return ManifoldSpec(name, metric, ((-1.0, 1.0), (0.5, 2.0)), -1.0,
                            constant_curvature(metric, -1.0), "hyperbolic half-plane")
    return ManifoldSpec(name, MetricField(name, dim, _graph_metric(dim)), ((-1.0, 1.0),) * dim, None,
                        graph_curvature(dim), f"graph of a quadratic in R^{dim + 1}")


def unit_scaling(x):
    return jnp.ones(())


def exponential_scaling(x):
    return jnp.exp(0.5 * x[0])


def polynomial_scaling(x):
    return 1.0 + x[0] * x[0]


SCALINGS = {
    "one": ScalingField("one", unit_scaling),
    "exp": ScalingField("exp", exponential_scaling),
    "poly": ScalingField("poly", polynomial_scaling),
}


def scaling_field(name: str) -> ScalingField:
    try:
        return SCALINGS[name]
    except KeyError:
        raise ValueError(f"unknown scaling {name!r}; expected one of {SCALING_NAMES}") from None


def _fibre_point(spec: ManifoldSpec, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """p = L w with g(x) = L Lᵀ, so that g^{-1}(p, p) = |w|²."""
    g = np.asarray(spec.metric(x), dtype=float)
    return np.linalg.cholesky(g) @ w


@logged_method
def sample_points(spec: ManifoldSpec, count: int, seed: int, p_radius: float = 1.5) -> List[CotangentPoint]:
    """``count`` random points plus the box centre with p = 0 and with an axis-aligned p."""
    if count < 1:
        raise ValueError(f"sample count must be at least 1, got {count}")
    if p_radius <= 0:
        raise ValueError(f"p_radius must be positive, got {p_radius}")
    n = spec.dim
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in spec.box])
    highs = np.array([hi for _, hi in spec.box])

    points = []
    for _ in range(count):
        x = rng.uniform(lows, highs)
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        radius = p_radius * rng.uniform() ** (1.0 / n)
        points.append(CotangentPoint.at(x, _fibre_point(spec, x, radius * direction)))

    centre = spec.center
    axis = np.zeros(n)
    axis[0] = 0.5 * p_radius
    points.append(CotangentPoint.at(centre, np.zeros(n)))
    points.append(CotangentPoint.at(centre, _fibre_point(spec, centre, axis)))
    return points
