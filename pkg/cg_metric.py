"""
The rescaled Cheeger–Gromoll metric G = ^{CG}g_f on T*M.

In the adapted frame G is block diagonal:
    G(E_i, E_j) = f g_ij
    G(E_ī, E_j̄) = (g^{ij} + p^i p^j) / α,   p^i = g^{ih} p_h,  α = 1 + g^{ij} p_i p_j
"""
import functools
from dataclasses import dataclass
from typing import Callable, Optional

import jax
import jax.numpy as jnp
import numpy as np

import jet_calculus as jc
from base_geometry import MetricField, base_geometry_at, check_nondegenerate
from cgverify_logging import get_logger
from config import config
from cotangent_frame import BundleVector, CotangentPoint
from jet_calculus import DiffEngine, GeometryDomainError

logger = get_logger(__name__)


class NonPositiveScalingError(GeometryDomainError):
    """The scaling function f is not strictly positive at the base point."""


class ConditioningError(GeometryDomainError):
    """A metric block is too badly conditioned to invert reliably."""


@dataclass(frozen=True)
class ScalingField:
    """Strictly positive function f on the base chart, written with jax.numpy like MetricField."""

    name: str
    components: Callable

    def __call__(self, x):
        return self.components(x)


@dataclass(frozen=True, eq=False)
class BundleMetricValue:
    h: np.ndarray
    v: np.ndarray

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    @property
    def dense(self) -> np.ndarray:
        n = self.dim
        out = np.zeros((2 * n, 2 * n))
        out[:n, :n] = self.h
        out[n:, n:] = self.v
        return out

    def __call__(self, a: BundleVector, b: BundleVector) -> float:
        return float(a.h @ self.h @ b.h + a.v @ self.v @ b.v)


def scaling_value(f: ScalingField, x) -> float:
    value = float(np.asarray(f(np.asarray(x, dtype=float)), dtype=float))
    if not np.isfinite(value) or value <= 0:
        raise NonPositiveScalingError(f"scaling {f.name} is {value} at {tuple(np.ravel(x))}")
    return value


def cg_metric_at(g: MetricField, f: ScalingField, pt: CotangentPoint,
                 engine: Optional[DiffEngine] = None) -> BundleMetricValue:
    """Blocks f·g and (g^{-1} + p^♯ p^♯)/α of ^{CG}g_f at pt."""
    base = base_geometry_at(g, pt.x, engine)
    fv = scaling_value(f, pt.x_array)
    p_up = base.ginv @ pt.p_array
    alpha = 1.0 + float(pt.p_array @ p_up)
    return BundleMetricValue(h=fv * base.g, v=(base.ginv + np.outer(p_up, p_up)) / alpha)


def metric_on_lifts(g: MetricField, f: ScalingField, pt: CotangentPoint,
                    a: BundleVector, b: BundleVector, engine: Optional[DiffEngine] = None) -> float:
    """G(a, b) assembled from the three defining rules for lifts.

    G(^HX, ^HY) = f g(X, Y),  G(^HX, ^Vθ) = 0,
    G(^Vω, ^Vθ) = (g^{-1}(ω, θ) + g^{-1}(ω, p) g^{-1}(θ, p)) / α
    """
    base = base_geometry_at(g, pt.x, engine)
    p = pt.p_array
    alpha = 1.0 + float(p @ base.ginv @ p)
    horizontal = scaling_value(f, pt.x_array) * float(a.h @ base.g @ b.h)
    vertical = (float(a.v @ base.ginv @ b.v)
                + float(a.v @ base.ginv @ p) * float(b.v @ base.ginv @ p)) / alpha
    return horizontal + vertical


def _checked_inverse(block: np.ndarray, label: str) -> np.ndarray:
    cond = np.linalg.cond(block)
    if not np.isfinite(cond) or cond > config.CONDITION_LIMIT:
        raise ConditioningError(f"{label} block has condition number {cond:.3e}")
    return np.linalg.inv(block)


def cg_inverse_at(G: BundleMetricValue) -> np.ndarray:
    """Dense 2n×2n inverse, computed blockwise."""
    inverse = BundleMetricValue(h=_checked_inverse(G.h, "horizontal"),
                                v=_checked_inverse(G.v, "vertical"))
    return inverse.dense


def is_positive_definite(matrix: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


def purity_check(G, J: np.ndarray) -> float:
    """max |G(J e_a, e_b) - G(e_a, J e_b)| over frame vectors; J acts as (Jv)^α = J[α, β] v^β."""
    dense = G.dense if isinstance(G, BundleMetricValue) else np.asarray(G, dtype=float)
    return float(np.max(np.abs(J.T @ dense - dense @ J)))


def bundle_metric_field(metric: Callable, scaling: Callable, n: int) -> Callable:
    """z -> G_ab in the adapted frame, for jax-traceable g and f."""
    def bundle_metric(z):
        x, p = z[:n], z[n:]
        g = metric(x)
        ginv = jnp.linalg.inv(g)
        p_up = ginv @ p
        alpha = 1.0 + p @ p_up
        zeros = jnp.zeros((n, n))
        return jnp.block([[scaling(x) * g, zeros],
                          [zeros, (ginv + jnp.outer(p_up, p_up)) / alpha]])
    return bundle_metric


@jc.chart_kernel
def _metric_kernel(fields, z):
    metric, scaling = fields
    bundle_metric = bundle_metric_field(metric, scaling, z.shape[0] // 2)
    return {"value": bundle_metric(z), "d1": jax.jacfwd(bundle_metric)(z)}


@functools.lru_cache(maxsize=512)
def _metric_jet(g: MetricField, f: ScalingField, pt: CotangentPoint, engine: DiffEngine) -> jc.ChartJet:
    check_nondegenerate(np.asarray(g(pt.x_array), dtype=float), pt.x)
    scaling_value(f, pt.x_array)
    out = _metric_kernel((g, f), engine, pt.z, pt.x_array)
    return jc.ChartJet(out["value"], out["d1"])


def metric_jet(g: MetricField, f: ScalingField, pt: CotangentPoint,
               engine: Optional[DiffEngine] = None) -> jc.ChartJet:
    """Adapted-frame components G_ab and their partials on the 2n-chart."""
    return _metric_jet(g, f, pt, jc.resolve_engine(engine))
