"""
Riemannian data of the base manifold in one chart: metric, inverse metric,
Christoffel symbols, curvature, raised curvature and its covariant derivative.

Index conventions (all arrays zero-based):
    gamma[h, i, j]        Γ^h_ij
    r[i, j, l, s]         R_ijl^s  with  R(∂_i, ∂_j)∂_l = R_ijl^s ∂_s
    raised[k, j, i, s]    R^k_j^{is} = g^{kt} g^{im} R_tjm^s
    covd[m, i, j, l, s]   ∇_m R_ijl^s

The builders below take and return jax-traceable functions of the chart
point, so the same Christoffel field feeds the frame on T*M as well.
"""
import functools
from dataclasses import dataclass
from typing import Callable, Optional

import jax
import jax.numpy as jnp
import numpy as np

import jet_calculus as jc
from cgverify_logging import get_logger
from config import config
from jet_calculus import DiffEngine, GeometryDomainError

logger = get_logger(__name__)


class DegenerateMetricError(GeometryDomainError):
    """The metric is singular or not positive definite at the evaluation point."""


@dataclass(frozen=True)
class MetricField:
    """A Riemannian metric on one chart: x -> symmetric positive-definite n×n matrix.

    ``components`` must be written with ``jax.numpy`` so jax can trace it.
    """

    name: str
    dim: int
    components: Callable

    def __call__(self, x):
        return self.components(x)


@dataclass(frozen=True)
class Christoffels:
    gamma: np.ndarray

    def __getitem__(self, idx):
        return self.gamma[idx]


@dataclass(frozen=True)
class CurvatureComponents:
    r: np.ndarray
    raised: np.ndarray
    covd: np.ndarray


def check_nondegenerate(g_value: np.ndarray, where=None) -> None:
    eigenvalues = np.linalg.eigvalsh(0.5 * (g_value + g_value.T))
    if eigenvalues[0] <= 0:
        raise DegenerateMetricError(f"metric is not positive definite at {where}: eigenvalues {eigenvalues}")
    if eigenvalues[-1] / eigenvalues[0] > config.CONDITION_LIMIT:
        raise DegenerateMetricError(f"metric is numerically singular at {where}")


def christoffel_field(metric: Callable) -> Callable:
    """x -> Γ^h_ij for a jax-traceable metric."""
    def gamma(x):
        dg = jax.jacfwd(metric)(x)
        comb = jnp.einsum("sji->sij", dg) + dg - jnp.einsum("ijs->sij", dg)
        return 0.5 * jnp.einsum("hs,sij->hij", jnp.linalg.inv(metric(x)), comb)
    return gamma


def curvature_field(gamma: Callable) -> Callable:
    """x -> R_ijl^s from a Christoffel field."""
    def riemann(x):
        gam = gamma(x)
        dgamma = jax.jacfwd(gamma)(x)
        return (jnp.einsum("sjli->ijls", dgamma) - jnp.einsum("silj->ijls", dgamma)
                + jnp.einsum("sih,hjl->ijls", gam, gam)
                - jnp.einsum("sjh,hil->ijls", gam, gam))
    return riemann


def covariant_curvature_field(riemann: Callable, gamma: Callable) -> Callable:
    """x -> ∇_m R_ijl^s."""
    def covd(x):
        dr = jnp.einsum("ijlsm->mijls", jax.jacfwd(riemann)(x))
        r, gam = riemann(x), gamma(x)
        return (dr
                - jnp.einsum("hmi,hjls->mijls", gam, r)
                - jnp.einsum("hmj,ihls->mijls", gam, r)
                - jnp.einsum("hml,ijhs->mijls", gam, r)
                + jnp.einsum("smh,ijlh->mijls", gam, r))
    return covd


def raise_indices(ginv, r):
    return np.einsum("kt,im,tjms->kjis", ginv, ginv, r)


@jc.chart_kernel
def _base_kernel(fields, x):
    (metric,) = fields
    gamma = christoffel_field(metric)
    riemann = curvature_field(gamma)
    g = metric(x)
    return {
        "g": g,
        "ginv": jnp.linalg.inv(g),
        "dg": jax.jacfwd(metric)(x),
        "gamma": gamma(x),
        "r": riemann(x),
        "covd": covariant_curvature_field(riemann, gamma)(x),
    }


@dataclass(frozen=True)
class BaseGeometry:
    """All base quantities at one point, as plain arrays."""

    x: tuple
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray
    r: np.ndarray
    raised: np.ndarray
    covd: np.ndarray

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @property
    def covd_raised(self) -> np.ndarray:
        """∇_q R^k_j^{is} (raising commutes with ∇)."""
        return np.einsum("kt,im,qtjms->qkjis", self.ginv, self.ginv, self.covd)


@functools.lru_cache(maxsize=1024)
def _base_geometry(g: MetricField, x: tuple, engine: DiffEngine) -> BaseGeometry:
    check_nondegenerate(np.asarray(g(np.array(x)), dtype=float), x)
    out = _base_kernel((g,), engine, x, x)
    return BaseGeometry(x=x, raised=raise_indices(out["ginv"], out["r"]), **out)


def base_geometry_at(g: MetricField, x, engine: Optional[DiffEngine] = None) -> BaseGeometry:
    x = tuple(float(v) for v in np.asarray(x, dtype=float).reshape(-1))
    if len(x) != g.dim:
        raise ValueError(f"point {x} does not match metric dimension {g.dim}")
    return _base_geometry(g, x, jc.resolve_engine(engine))


def christoffel(g: MetricField, x, engine: Optional[DiffEngine] = None) -> Christoffels:
    """Christoffel symbols Γ^h_ij of g at x."""
    return Christoffels(base_geometry_at(g, x, engine).gamma)


def curvature(g: MetricField, x, engine: Optional[DiffEngine] = None) -> CurvatureComponents:
    """R_ijl^s, R^k_j^{is} and ∇_m R_ijl^s of g at x."""
    base = base_geometry_at(g, x, engine)
    return CurvatureComponents(r=base.r, raised=base.raised, covd=base.covd)


def raise_curvature(g: MetricField, r: np.ndarray, x, engine: Optional[DiffEngine] = None) -> np.ndarray:
    """R^k_j^{is} = g^{kt} g^{im} R_tjm^s."""
    return raise_indices(base_geometry_at(g, x, engine).ginv, r)


def lower_curvature(g: MetricField, raised: np.ndarray, x, engine: Optional[DiffEngine] = None) -> np.ndarray:
    """Inverse of raise_curvature."""
    gv = base_geometry_at(g, x, engine).g
    return np.einsum("tk,mi,kjis->tjms", gv, gv, raised)


# Identity defects (max-abs), used by the base checks.

def lowered(base: BaseGeometry) -> np.ndarray:
    """R_ijls = g(R(∂_i, ∂_j)∂_l, ∂_s)."""
    return np.einsum("ijlt,ts->ijls", base.r, base.g)


def antisymmetry_defect(base: BaseGeometry) -> float:
    low = lowered(base)
    return float(max(np.max(np.abs(base.r + base.r.transpose(1, 0, 2, 3))),
                     np.max(np.abs(low + low.transpose(0, 1, 3, 2))),
                     np.max(np.abs(low - low.transpose(2, 3, 0, 1)))))


def first_bianchi_defect(base: BaseGeometry) -> float:
    r = base.r
    cyclic = r + np.einsum("jlis->ijls", r) + np.einsum("lijs->ijls", r)
    return float(np.max(np.abs(cyclic)))


def second_bianchi_defect(base: BaseGeometry) -> float:
    c = base.covd
    cyclic = c + np.einsum("ijmls->mijls", c) + np.einsum("jmils->mijls", c)
    return float(np.max(np.abs(cyclic)))


def metric_compatibility_defect(base: BaseGeometry) -> float:
    """max |∇_k g_ij|."""
    nabla = (np.einsum("ijk->kij", base.dg)
             - np.einsum("hki,hj->kij", base.gamma, base.g)
             - np.einsum("hkj,ih->kij", base.gamma, base.g))
    return float(np.max(np.abs(nabla)))


def constant_curvature_tensor(g_value: np.ndarray, k: float) -> np.ndarray:
    """K (δ^s_i g_jl - δ^s_j g_il)."""
    eye = np.eye(g_value.shape[0])
    return k * (np.einsum("si,jl->ijls", eye, g_value) - np.einsum("sj,il->ijls", eye, g_value))


def gaussian_curvature(base: BaseGeometry) -> float:
    if base.dim != 2:
        raise ValueError("Gaussian curvature is defined for surfaces only")
    return float(lowered(base)[0, 1, 1, 0] / np.linalg.det(base.g))


def constant_curvature_defect(base: BaseGeometry, k: float) -> float:
    return float(np.max(np.abs(base.r - constant_curvature_tensor(base.g, k))))


def lowered_curvature_defect(base: BaseGeometry, expected: np.ndarray) -> float:
    """max |R_ijls - expected_ijls| against a closed-form lowered curvature."""
    return float(np.max(np.abs(lowered(base) - np.asarray(expected, dtype=float))))
