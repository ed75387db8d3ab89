"""
Points of T*M, vertical and horizontal lifts, and the adapted frame.

The adapted frame on the induced chart z = (x^1..x^n, p_1..p_n) is

    E_j  = ∂_j + p_a Γ^a_hj ∂_h̄      (horizontal, frame index j)
    E_j̄  = ∂_j̄                        (vertical, frame index n + j)

Bracket tables use the layout c[d, a, b]: coefficient of E_d in [E_a, E_b].
"""
import functools
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import jax
import jax.numpy as jnp
import numpy as np

import jet_calculus as jc
from base_geometry import (Christoffels, MetricField, base_geometry_at, check_nondegenerate,
                           christoffel_field)
from cgverify_logging import get_logger
from jet_calculus import DiffEngine

logger = get_logger(__name__)


def _as_tuple(arr) -> tuple:
    return tuple(float(v) for v in np.asarray(arr, dtype=float).reshape(-1))


@dataclass(frozen=True)
class CotangentPoint:
    """A covector p at the base point x, in induced coordinates."""

    x: tuple
    p: tuple

    def __post_init__(self):
        if len(self.x) != len(self.p):
            raise ValueError(f"x has {len(self.x)} coordinates but p has {len(self.p)}")

    @classmethod
    def at(cls, x, p) -> "CotangentPoint":
        return cls(_as_tuple(x), _as_tuple(p))

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def x_array(self) -> np.ndarray:
        return np.array(self.x)

    @property
    def p_array(self) -> np.ndarray:
        return np.array(self.p)

    @property
    def z(self) -> np.ndarray:
        return np.array(self.x + self.p)


@dataclass(frozen=True, eq=False)
class BundleVector:
    """Adapted-frame components: h^j on E_j, v_j on E_j̄."""

    h: np.ndarray
    v: np.ndarray

    @classmethod
    def from_array(cls, arr) -> "BundleVector":
        arr = np.asarray(arr, dtype=float)
        n = arr.size // 2
        return cls(arr[:n].copy(), arr[n:].copy())

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.h, self.v])

    def natural(self, frame: np.ndarray) -> np.ndarray:
        """Natural-frame components (∂_j, ∂_j̄) given the frame matrix E[a, μ]."""
        return self.to_array() @ frame

    def __add__(self, other: "BundleVector") -> "BundleVector":
        return BundleVector(self.h + other.h, self.v + other.v)

    def __mul__(self, scalar: float) -> "BundleVector":
        return BundleVector(self.h * scalar, self.v * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Alpha:
    r2: float
    alpha: float


def _gamma_array(gamma) -> np.ndarray:
    return gamma.gamma if isinstance(gamma, Christoffels) else np.asarray(gamma, dtype=float)


def alpha_at(g: MetricField, pt: CotangentPoint, engine: Optional[DiffEngine] = None) -> Alpha:
    """r² = g^{ij} p_i p_j and α = 1 + r²."""
    base = base_geometry_at(g, pt.x, engine)
    p = pt.p_array
    r2 = float(p @ base.ginv @ p)
    return Alpha(r2=r2, alpha=1.0 + r2)


def vertical_lift(omega, pt: CotangentPoint) -> BundleVector:
    """^Vω = ω_j E_j̄."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (pt.dim,):
        raise ValueError(f"covector of shape {omega.shape} does not fit dimension {pt.dim}")
    return BundleVector(np.zeros(pt.dim), omega.copy())


def horizontal_lift(X, pt: CotangentPoint, gamma) -> Tuple[BundleVector, np.ndarray]:
    """^HX = X^j E_j, returned in adapted form and in natural form (X^i, p_h Γ^h_ij X^j)."""
    X = np.asarray(X, dtype=float)
    if X.shape != (pt.dim,):
        raise ValueError(f"vector of shape {X.shape} does not fit dimension {pt.dim}")
    gamma = _gamma_array(gamma)
    natural = np.concatenate([X, np.einsum("h,hij,j->i", pt.p_array, gamma, X)])
    return BundleVector(X.copy(), np.zeros(pt.dim)), natural


def liouville(pt: CotangentPoint) -> BundleVector:
    """γδ = p_j E_j̄."""
    return BundleVector(np.zeros(pt.dim), pt.p_array.copy())


def frame_matrix(pt: CotangentPoint, gamma) -> np.ndarray:
    """E[a, μ]: natural components of the adapted frame."""
    n = pt.dim
    gamma = _gamma_array(gamma)
    frame = np.eye(2 * n)
    frame[:n, n:] = np.einsum("a,ahj->jh", pt.p_array, gamma)
    return frame


def bracket_table(g: MetricField, pt: CotangentPoint, engine: Optional[DiffEngine] = None,
                  printed: bool = False) -> np.ndarray:
    """Closed-form frame brackets.

    [E_i, E_j] = p_s R_ijl^s E_l̄,  [E_i, E_j̄] = -Γ^j_il E_l̄,  [E_ī, E_j̄] = 0.
    ``printed=True`` uses +Γ^j_il for the mixed bracket instead.
    """
    base = base_geometry_at(g, pt.x, engine)
    n = pt.dim
    sign = 1.0 if printed else -1.0
    c = np.zeros((2 * n, 2 * n, 2 * n))
    c[n:, :n, :n] = np.einsum("s,ijls->lij", pt.p_array, base.r)
    mixed = sign * np.einsum("jil->lij", base.gamma)
    c[n:, :n, n:] = mixed
    c[n:, n:, :n] = -mixed.transpose(0, 2, 1)
    return c


def frame_bracket(g: MetricField, pt: CotangentPoint, a: int, b: int,
                  engine: Optional[DiffEngine] = None, printed: bool = False) -> BundleVector:
    """[E_a, E_b] for frame indices a, b in 0..2n-1."""
    n2 = 2 * pt.dim
    if not (0 <= a < n2 and 0 <= b < n2):
        raise ValueError(f"frame indices must lie in 0..{n2 - 1}, got {a}, {b}")
    return BundleVector.from_array(bracket_table(g, pt, engine, printed)[:, a, b])


def frame_field(gamma: Callable, n: int) -> Callable:
    """z -> E[a, μ] on the 2n-chart, given a Christoffel field of the base."""
    def frame(z):
        top_right = jnp.einsum("a,ahj->jh", z[n:], gamma(z[:n]))
        return jnp.block([[jnp.eye(n), top_right], [jnp.zeros((n, n)), jnp.eye(n)]])
    return frame


def natural_bracket_field(frame: Callable) -> Callable:
    """z -> natural components of [E_a, E_b] by the Jacobi–Lie formula, [a, b, μ]."""
    def natural(z):
        term = jnp.einsum("an,bmn->abm", frame(z), jax.jacfwd(frame)(z))
        return term - jnp.einsum("bam->abm", term)
    return natural


def bracket_field(frame: Callable) -> Callable:
    """z -> c[d, a, b], the frame components of [E_a, E_b]."""
    natural = natural_bracket_field(frame)

    def brackets(z):
        return jnp.einsum("abm,md->dab", natural(z), jnp.linalg.inv(frame(z)))
    return brackets


@jc.chart_kernel
def _frame_kernel(fields, z):
    (metric,) = fields
    frame = frame_field(christoffel_field(metric), z.shape[0] // 2)
    natural = natural_bracket_field(frame)
    return {
        "frame": frame(z),
        "dframe": jax.jacfwd(frame)(z),
        "natural": natural(z),
        "dnatural": jax.jacfwd(natural)(z),
        "brackets": bracket_field(frame)(z),
    }


@dataclass(frozen=True, eq=False)
class FrameChart:
    """The adapted frame and its brackets at one point of T*M, with first chart derivatives."""

    pt: CotangentPoint
    frame: jc.ChartJet
    natural_brackets: jc.ChartJet
    brackets: np.ndarray

    @property
    def n(self) -> int:
        return self.pt.dim

    def along_frame(self, jet: jc.ChartJet) -> np.ndarray:
        """E_a(F) for every frame field, with a leading frame axis."""
        return np.einsum("az,...z->a...", self.frame.value, jet.d1)


@functools.lru_cache(maxsize=512)
def _frame_chart(g: MetricField, pt: CotangentPoint, engine: DiffEngine) -> FrameChart:
    check_nondegenerate(np.asarray(g(pt.x_array), dtype=float), pt.x)
    out = _frame_kernel((g,), engine, pt.z, pt.x_array)
    return FrameChart(pt=pt, frame=jc.ChartJet(out["frame"], out["dframe"]),
                      natural_brackets=jc.ChartJet(out["natural"], out["dnatural"]),
                      brackets=out["brackets"])


def frame_chart(g: MetricField, pt: CotangentPoint, engine: Optional[DiffEngine] = None) -> FrameChart:
    if pt.dim != g.dim:
        raise ValueError(f"point dimension {pt.dim} does not match metric dimension {g.dim}")
    return _frame_chart(g, pt, jc.resolve_engine(engine))


def bracket_oracle(g: MetricField, pt: CotangentPoint, engine: Optional[DiffEngine] = None) -> np.ndarray:
    """Frame brackets from the Jacobi–Lie formula on the natural-frame coefficients."""
    return frame_chart(g, pt, engine).brackets


def jacobi_defect(g: MetricField, pt: CotangentPoint, engine: Optional[DiffEngine] = None) -> float:
    """max |[[E_a,E_b],E_c] + [[E_b,E_c],E_a] + [[E_c,E_a],E_b]| in natural components."""
    chart = frame_chart(g, pt, engine)
    nat, d_nat = chart.natural_brackets.value, chart.natural_brackets.d1
    ev, d_ev = chart.frame.value, chart.frame.d1
    double = (np.einsum("abn,cmn->abcm", nat, d_ev)
              - np.einsum("cn,abmn->abcm", ev, d_nat))
    cyclic = double + np.einsum("bcam->abcm", double) + np.einsum("cabm->abcm", double)
    return float(np.max(np.abs(cyclic)))
