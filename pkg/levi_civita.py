"""
Levi-Civita connection ∇̃ of ^{CG}g_f in the adapted frame.

Connection tables use the layout gamma[e, a, b]: coefficient of E_e in
∇̃_{E_a} E_b, horizontal indices 0..n-1, vertical indices n..2n-1.

The closed form is ∇̂ + K where ∇̂ is the horizontal lift of the base
connection and K collects

    K(E_i, E_j) = D^l_ij E_l + ½ p_s R_ijl^s E_l̄
    K(E_i, E_j̄) = c p_s R^l_i^{js} E_l
    K(E_ī, E_j) = c p_s R^l_j^{is} E_l
    K(E_ī, E_j̄) = W^{ij}_l E_l̄

with c = 1/(2fα), D the difference tensor of the conformal change g -> f g,
and W the fibre part. The tensor ᶠA as usually printed is twice D; a
Reading selects which of the two is used.
"""
import functools
from dataclasses import dataclass
from typing import Callable, Optional, Union

import jax
import jax.numpy as jnp
import numpy as np

import jet_calculus as jc
from base_geometry import BaseGeometry, MetricField, base_geometry_at, christoffel_field
from cg_metric import (ScalingField, bundle_metric_field, cg_inverse_at, cg_metric_at, metric_jet,
                       metric_on_lifts, scaling_value)
from cgverify_logging import get_logger
from cotangent_frame import (BundleVector, CotangentPoint, bracket_field, frame_chart, frame_field,
                             liouville, vertical_lift)
from jet_calculus import DiffEngine

logger = get_logger(__name__)


@dataclass(frozen=True)
class Reading:
    """Which form of the scaling tensor enters the closed-form connection."""

    name: str
    a_scale: float


PRINTED = Reading("printed", 1.0)
CORRECTED = Reading("corrected", 0.5)
READINGS = {r.name: r for r in (PRINTED, CORRECTED)}


def resolve_reading(reading: Union[str, Reading]) -> Reading:
    if isinstance(reading, Reading):
        return reading
    try:
        return READINGS[reading]
    except KeyError:
        raise ValueError(f"unknown reading {reading!r}; expected one of {sorted(READINGS)}") from None


@dataclass(frozen=True, eq=False)
class ATensor:
    """a[m, i, j] = ᶠA^m_ij = (1/f)(f_i δ^m_j + f_j δ^m_i - f^m g_ij)."""

    a: np.ndarray

    def __call__(self, X, Y) -> np.ndarray:
        return np.einsum("mij,i,j->m", self.a, X, Y)


@dataclass(frozen=True, eq=False)
class ConnectionTable:
    gamma: np.ndarray
    label: str = ""

    @property
    def n(self) -> int:
        return self.gamma.shape[0] // 2


# Table blocks by (direction, argument); both output blocks are compared together.
BLOCKS = {"HH": ("h", "h"), "HV": ("h", "v"), "VH": ("v", "h"), "VV": ("v", "v")}


def block_view(table: np.ndarray, name: str) -> np.ndarray:
    """All output components of the ∇_{E_a}E_b entries with a, b in the named blocks."""
    n = table.shape[0] // 2
    part = {"h": slice(0, n), "v": slice(n, 2 * n)}
    a, b = BLOCKS[name]
    return table[:, part[a], part[b]]


def a_tensor_field(metric: Callable, scaling: Callable) -> Callable:
    """x -> ᶠA^m_ij as printed, for jax-traceable g and f."""
    def a_tensor(x):
        g = metric(x)
        df = jax.jacfwd(scaling)(x)
        eye = jnp.eye(x.shape[0])
        numerator = (jnp.einsum("i,mj->mij", df, eye) + jnp.einsum("j,mi->mij", df, eye)
                     - jnp.einsum("mk,k,ij->mij", jnp.linalg.inv(g), df, g))
        return numerator / scaling(x)
    return a_tensor


@jc.chart_kernel
def _scaling_kernel(fields, x):
    metric, scaling = fields
    a_tensor = a_tensor_field(metric, scaling)
    return {"f": scaling(x), "df": jax.jacfwd(scaling)(x), "a": a_tensor(x), "da": jax.jacfwd(a_tensor)(x)}


@dataclass(frozen=True, eq=False)
class FormulaPoint:
    """Base and fibre quantities entering every closed-form expression at one point."""

    base: BaseGeometry
    f: float
    df: np.ndarray
    a: np.ndarray       # ᶠA as printed, a[m, i, j]
    da: np.ndarray      # ∇_q ᶠA^m_ij, da[q, m, i, j]
    p: np.ndarray
    p_up: np.ndarray
    alpha: float
    omega: np.ndarray   # omega[i, j, l] = p_s R_ijl^s
    pr: np.ndarray      # pr[k, j, i] = p_s R^k_j^{is}
    pdr: np.ndarray     # pdr[m, i, j, l] = p_s ∇_m R_ijl^s
    pdr_up: np.ndarray  # pdr_up[q, k, j, i] = p_s ∇_q R^k_j^{is}

    @property
    def n(self) -> int:
        return self.p.size

    @property
    def c(self) -> float:
        return 1.0 / (2.0 * self.f * self.alpha)


@functools.lru_cache(maxsize=512)
def _formula_point(g: MetricField, f: ScalingField, pt: CotangentPoint, engine: DiffEngine) -> FormulaPoint:
    base = base_geometry_at(g, pt.x, engine)
    scaling_value(f, pt.x_array)
    out = _scaling_kernel((g, f), engine, pt.x_array, pt.x_array)
    gamma, a = base.gamma, out["a"]
    da = (np.einsum("mijq->qmij", out["da"])
          + np.einsum("mqh,hij->qmij", gamma, a)
          - np.einsum("hqi,mhj->qmij", gamma, a)
          - np.einsum("hqj,mih->qmij", gamma, a))
    p = pt.p_array
    p_up = base.ginv @ p
    return FormulaPoint(
        base=base, f=float(out["f"]), df=out["df"], a=a, da=da,
        p=p, p_up=p_up, alpha=1.0 + float(p @ p_up),
        omega=np.einsum("s,ijls->ijl", p, base.r),
        pr=np.einsum("s,kjis->kji", p, base.raised),
        pdr=np.einsum("s,mijls->mijl", p, base.covd),
        pdr_up=np.einsum("s,qkjis->qkji", p, base.covd_raised),
    )



def formula_point(g: MetricField, f: ScalingField, pt: CotangentPoint,
                  engine: Optional[DiffEngine] = None) -> FormulaPoint:
    return _formula_point(g, f, pt, jc.resolve_engine(engine))


def a_tensor(g: MetricField, f: ScalingField, x, engine: Optional[DiffEngine] = None) -> ATensor:
    """ᶠA at x, as printed (twice the conformal difference tensor)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    pt = CotangentPoint.at(x, np.zeros_like(x))
    return ATensor(formula_point(g, f, pt, engine).a)


def difference_tensor(g: MetricField, f: ScalingField, x, engine: Optional[DiffEngine] = None) -> ATensor:
    """D = ½ ᶠA, the difference between the Levi-Civita connections of f g and g."""
    return ATensor(0.5 * a_tensor(g, f, x, engine).a)


def fibre_tensor(fp: FormulaPoint) -> np.ndarray:
    """w[l, i, j] = W^{ij}_l."""
    n, alpha = fp.n, fp.alpha
    eye = np.eye(n)
    pu, p = fp.p_up, fp.p
    return (-(np.einsum("i,jl->lij", pu, eye) + np.einsum("j,il->lij", pu, eye)) / alpha
            + (alpha + 1.0) / alpha**2 * np.einsum("ij,l->lij", fp.base.ginv, p)
            + np.einsum("i,j,l->lij", pu, pu, p) / alpha**2)


def connection_formula(g: MetricField, f: ScalingField, pt: CotangentPoint,
                       reading: Union[str, Reading] = CORRECTED,
                       engine: Optional[DiffEngine] = None) -> ConnectionTable:
    """Closed-form ∇̃ in the adapted frame."""
    reading = resolve_reading(reading)
    fp = formula_point(g, f, pt, engine)
    n, c = fp.n, fp.c
    h, v = slice(0, n), slice(n, 2 * n)
    gamma = np.zeros((2 * n,) * 3)
    gamma[h, h, h] = fp.base.gamma + reading.a_scale * fp.a
    gamma[v, h, h] = 0.5 * np.einsum("ijl->lij", fp.omega)
    gamma[h, h, v] = c * fp.pr
    gamma[v, h, v] = -np.einsum("jil->lij", fp.base.gamma)
    gamma[h, v, h] = c * np.einsum("lji->lij", fp.pr)
    gamma[v, v, v] = fibre_tensor(fp)
    return ConnectionTable(gamma, label=reading.name)


def koszul_table_field(frame: Callable, bundle_metric: Callable) -> Callable:
    """z -> ∇̃ table from the Koszul formula on the frame, brackets from the Jacobi–Lie formula."""
    brackets = bracket_field(frame)

    def table(z):
        G = bundle_metric(z)
        EG = jnp.einsum("az,bcz->abc", frame(z), jax.jacfwd(bundle_metric)(z))
        C = brackets(z)
        lowered = 0.5 * (EG + jnp.einsum("bca->abc", EG) - jnp.einsum("cab->abc", EG)
                         - jnp.einsum("ad,dbc->abc", G, C)
                         + jnp.einsum("bd,dca->abc", G, C)
                         + jnp.einsum("cd,dab->abc", G, C))
        return jnp.einsum("abc,ce->eab", lowered, jnp.linalg.inv(G))
    return table


@jc.chart_kernel
def _koszul_kernel(fields, z):
    metric, scaling = fields
    n = z.shape[0] // 2
    table = koszul_table_field(frame_field(christoffel_field(metric), n),
                               bundle_metric_field(metric, scaling, n))
    return {"value": table(z), "d1": jax.jacfwd(table)(z)}


@functools.lru_cache(maxsize=512)
def _koszul_jet(g: MetricField, f: ScalingField, pt: CotangentPoint, engine: DiffEngine) -> jc.ChartJet:
    cg_inverse_at(cg_metric_at(g, f, pt, engine))
    out = _koszul_kernel((g, f), engine, pt.z, pt.x_array)
    return jc.ChartJet(out["value"], out["d1"])


def koszul_jet(g: MetricField, f: ScalingField, pt: CotangentPoint,
               engine: Optional[DiffEngine] = None) -> jc.ChartJet:
    """Order-one jet of the Koszul connection table on the 2n-chart."""
    return _koszul_jet(g, f, pt, jc.resolve_engine(engine))


def koszul_oracle(g: MetricField, f: ScalingField, pt: CotangentPoint,
                  engine: Optional[DiffEngine] = None) -> ConnectionTable:
    """∇̃ from the Koszul formula on the frame, with brackets taken from the oracle."""
    return ConnectionTable(koszul_jet(g, f, pt, engine).value, label="koszul")


def frame_metric_derivative(g: MetricField, f: ScalingField, pt: CotangentPoint,
                            engine: Optional[DiffEngine] = None) -> np.ndarray:
    """eg[c, a, b] = E_c(G_ab)."""
    chart = frame_chart(g, pt, engine)
    return chart.along_frame(metric_jet(g, f, pt, engine))


def metric_compatibility_defect(table: np.ndarray, g: MetricField, f: ScalingField, pt: CotangentPoint,
                                engine: Optional[DiffEngine] = None) -> float:
    """max |E_c(G_ab) - G(∇_{E_c}E_a, E_b) - G(E_a, ∇_{E_c}E_b)|."""
    G = metric_jet(g, f, pt, engine).value
    eg = frame_metric_derivative(g, f, pt, engine)
    defect = eg - np.einsum("dca,db->cab", table, G) - np.einsum("dcb,ad->cab", table, G)
    return float(np.max(np.abs(defect)))


def torsion(table: np.ndarray, brackets: np.ndarray) -> np.ndarray:
    """t[d, a, b]: E_d-coefficient of ∇_{E_a}E_b - ∇_{E_b}E_a - [E_a, E_b]."""
    return table - table.transpose(0, 2, 1) - brackets


@dataclass(frozen=True, eq=False)
class LiftedField:
    """^HY (kind "H", vector components) or ^Vθ (kind "V", covector components).

    ``nabla[k, j]`` holds ∇_k of the components; None means the components
    are constant in the chart.
    """

    kind: str
    components: np.ndarray
    nabla: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("H", "V"):
            raise ValueError(f"lift kind must be 'H' or 'V', got {self.kind!r}")

    def covariant_derivative(self, gamma: np.ndarray) -> np.ndarray:
        if self.nabla is not None:
            return np.asarray(self.nabla, dtype=float)
        if self.kind == "H":
            return np.einsum("jkl,l->kj", gamma, self.components)
        return -np.einsum("lkj,l->kj", gamma, self.components)


def invariant_connection(g: MetricField, f: ScalingField, pt: CotangentPoint,
                         X: LiftedField, Y: LiftedField,
                         reading: Union[str, Reading] = CORRECTED,
                         engine: Optional[DiffEngine] = None) -> BundleVector:
    """∇̃_X Y for lifted fields, evaluated from the coordinate-free description."""
    reading = resolve_reading(reading)
    fp = formula_point(g, f, pt, engine)
    base = fp.base
    x_c, y_c = np.asarray(X.components, float), np.asarray(Y.components, float)
    zero = np.zeros(fp.n)

    if X.kind == "H" and Y.kind == "H":
        nabla_xy = x_c @ Y.covariant_derivative(base.gamma)
        h = nabla_xy + reading.a_scale * ATensor(fp.a)(x_c, y_c)
        v = 0.5 * np.einsum("k,j,kjl->l", x_c, y_c, fp.omega)
        return BundleVector(h, v)

    if X.kind == "H" and Y.kind == "V":
        theta_up = base.ginv @ y_c
        h = fp.c * np.einsum("mk,kil,i,l->m", base.ginv, fp.omega, x_c, theta_up)
        return BundleVector(h, x_c @ Y.covariant_derivative(base.gamma))

    if X.kind == "V" and Y.kind == "H":
        omega_up = base.ginv @ x_c
        h = fp.c * np.einsum("mk,kjl,j,l->m", base.ginv, fp.omega, y_c, omega_up)
        return BundleVector(h, zero)

    gamma_delta = liouville(pt)
    lift_x, lift_y = vertical_lift(x_c, pt), vertical_lift(y_c, pt)
    gx = metric_on_lifts(g, f, pt, lift_x, gamma_delta, engine)
    gy = metric_on_lifts(g, f, pt, lift_y, gamma_delta, engine)
    gxy = metric_on_lifts(g, f, pt, lift_x, lift_y, engine)
    alpha = fp.alpha
    v = (-(gx * y_c + gy * x_c) / alpha
         + (alpha + 1.0) / alpha * gxy * fp.p
         - gx * gy / alpha * fp.p)
    return BundleVector(zero, v)
