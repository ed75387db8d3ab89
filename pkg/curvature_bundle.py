"""
Riemannian curvature R̃ of ^{CG}g_f in the adapted frame.

Tables use the layout r[e, a, b, c]: coefficient of E_e in R̃(E_a, E_b)E_c,
with R̃(X, Y) = [∇̃_X, ∇̃_Y] - ∇̃_[X,Y].

The closed form is organised in eight families by the horizontal (H) or
vertical (V) type of (a, b; c). Raised curvature R^m_j^{ia} = g^{mt}g^{iq}R_tjq^a,
c = 1/(2fα), D the conformal difference tensor.
"""
import functools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Union

import numpy as np

import jet_calculus as jc
from base_geometry import MetricField
from cg_metric import ScalingField, metric_jet
from cgverify_logging import get_logger
from cotangent_frame import CotangentPoint, FrameChart, frame_chart
from jet_calculus import DiffEngine
from levi_civita import formula_point, koszul_jet

logger = get_logger(__name__)

NEVER_FLAT_FLOOR = 0.1
# max |R̃| stays above this bound only near the zero section, |p| below about 1.2
NEAR_ZERO_SECTION_BOUND = 0.5
NEAR_ZERO_SECTION_RADIUS = 1.2


@dataclass(frozen=True)
class CurvatureReading:
    """Coefficient and sign choices that differ between the printed and validated families."""

    name: str
    a_scale: float
    vertical_nabla_over_f: bool   # R̃(E_l,E_i)E_j vertical ∇R factor 1/(2f) instead of ½
    mixed_alpha_sign: float       # (α+1)/(2α²) term of R̃(E_l̄,E_i)E_j
    mixed_quartic_sign: float     # 1/(4fα) term of R̃(E_l,E_ī)E_j
    vh_pl_sign: float             # p^l term of R̃(E_l̄,E_i)E_j̄
    hv_pj_sign: float             # p^j term of R̃(E_l,E_ī)E_j̄


PRINTED = CurvatureReading("printed", 1.0, True, -1.0, -1.0, 1.0, 1.0)
CORRECTED = CurvatureReading("corrected", 0.5, False, 1.0, 1.0, -1.0, -1.0)
READINGS = {r.name: r for r in (PRINTED, CORRECTED)}

# name -> (type of a, type of b, type of c)
FAMILIES = {
    "R(H,H)H": ("h", "h", "h"),
    "R(V,H)H": ("v", "h", "h"),
    "R(H,V)H": ("h", "v", "h"),
    "R(V,V)H": ("v", "v", "h"),
    "R(H,H)V": ("h", "h", "v"),
    "R(V,H)V": ("v", "h", "v"),
    "R(H,V)V": ("h", "v", "v"),
    "R(V,V)V": ("v", "v", "v"),
}


def resolve_reading(reading: Union[str, CurvatureReading]) -> CurvatureReading:
    if isinstance(reading, CurvatureReading):
        return reading
    try:
        return READINGS[reading]
    except KeyError:
        raise ValueError(f"unknown reading {reading!r}; expected one of {sorted(READINGS)}") from None


@dataclass(frozen=True, eq=False)
class BundleCurvatureTable:
    r: np.ndarray
    label: str = ""

    @property
    def n(self) -> int:
        return self.r.shape[0] // 2

    def family(self, name: str) -> np.ndarray:
        return family_view(self.r, name)


def family_view(r: np.ndarray, name: str) -> np.ndarray:
    """Every output component (horizontal and vertical) of one family."""
    n = r.shape[0] // 2
    part = {"h": slice(0, n), "v": slice(n, 2 * n)}
    a, b, c = FAMILIES[name]
    return r[:, part[a], part[b], part[c]]


def curvature_formula(g: MetricField, f: ScalingField, pt: CotangentPoint,
                      reading: Union[str, CurvatureReading] = CORRECTED,
                      engine: Optional[DiffEngine] = None) -> BundleCurvatureTable:
    """R̃ assembled from the closed-form families. Blocks are indexed [m, l, i, j]."""
    rd = resolve_reading(reading)
    fp = formula_point(g, f, pt, engine)
    base = fp.base
    n, c, alpha, f_val = fp.n, fp.c, fp.alpha, fp.f
    rm, rr, ginv = base.r, base.raised, base.ginv
    om, pr, pdr, pdr_up = fp.omega, fp.pr, fp.pdr, fp.pdr_up
    a, da = rd.a_scale * fp.a, rd.a_scale * fp.da
    p, pu = fp.p, fp.p_up
    logf = fp.df / f_val
    eye = np.eye(n)
    e = np.einsum
    h, v = slice(0, n), slice(n, 2 * n)
    r = np.zeros((2 * n,) * 4)

    # R̃(E_l, E_i)E_j
    r[h, h, h, h] = (e("lijm->mlij", rm)
                     - c * e("lih,mjh->mlij", om, pr)
                     + 0.5 * c * (e("mlh,ijh->mlij", pr, om) - e("mih,ljh->mlij", pr, om))
                     + e("lmij->mlij", da) - e("imlj->mlij", da)
                     + e("mlh,hij->mlij", a, a) - e("mih,hlj->mlij", a, a))
    kappa = 1.0 / (2.0 * f_val) if rd.vertical_nabla_over_f else 0.5
    r[v, h, h, h] = (kappa * (e("lijm->mlij", pdr) - e("iljm->mlij", pdr))
                     + 0.5 * (e("lhm,hij->mlij", om, a) - e("ihm,hlj->mlij", om, a)))

    # R̃(E_l̄, E_i)E_j
    r[h, v, h, h] = c * (e("i,mjl->mlij", logf, pr) - e("imjl->mlij", pdr_up)
                         + e("hij,mhl->mlij", a, pr) - e("hjl,mih->mlij", pr, a))
    r[v, v, h, h] = (0.5 * e("ijml->mlij", rm)
                     - 0.5 * c * e("ihm,hjl->mlij", om, pr)
                     - e("l,ijm->mlij", pu, om) / (2.0 * alpha)
                     + rd.mixed_alpha_sign * (alpha + 1.0) / (2.0 * alpha**2)
                     * e("m,ijh,hl->mlij", p, om, ginv))

    # R̃(E_l, E_ī)E_j
    r[h, h, v, h] = c * (e("lmji->mlij", pdr_up) + e("hji,mlh->mlij", pr, a)
                         - e("mhi,hlj->mlij", pr, a) - e("l,mji->mlij", logf, pr))
    r[v, h, v, h] = (-0.5 * e("ljmi->mlij", rm)
                     + e("i,ljm->mlij", pu, om) / (2.0 * alpha)
                     - (alpha + 1.0) / (2.0 * alpha**2) * e("m,ljh,hi->mlij", p, om, ginv)
                     + rd.mixed_quartic_sign * 0.5 * c * e("lhm,hji->mlij", om, pr))

    # R̃(E_l̄, E_ī)E_j
    r[h, v, v, h] = (e("mjil->mlij", rr) / (f_val * alpha)
                     + (e("i,mjl->mlij", pu, pr) - e("l,mji->mlij", pu, pr)) / (f_val * alpha**2)
                     + (e("mhl,hji->mlij", pr, pr) - e("mhi,hjl->mlij", pr, pr))
                     / (4.0 * f_val**2 * alpha**2))

    # R̃(E_l, E_i)E_j̄
    r[h, h, h, v] = c * (e("lmij->mlij", pdr_up) - e("imlj->mlij", pdr_up)
                         + e("hij,mlh->mlij", pr, a) - e("hlj,mih->mlij", pr, a)
                         - e("l,mij->mlij", logf, pr) + e("i,mlj->mlij", logf, pr))
    r[v, h, h, v] = (-e("limj->mlij", rm)
                     + 0.5 * c * (e("lhm,hij->mlij", om, pr) - e("ihm,hlj->mlij", om, pr))
                     + e("j,lim->mlij", pu, om) / alpha
                     - (alpha + 1.0) / alpha**2 * e("m,lih,hj->mlij", p, om, ginv))

    # R̃(E_l̄, E_i)E_j̄
    r[h, v, h, v] = (c * e("mijl->mlij", rr)
                     + (rd.vh_pl_sign * e("l,mij->mlij", pu, pr) + e("j,mil->mlij", pu, pr))
                     / (2.0 * f_val * alpha**2)
                     + e("mhl,hij->mlij", pr, pr) / (4.0 * f_val**2 * alpha**2))

    # R̃(E_l, E_ī)E_j̄
    r[h, h, v, v] = (-c * e("mlji->mlij", rr)
                     + (e("i,mlj->mlij", pu, pr) + rd.hv_pj_sign * e("j,mli->mlij", pu, pr))
                     / (2.0 * f_val * alpha**2)
                     - e("mhi,hlj->mlij", pr, pr) / (4.0 * f_val**2 * alpha**2))

    # R̃(E_l̄, E_ī)E_j̄
    k1 = (alpha**2 + alpha + 1.0) / alpha**3
    k2 = (alpha + 2.0) / alpha**3
    k3 = (alpha - 1.0) / alpha**3
    r[v, v, v, v] = (k1 * (e("ij,lm->mlij", ginv, eye) - e("jl,im->mlij", ginv, eye))
                     + k2 * (e("lj,i,m->mlij", ginv, pu, p) - e("ij,l,m->mlij", ginv, pu, p))
                     + k3 * (e("im,l,j->mlij", eye, pu, pu) - e("lm,i,j->mlij", eye, pu, pu)))

    return BundleCurvatureTable(r, label=rd.name)


def commutator_curvature(table_jet: jc.ChartJet, chart: FrameChart) -> np.ndarray:
    """Curvature of the connection whose order-one table jet is given, by the frame commutator."""
    gam = table_jet.value
    et = chart.along_frame(table_jet)
    brackets = chart.brackets
    return (np.einsum("aebc->eabc", et) - np.einsum("beac->eabc", et)
            + np.einsum("dbc,ead->eabc", gam, gam) - np.einsum("dac,ebd->eabc", gam, gam)
            - np.einsum("dab,edc->eabc", brackets, gam))


@functools.lru_cache(maxsize=512)
def _commutator_oracle(g: MetricField, f: ScalingField, pt: CotangentPoint,
                       engine: DiffEngine) -> BundleCurvatureTable:
    chart = frame_chart(g, pt, engine)
    return BundleCurvatureTable(commutator_curvature(koszul_jet(g, f, pt, engine), chart), label="commutator")


def commutator_oracle(g: MetricField, f: ScalingField, pt: CotangentPoint,
                      engine: Optional[DiffEngine] = None) -> BundleCurvatureTable:
    """R̃ by differentiating the Koszul table along the frame."""
    return _commutator_oracle(g, f, pt, jc.resolve_engine(engine))


def family_errors(formula: BundleCurvatureTable, oracle: BundleCurvatureTable) -> Dict[str, float]:
    return {name: float(np.max(np.abs(formula.family(name) - oracle.family(name)))) for name in FAMILIES}


def lowered_curvature(r: np.ndarray, G: np.ndarray) -> np.ndarray:
    """low[a, b, c, d] = G(R̃(E_a, E_b)E_c, E_d)."""
    return np.einsum("eabc,ed->abcd", r, G)


def symmetry_defect(g: MetricField, f: ScalingField, pt: CotangentPoint,
                    engine: Optional[DiffEngine] = None) -> Dict[str, float]:
    """Lowered-curvature symmetries and the first Bianchi identity of the oracle table."""
    r = commutator_oracle(g, f, pt, engine).r
    low = lowered_curvature(r, metric_jet(g, f, pt, engine).value)
    cyclic = r + np.einsum("eabc->ecab", r) + np.einsum("eabc->ebca", r)
    return {
        "antisymmetry_first_pair": float(np.max(np.abs(low + low.transpose(1, 0, 2, 3)))),
        "antisymmetry_last_pair": float(np.max(np.abs(low + low.transpose(0, 1, 3, 2)))),
        "pair_symmetry": float(np.max(np.abs(low - low.transpose(2, 3, 0, 1)))),
        "first_bianchi": float(np.max(np.abs(cyclic))),
    }


@dataclass(frozen=True)
class NeverFlatResult:
    norms: tuple
    minimum: float
    passed: bool


def never_flat_check(g: MetricField, f: ScalingField, samples: Iterable[CotangentPoint],
                     engine: Optional[DiffEngine] = None) -> NeverFlatResult:
    """min over samples of max |R̃| must stay above the floor."""
    norms: List[float] = [float(np.max(np.abs(commutator_oracle(g, f, pt, engine).r))) for pt in samples]
    if not norms:
        raise ValueError("never_flat_check needs at least one sample")
    minimum = min(norms)
    return NeverFlatResult(norms=tuple(norms), minimum=minimum, passed=minimum > NEVER_FLAT_FLOOR)
