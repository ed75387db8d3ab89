"""
Almost paracomplex structures on T*M and the connections built from them.

Structures are constant matrices in the adapted frame, acting as
(J v)^α = J[α, β] v^β:

    J   = diag(-I_n, +I_n)   (J ^HX = -^HX, J ^Vω = ^Vω)
    ᴰI  = diag(+I_n, -I_n)   (diagonal lift)
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from base_geometry import MetricField
from cg_metric import ScalingField, metric_jet, purity_check
from cgverify_logging import get_logger
from cotangent_frame import CotangentPoint, frame_chart
from curvature_bundle import commutator_curvature, commutator_oracle
from jet_calculus import DiffEngine
from levi_civita import (ConnectionTable, connection_formula, formula_point, frame_metric_derivative,
                         koszul_jet, koszul_oracle, torsion)

logger = get_logger(__name__)


def paracomplex_structure(n: int) -> np.ndarray:
    return np.diag(np.concatenate([-np.ones(n), np.ones(n)]))


def diagonal_lift_matrix(n: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(n), -np.ones(n)]))


def _structure(pt: CotangentPoint, J: Optional[np.ndarray]) -> np.ndarray:
    m = paracomplex_structure(pt.dim) if J is None else np.asarray(J, dtype=float)
    if m.shape != (2 * pt.dim, 2 * pt.dim):
        raise ValueError(f"structure of shape {m.shape} does not act on a {2 * pt.dim}-dimensional frame")
    return m


def phi_operator(g: MetricField, f: ScalingField, pt: CotangentPoint, J: Optional[np.ndarray] = None,
                 engine: Optional[DiffEngine] = None) -> np.ndarray:
    """phi[a, b, c] = (Φ_J G)(E_a, E_b, E_c).

    (Φ_J G)(X, Y, Z) = (JX)(G(Y, Z)) - X(G(JY, Z)) + G((L_Y J)X, Z) + G(Y, (L_Z J)X),
    with (L_Y J)X = [Y, JX] - J[Y, X] evaluated on oracle brackets.
    """
    m = _structure(pt, J)
    G = metric_jet(g, f, pt, engine).value
    eg = frame_metric_derivative(g, f, pt, engine)
    brackets = frame_chart(g, pt, engine).brackets
    lie = np.einsum("ea,dbe->bad", m, brackets) - np.einsum("eba,de->bad", brackets, m)
    return (np.einsum("ea,ebc->abc", m, eg) - np.einsum("eb,aec->abc", m, eg)
            + np.einsum("bad,dc->abc", lie, G) + np.einsum("bd,cad->abc", G, lie))


def phi_closed_form(g: MetricField, f: ScalingField, pt: CotangentPoint,
                    engine: Optional[DiffEngine] = None) -> np.ndarray:
    """Φ_J G from its nonzero components.

    Φ(^HX, ^Vθ, ^HZ) = 2 G(^Vθ, ^V(p∘R(X, Z))),  Φ(^HX, ^HY, ^Vσ) = 2 G(^V(p∘R(X, Y)), ^Vσ).
    """
    n = pt.dim
    fp = formula_point(g, f, pt, engine)
    vertical = (fp.base.ginv + np.outer(fp.p_up, fp.p_up)) / fp.alpha
    phi = np.zeros((2 * n,) * 3)
    phi[:n, n:, :n] = 2.0 * np.einsum("jl,ikl->ijk", vertical, fp.omega)
    phi[:n, :n, n:] = 2.0 * np.einsum("ijl,lk->ijk", fp.omega, vertical)
    return phi


def quasi_kahler_sum(phi: np.ndarray) -> np.ndarray:
    """Cyclic sum Φ(X,Y,Z) + Φ(Y,Z,X) + Φ(Z,X,Y)."""
    return phi + np.einsum("bca->abc", phi) + np.einsum("cab->abc", phi)


@dataclass(frozen=True, eq=False)
class DiagonalLift:
    matrix: np.ndarray
    square_defect: float
    purity_defect: float
    paraholomorphy_defect: float


def diagonal_lift_structure(g: MetricField, f: ScalingField, pt: CotangentPoint,
                            engine: Optional[DiffEngine] = None) -> DiagonalLift:
    """ᴰI with its defects: |ᴰI² - I|, purity of G, and max |Φ_ᴰI G|."""
    m = diagonal_lift_matrix(pt.dim)
    G = metric_jet(g, f, pt, engine).value
    return DiagonalLift(
        matrix=m,
        square_defect=float(np.max(np.abs(m @ m - np.eye(2 * pt.dim)))),
        purity_defect=purity_check(G, m),
        paraholomorphy_defect=float(np.max(np.abs(phi_operator(g, f, pt, m, engine)))),
    )


def structure_derivative(table: np.ndarray, m: np.ndarray) -> np.ndarray:
    """nj[d, c, a]: E_d-coefficient of (∇_{E_c} J)E_a."""
    return np.einsum("ea,dce->dca", m, table) - np.einsum("eca,de->dca", table, m)


def almost_product_connection(g: MetricField, f: ScalingField, pt: CotangentPoint,
                              J: Optional[np.ndarray] = None,
                              engine: Optional[DiffEngine] = None) -> ConnectionTable:
    """∇̄ = ∇̃ - S with S(X,Y) = ½{(∇̃_{JY}J)X + J((∇̃_Y J)X) - J((∇̃_X J)Y)}."""
    m = _structure(pt, J)
    gam = koszul_oracle(g, f, pt, engine).gamma
    nj = structure_derivative(gam, m)
    s = 0.5 * (np.einsum("cb,dca->dab", m, nj)
               + np.einsum("de,eba->dab", m, nj)
               - np.einsum("de,eab->dab", m, nj))
    return ConnectionTable(gam - s, label="almost-product")


def almost_product_explicit(g: MetricField, f: ScalingField, pt: CotangentPoint,
                            engine: Optional[DiffEngine] = None) -> ConnectionTable:
    """Closed form of ∇̄: the mixed parts of ∇̃ removed and the V-H part tripled."""
    n = pt.dim
    h, v = slice(0, n), slice(n, 2 * n)
    gam = connection_formula(g, f, pt, engine=engine).gamma.copy()
    gam[v, h, h] = 0.0
    gam[h, h, v] = 0.0
    gam[h, v, h] *= 3.0
    return ConnectionTable(gam, label="almost-product explicit")


def almost_product_torsion(g: MetricField, f: ScalingField, pt: CotangentPoint,
                           engine: Optional[DiffEngine] = None) -> np.ndarray:
    """Torsion of ∇̄ on oracle brackets."""
    brackets = frame_chart(g, pt, engine).brackets
    return torsion(almost_product_connection(g, f, pt, engine=engine).gamma, brackets)


def almost_product_torsion_formula(g: MetricField, f: ScalingField, pt: CotangentPoint,
                                   engine: Optional[DiffEngine] = None) -> np.ndarray:
    """T̄(^Vω, ^Vθ) = 0,  T̄(^Vω, ^HY) = (3/2fα) ^H(p(g^{-1}∘R(·, Y) ω̃)),  T̄(^HX, ^HY) = -^V(p∘R(X, Y))."""
    n = pt.dim
    fp = formula_point(g, f, pt, engine)
    t = np.zeros((2 * n,) * 3)
    vh = 3.0 * fp.c * np.einsum("lji->lij", fp.pr)
    t[:n, n:, :n] = vh
    t[:n, :n, n:] = -vh.transpose(0, 2, 1)
    t[n:, :n, :n] = -np.einsum("ijl->lij", fp.omega)
    return t


def product_conjugate_connection(g: MetricField, f: ScalingField, pt: CotangentPoint,
                                 structure: Optional[np.ndarray] = None,
                                 engine: Optional[DiffEngine] = None) -> ConnectionTable:
    """∇^(J)_X Y = J(∇̃_X JY) on the oracle table; pass ᴰI as ``structure`` for the second one."""
    m = _structure(pt, structure)
    gam = koszul_oracle(g, f, pt, engine).gamma
    return ConnectionTable(np.einsum("ed,dac,cb->eab", m, gam, m), label="product-conjugate")


def product_conjugate_formula(g: MetricField, f: ScalingField, pt: CotangentPoint,
                              engine: Optional[DiffEngine] = None) -> ConnectionTable:
    """The four closed-form cases of ∇^(J): mixed H/V entries of ∇̃ change sign."""
    n = pt.dim
    h, v = slice(0, n), slice(n, 2 * n)
    gam = connection_formula(g, f, pt, engine=engine).gamma.copy()
    gam[v, h, h] *= -1.0
    gam[h, h, v] *= -1.0
    return ConnectionTable(gam, label="product-conjugate explicit")


def conjugate_curvature_check(g: MetricField, f: ScalingField, pt: CotangentPoint,
                              J: Optional[np.ndarray] = None,
                              engine: Optional[DiffEngine] = None) -> float:
    """max |R^(J)(X,Y)Z - J R̃(X,Y) JZ|."""
    m = _structure(pt, J)
    conjugate_jet = koszul_jet(g, f, pt, engine).conjugated(m)
    r_conj = commutator_curvature(conjugate_jet, frame_chart(g, pt, engine))
    r = commutator_oracle(g, f, pt, engine).r
    expected = np.einsum("ed,dabk,kc->eabc", m, r, m)
    return float(np.max(np.abs(r_conj - expected)))
