"""
Derivatives of chart fields: jax forward mode, or central finite differences.

Every geometric quantity downstream is written as a jax-traceable function of
the chart point and differentiated with nested ``jax.jacfwd``, so Christoffel
symbols, curvature and ∇R come out of the metric without step-size error.
Under the finite-difference scheme each base field is replaced by the cubic
Taylor polynomial built from its finite-difference derivatives at the
evaluation point; jax then differentiates that polynomial, and everything
after the seed derivatives is shared between the two schemes.
"""
import functools
import itertools
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from cgverify_logging import get_logger

jax.config.update("jax_enable_x64", True)

logger = get_logger(__name__)

MAX_ORDER = 3


class GeometryDomainError(ValueError):
    """Base class for numerical-domain failures (CLI exit code 3)."""


class EvaluationDomainError(GeometryDomainError):
    """A field produced a non-finite value at or near the evaluation point."""


@dataclass(frozen=True)
class DiffScheme:
    """How seed derivatives of the base fields are obtained."""

    kind: str = "jets"
    step: float = 1e-4
    richardson: bool = True

    def __post_init__(self):
        if self.kind not in ("jets", "fd"):
            raise ValueError(f"unknown differentiation scheme: {self.kind!r}")
        if not 0 < self.step < 1:
            raise ValueError(f"finite-difference step must be in (0, 1), got {self.step}")

    def step_for(self, order: int) -> float:
        """Step per derivative order: 0.1h, h, 10h."""
        return self.step * {1: 0.1, 2: 1.0, 3: 10.0}[order]

    @property
    def label(self) -> str:
        if self.kind == "jets":
            return "jets"
        return f"fd(h={self.step:g}{', richardson' if self.richardson else ''})"


@dataclass(frozen=True)
class DerivativeBundle:
    """Value and partial derivative tensors of a field; blocks above ``order`` are zero."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    order: int = MAX_ORDER


@dataclass(frozen=True, eq=False)
class ChartJet:
    """A tensor at one chart point and its first partials, d1[..., μ] = ∂_μ value."""

    value: np.ndarray
    d1: np.ndarray

    def conjugated(self, m: np.ndarray) -> "ChartJet":
        """The (1,2)-table M T M, entrywise in the chart derivative."""
        return ChartJet(np.einsum("ed,dac,cb->eab", m, self.value, m),
                        np.einsum("ed,dacz,cb->eabz", m, self.d1, m))


def derivatives(fn: Callable, x, order: int) -> list:
    """fn(x) and its partial derivative tensors up to ``order`` by nested jax.jacfwd."""
    out = [fn(x)]
    deriv = fn
    for _ in range(order):
        deriv = jax.jacfwd(deriv)
        out.append(deriv(x))
    return out


def taylor_polynomial(coeffs: Sequence, dx):
    """Σ_k coeffs[k](dx, ..., dx) / k!, each coeffs[k] carrying k trailing derivative axes."""
    total = coeffs[0]
    for k in range(1, len(coeffs)):
        term = coeffs[k]
        for _ in range(k):
            term = term @ dx
        total = total + term / math.factorial(k)
    return total


def localize(field: Callable, x0, seeds: Optional[Sequence]) -> Callable:
    """The field itself, or its Taylor polynomial at x0 when fd seeds are given."""
    if seeds is None:
        return field
    return lambda x: taylor_polynomial(seeds, x - x0)


def richardson_extrapolate(estimate: Callable[[float], np.ndarray], h: float,
                           p: int = 2, r: float = 2.0) -> np.ndarray:
    """One Richardson step for an estimator with leading error O(h^p)."""
    coarse = estimate(h)
    fine = estimate(h / r)
    factor = r ** p
    return (factor * fine - coarse) / (factor - 1.0)


def _name(field: Callable) -> str:
    return getattr(field, "name", getattr(field, "__name__", repr(field)))


def _evaluate(field: Callable, x: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        out = np.asarray(field(x), dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvaluationDomainError(f"field {_name(field)} is not finite at {x}")
    return out


def _central(field: Callable, x: np.ndarray, directions: tuple, h: float) -> np.ndarray:
    """Tensor-product central difference for the mixed partial along ``directions``."""
    total = None
    for signs in itertools.product((1.0, -1.0), repeat=len(directions)):
        shift = np.zeros_like(x)
        for s, d in zip(signs, directions):
            shift[d] += s * h
        term = np.prod(signs) * _evaluate(field, x + shift)
        total = term if total is None else total + term
    return total / (2.0 * h) ** len(directions)


def _fd_coefficients(field: Callable, x: np.ndarray, order: int, scheme: DiffScheme) -> list:
    value = _evaluate(field, x)
    n = x.size
    coeffs = [value]
    for k in range(1, order + 1):
        h = scheme.step_for(k)
        out = np.zeros(value.shape + (n,) * k)
        for combo in itertools.combinations_with_replacement(range(n), k):
            if scheme.richardson:
                est = richardson_extrapolate(lambda step: _central(field, x, combo, step), h)
            else:
                est = _central(field, x, combo, h)
            for perm in set(itertools.permutations(combo)):
                out[(Ellipsis,) + perm] = est
        coeffs.append(out)
    return coeffs


def _symmetrize(arr: np.ndarray, k: int) -> np.ndarray:
    """Copy the sorted-index representative into every permutation slot."""
    if k < 2:
        return arr
    m = arr.shape[-1]
    idx = np.sort(np.indices((m,) * k).reshape(k, -1), axis=0).reshape((k,) + (m,) * k)
    return arr[(Ellipsis,) + tuple(idx)]


def _all_finite(tree) -> bool:
    return all(np.all(np.isfinite(leaf)) for leaf in jax.tree_util.tree_leaves(tree))


@dataclass(frozen=True)
class DiffEngine:
    """Derivatives of base fields with the configured scheme."""

    scheme: DiffScheme = DiffScheme()

    @property
    def exact(self) -> bool:
        return self.scheme.kind == "jets"

    def coefficients(self, field: Callable, x, order: int = MAX_ORDER) -> List[np.ndarray]:
        """Value and partial derivative tensors of ``field`` at ``x`` up to ``order``."""
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be 0..{MAX_ORDER}, got {order}")
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.exact:
            _evaluate(field, x)
            coeffs = [np.asarray(c, dtype=float) for c in derivatives(field, jnp.asarray(x), order)]
        else:
            coeffs = _fd_coefficients(field, x, order, self.scheme)
        if not _all_finite(coeffs):
            raise EvaluationDomainError(f"non-finite derivatives of {_name(field)} at {x}")
        return [_symmetrize(c, k) for k, c in enumerate(coeffs)]

    def seeds(self, field: Callable, x0) -> Optional[tuple]:
        """Finite-difference Taylor coefficients of ``field`` at x0; None when jax sees the field itself."""
        if self.exact:
            _evaluate(field, np.asarray(x0, dtype=float))
            return None
        return tuple(self.coefficients(field, x0, MAX_ORDER))


DEFAULT_ENGINE = DiffEngine()


def resolve_engine(engine: Optional[DiffEngine]) -> DiffEngine:
    return DEFAULT_ENGINE if engine is None else engine


def chart_kernel(kernel: Callable) -> Callable:
    """Compile ``kernel(fields, z)`` once per tuple of base fields.

    The returned callable takes ``(fields, engine, z, x0)`` and hands back the
    kernel's output as numpy arrays. Fields are static under ``jax.jit``; the
    fd seeds enter as traced arrays, so a new evaluation point never
    recompiles.
    """
    @functools.partial(jax.jit, static_argnums=0)
    def compiled(fields, z, x0, seeds):
        local = tuple(localize(fld, x0, s) for fld, s in zip(fields, seeds))
        return kernel(local, z)

    @functools.wraps(kernel)
    def run(fields: tuple, engine: DiffEngine, z, x0):
        x0 = np.asarray(x0, dtype=float)
        seeds = tuple(engine.seeds(fld, x0) for fld in fields)
        out = compiled(tuple(fields), jnp.asarray(z, dtype=jnp.float64), jnp.asarray(x0), seeds)
        out = jax.tree_util.tree_map(np.asarray, out)
        if not _all_finite(out):
            raise EvaluationDomainError(f"{kernel.__name__} is not finite at {tuple(np.ravel(z))}")
        return out
    return run


def derive(field: Callable, x, order: int, scheme: Optional[DiffScheme] = None) -> DerivativeBundle:
    """Value and partial derivatives up to ``order`` (1..3) of ``field`` at ``x``."""
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"derive needs an order in 1..{MAX_ORDER}, got {order}")
    scheme = scheme or DiffScheme()
    x = np.asarray(x, dtype=float).reshape(-1)
    coeffs = DiffEngine(scheme).coefficients(field, x, order)
    shape = coeffs[0].shape
    for k in range(order + 1, MAX_ORDER + 1):
        coeffs.append(np.zeros(shape + (x.size,) * k))
    logger.debug(f"derive order={order} scheme={scheme.label} at x={x.tolist()}")
    return DerivativeBundle(*coeffs, order=order)
