"""Turn symbolic source terms into annihilating operator chains.

A nonhomogeneous problem L0 u = f is handled by adding kernel families for
operators L1..L_NL whose composition kills f.  Supported source forms:

  zero            -> empty chain (homogeneous)
  exponential     -> c * e^{a . x}: killed by (lap - |a|^2), i.e. modified
                     Helmholtz with k = |a| (plain Laplacian when a = 0)
  polynomial      -> total degree d: killed by lap^(floor(d/2) + 1)
  trig_eigen      -> any Laplacian eigenfunction, lap g = eigenvalue * g
  separable_time  -> g(x) e^{b t} with eigenfunction g: killed by the heat
                     operator (d/dt - kappa lap) with kappa = b / eigenvalue

When a chain operator coincides with the governing operator or repeats
another chain operator, the power form (power_n incremented) is returned so
the high-order kernel tables are selected.
"""

import math
from dataclasses import dataclass

from . import operators as ops
from .errors import UnsupportedSourceError
from .operators import OperatorSpec

ZERO = "zero"
EXPONENTIAL = "exponential"
POLYNOMIAL = "polynomial"
TRIG_EIGEN = "trig_eigen"
SEPARABLE_TIME = "separable_time"


@dataclass(frozen=True)
class SourceTerm:
    """Symbolic description of a PDE source term."""

    kind: str
    coeff: float = 1.0
    direction: tuple = ()     # exponential: the a of e^{a . x}
    degree: int = 0           # polynomial: total degree <= 3
    eigenvalue: float = 0.0   # trig_eigen: lap g = eigenvalue * g
    rate: float = 0.0         # separable_time: the b of e^{b t}
    spatial: "SourceTerm" = None

    def __post_init__(self):
        if self.kind not in (ZERO, EXPONENTIAL, POLYNOMIAL, TRIG_EIGEN, SEPARABLE_TIME):
            raise UnsupportedSourceError(f"unknown source kind {self.kind!r}")
        if self.kind == POLYNOMIAL and not (0 <= self.degree <= 3):
            raise UnsupportedSourceError("polynomial sources support degree <= 3")
        if self.kind == SEPARABLE_TIME and self.spatial is None:
            raise UnsupportedSourceError("separable_time needs a spatial factor")


def _spatial_eigenvalue(term):
    """lap g = lambda g for eigenfunction-type spatial factors."""
    if term.kind == EXPONENTIAL:
        return sum(a * a for a in term.direction)
    if term.kind == TRIG_EIGEN:
        return term.eigenvalue
    raise UnsupportedSourceError(
        f"spatial factor {term.kind!r} is not a Laplacian eigenfunction")


def _steady_annihilator(term, dim):
    if term.kind == EXPONENTIAL:
        lam = sum(a * a for a in term.direction)
        if lam == 0.0:
            return [OperatorSpec(ops.LAPLACE, dim)]
        return [OperatorSpec(ops.MODIFIED_HELMHOLTZ, dim, k=math.sqrt(lam))]
    if term.kind == TRIG_EIGEN:
        lam = term.eigenvalue
        if lam == 0.0:
            return [OperatorSpec(ops.LAPLACE, dim)]
        if lam > 0.0:
            return [OperatorSpec(ops.MODIFIED_HELMHOLTZ, dim, k=math.sqrt(lam))]
        return [OperatorSpec(ops.HELMHOLTZ, dim, k=math.sqrt(-lam))]
    if term.kind == POLYNOMIAL:
        reps = term.degree // 2 + 1
        return [OperatorSpec(ops.LAPLACE, dim)] * reps
    raise UnsupportedSourceError(f"unsupported steady source {term.kind!r}")


def _same_operator(a, b):
    return (a.kind, a.dim, a.k, a.diffusion, a.velocity, a.c1) == \
        (b.kind, b.dim, b.k, b.diffusion, b.velocity, b.c1)


_POWER_OF = {ops.LAPLACE: ops.POLY_LAPLACE, ops.HELMHOLTZ: ops.HELMHOLTZ_POWER,
             ops.MODIFIED_HELMHOLTZ: ops.MOD_HELMHOLTZ_POWER,
             ops.CONVECTION_DIFFUSION: ops.CONV_DIFF_POWER}


def _to_power(op, power_n):
    if power_n == 0:
        return op
    return OperatorSpec(_POWER_OF[op.kind], op.dim, k=op.k, diffusion=op.diffusion,
                        velocity=op.velocity, power_n=power_n)


def build_annihilator_chain(source, base_operator):
    """Operator list L1..L_NL annihilating the source (possibly empty).

    Repeats are merged into power forms; a chain operator equal to the base
    is returned as the power covering base + chain so its kernel family adds
    new basis directions instead of duplicating the governing family.
    """
    if source is None or source.kind == ZERO or source.coeff == 0.0:
        return []
    dim = base_operator.dim
    if source.kind == SEPARABLE_TIME:
        lam = _spatial_eigenvalue(source.spatial)
        if lam == 0.0:
            raise UnsupportedSourceError(
                "separable_time needs a nonzero spatial eigenvalue "
                "(harmonic-in-space sources have no heat-type annihilator)")
        kappa = source.rate / lam
        if kappa <= 0.0:
            raise UnsupportedSourceError(
                f"derived diffusivity b/lambda = {kappa:g} is not positive")
        return [OperatorSpec(ops.HEAT, dim, k=kappa)]
    raw = _steady_annihilator(source, dim)

    # merge repeats (and collisions with the base) into power forms
    merged = []
    seen = []
    for op in raw:
        for entry in seen:
            if _same_operator(entry[0], op):
                entry[1] += 1
                break
        else:
            seen.append([op, 1])
    base_single = base_operator.base() if base_operator.kind in ops.POWER_KINDS \
        else base_operator
    base_mult = base_operator.power_n + 1 if base_operator.kind in ops.POWER_KINDS else 1
    for op, mult in seen:
        if op.kind in _POWER_OF and _same_operator(op, base_single):
            # power covering base^base_mult . op^mult
            merged.append(_to_power(op, base_mult + mult - 1))
        elif mult > 1:
            merged.append(_to_power(op, mult - 1))
        else:
            merged.append(op)
    return merged
