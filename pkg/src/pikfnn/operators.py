"""Governing-operator descriptions, high-order coefficient recurrences, and
finite-difference operator application (the independent check used by
verify-kernels).

OperatorSpec instances are frozen and shareable across threads.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

# operator kinds
LAPLACE = "laplace"
HELMHOLTZ = "helmholtz"
MODIFIED_HELMHOLTZ = "modified-helmholtz"
CONVECTION_DIFFUSION = "convection-diffusion"
BIHARMONIC = "biharmonic"
POLY_LAPLACE = "poly-laplace"
HELMHOLTZ_POWER = "helmholtz-power"
MOD_HELMHOLTZ_POWER = "modified-helmholtz-power"
CONV_DIFF_POWER = "convection-diffusion-power"
HEAT = "heat"
WAVE = "wave"
STRUCTURAL_DIFFUSION = "structural-diffusion"
ELASTOSTATIC = "elastostatic"

STEADY_KINDS = (LAPLACE, HELMHOLTZ, MODIFIED_HELMHOLTZ, CONVECTION_DIFFUSION,
                BIHARMONIC, POLY_LAPLACE, HELMHOLTZ_POWER, MOD_HELMHOLTZ_POWER,
                CONV_DIFF_POWER, ELASTOSTATIC)
TIME_KINDS = (HEAT, WAVE, STRUCTURAL_DIFFUSION)
POWER_KINDS = (POLY_LAPLACE, HELMHOLTZ_POWER, MOD_HELMHOLTZ_POWER, CONV_DIFF_POWER)
_K_POWER_KINDS = (HELMHOLTZ_POWER, MOD_HELMHOLTZ_POWER, CONV_DIFF_POWER)

STRUCTURAL_SELECTORS = ("identity", "power", "exp", "log")


@dataclass(frozen=True)
class OperatorSpec:
    """Symbolic description of a governing differential operator.

    k is the wavenumber for (modified) Helmholtz kinds, the reaction
    coefficient for convection-diffusion (the printed operator uses k^2 but
    the derived mu is only consistent with a plain-k reaction term), and the
    diffusivity for the heat kind.  power_n = n means the operator raised to
    the (n+1)-th power (high-order tables).
    """

    kind: str
    dim: int
    k: float = 0.0
    diffusion: float = 1.0          # D
    velocity: tuple = ()            # v, length dim
    c1: float = 1.0                 # wave speed
    power_n: int = 0
    alpha: float = 1.0              # temporal Hausdorff exponent
    beta: float = 1.0               # spatial Hausdorff exponent
    structural_t: str = "identity"
    structural_x: str = "identity"
    nu: float = 0.0                 # Poisson ratio
    shear: float = 1.0              # shear modulus (Pa)

    def __post_init__(self):
        if self.kind not in STEADY_KINDS + TIME_KINDS:
            raise DomainError(f"unknown operator kind {self.kind!r}")
        if self.dim not in (2, 3, 4):
            raise DomainError(f"dim must be 2, 3 or 4, got {self.dim}")
        if self.dim == 4 and self.kind != LAPLACE:
            raise DomainError("dim=4 is only supported for the Laplace operator")
        if self.kind in (HELMHOLTZ, MODIFIED_HELMHOLTZ, HELMHOLTZ_POWER,
                         MOD_HELMHOLTZ_POWER) and not self.k > 0:
            raise DomainError(f"{self.kind} requires k > 0, got {self.k}")
        if self.kind in (CONVECTION_DIFFUSION, CONV_DIFF_POWER):
            if not self.diffusion > 0:
                raise DomainError("convection-diffusion requires D > 0")
            if len(self.velocity) != self.dim:
                raise DomainError("velocity must have length dim")
            if self.k < 0:
                raise DomainError("reaction coefficient k must be >= 0")
            mu = self.mu_cd
            if not (math.isfinite(mu) and mu > 0):
                raise DomainError(f"derived mu must be finite and > 0, got {mu}")
        if self.kind == HEAT and not self.k > 0:
            raise DomainError("heat operator requires diffusivity k > 0")
        if self.kind == WAVE and not self.c1 > 0:
            raise DomainError("wave operator requires c1 > 0")
        if self.kind == ELASTOSTATIC:
            if not (0.0 <= self.nu < 0.5):
                raise DomainError(f"need 0 <= nu < 0.5, got {self.nu}")
            if not self.shear > 0:
                raise DomainError("shear modulus must be > 0")
            if self.dim != 2:
                raise DomainError("elastostatic kernels are 2D only")
        if self.power_n < 0:
            raise DomainError("power_n must be >= 0")
        if self.kind == STRUCTURAL_DIFFUSION:
            if self.dim != 2:
                raise DomainError("structural-diffusion model is 2D")
            if not self.diffusion > 0:
                raise DomainError("structural diffusion requires D > 0")
            for sel in (self.structural_t, self.structural_x):
                if sel not in STRUCTURAL_SELECTORS:
                    raise DomainError(f"unknown structural selector {sel!r}")

    @property
    def mu_cd(self):
        """mu = sqrt((|v|/2D)^2 + k/D) for convection-diffusion kinds."""
        vnorm = math.sqrt(sum(v * v for v in self.velocity))
        return math.sqrt((vnorm / (2.0 * self.diffusion)) ** 2 + self.k / self.diffusion)

    @property
    def is_time_dependent(self):
        return self.kind in TIME_KINDS

    def base(self):
        """The single-power operator a power kind is built from."""
        table = {POLY_LAPLACE: LAPLACE, HELMHOLTZ_POWER: HELMHOLTZ,
                 MOD_HELMHOLTZ_POWER: MODIFIED_HELMHOLTZ,
                 CONV_DIFF_POWER: CONVECTION_DIFFUSION}
        if self.kind == BIHARMONIC:
            return OperatorSpec(LAPLACE, self.dim)
        if self.kind in table:
            return OperatorSpec(table[self.kind], self.dim, k=self.k,
                                diffusion=self.diffusion, velocity=self.velocity)
        return self


@dataclass(frozen=True)
class HighOrderCoeffs:
    """A_0..A_n, B_0..B_n, C_0..C_n, D_0..D_n of the high-order kernel tables."""

    A: tuple
    B: tuple
    C: tuple
    D_seq: tuple


def high_order_coeffs(op, krho=1.0):
    """Coefficient sequences up to op.power_n.

    A_0=1, A_n = A_{n-1}/(2 n k^2);  B_0=0, B_{n+1} = (C_n/(n+1) + B_n)/(4(n+1)^2);
    C_0=1, C_{n+1} = C_n/(4(n+1)^2);  D_0=1, D_{n+1} = krho * D_n.
    The A recurrence needs k > 0; D depends on the evaluation point through krho.
    """
    n = op.power_n
    k = op.mu_cd if op.kind in (CONVECTION_DIFFUSION, CONV_DIFF_POWER) else op.k
    if n >= 1 and k <= 0 and op.kind in _K_POWER_KINDS:
        raise DomainError(f"A-recurrence requires k > 0 for {op.kind}")
    a = [1.0]
    b = [0.0]
    c = [1.0]
    d = [1.0]
    for i in range(1, n + 1):
        if k > 0:
            a.append(a[-1] / (2.0 * i * k * k))
        b.append((c[-1] / i + b[-1]) / (4.0 * i * i))
        c.append(c[-1] / (4.0 * i * i))
        d.append(krho * d[-1])
    if k <= 0:
        a = a + [float("nan")] * (n + 1 - len(a))
    return HighOrderCoeffs(A=tuple(a), B=tuple(b), C=tuple(c), D_seq=tuple(d))


# ---------------------------------------------------------------------------
# structural functions

def structural_fn(selector, exponent):
    """Return (F, F') for a named structural function selector; both accept
    scalars or numpy arrays.

    'power' with exponent exactly 1 falls back to identity so the
    power==classical reduction is bit-for-bit.
    """
    import numpy as np

    if selector == "identity" or (selector == "power" and exponent == 1.0):
        return (lambda v: v), (lambda v: 1.0)
    if selector == "power":
        return (lambda v: np.power(v, exponent)), \
            (lambda v: exponent * np.power(v, exponent - 1.0))
    if selector == "exp":
        return np.exp, np.exp
    if selector == "log":
        return np.log, (lambda v: 1.0 / v)
    raise DomainError(f"unknown structural selector {selector!r}")


# ---------------------------------------------------------------------------
# finite-difference operator application (independent of the kernel formulas)

def _d1(fn, x, i, h):
    # 5-point first derivative
    xp = list(x)
    vals = []
    for off in (-2, -1, 1, 2):
        xp[i] = x[i] + off * h
        vals.append(fn(xp))
    return (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h)


def _d2(fn, x, i, h):
    # 5-point second derivative
    xp = list(x)
    vals = []
    for off in (-2, -1, 0, 1, 2):
        xp[i] = x[i] + off * h
        vals.append(fn(xp))
    return (-vals[0] + 16.0 * vals[1] - 30.0 * vals[2] + 16.0 * vals[3] - vals[4]) / (12.0 * h * h)


def _laplacian(fn, x, h):
    return sum(_d2(fn, x, i, h) for i in range(len(x)))


def fd_step(x, order=1):
    """Default step: 1e-4 * max(1, |x|) for single applications, widened for
    nested higher-order operators (roundoff grows like eps/h^(2m))."""
    scale = max(1.0, math.sqrt(sum(v * v for v in x)))
    return {1: 1e-4, 2: 8e-3, 3: 2e-2}.get(order, 3e-2) * scale


def apply_steady_operator_fd(op, fn, x, h=None):
    """Apply a steady operator to fn: R^dim -> R (or C) by central differences.

    Higher-order operators (biharmonic, powers) nest the base application and
    Richardson-extrapolate the nested result (cancels the leading h^4 term,
    which otherwise drowns the 1e-4 check tolerance).
    """
    x = list(float(v) for v in x)
    reps = op.power_n + 1
    if op.kind == BIHARMONIC:
        reps = 2
    base = op.base()
    if h is None:
        h = fd_step(x, order=reps)

    def apply_once(g, pt, step):
        if base.kind == LAPLACE:
            return _laplacian(g, pt, step)
        if base.kind == HELMHOLTZ:
            return _laplacian(g, pt, step) + base.k ** 2 * g(pt)
        if base.kind == MODIFIED_HELMHOLTZ:
            return _laplacian(g, pt, step) - base.k ** 2 * g(pt)
        if base.kind == CONVECTION_DIFFUSION:
            conv = sum(base.velocity[i] * _d1(g, pt, i, step) for i in range(len(pt)))
            return base.diffusion * _laplacian(g, pt, step) + conv - base.k * g(pt)
        raise DomainError(f"no FD rule for steady operator {op.kind!r}")

    if reps == 1:
        return apply_once(fn, x, h)

    def nested(level, step):
        if level == 0:
            return fn
        inner = nested(level - 1, step)
        return lambda pt: apply_once(inner, pt, step)

    def full(step):
        return apply_once(nested(reps - 1, step), x, step)

    return (16.0 * full(h) - full(2.0 * h)) / 15.0


def apply_time_operator_fd(op, fn, x, t, h=None, ht=None):
    """Apply a transient operator to fn(x, t) by central differences.

    heat: du/dt - k lap(u);  wave: d2u/dt2 - c1^2 lap(u);
    structural-diffusion: u_t/G'(t) - D sum_i (1/F') d/dx_i ((1/F') du/dx_i).
    """
    x = list(float(v) for v in x)
    t = float(t)
    if h is None:
        h = fd_step(x, order=1)
    if ht is None:
        ht = 1e-4 * max(1.0, abs(t))

    def fx(pt):
        return fn(pt, t)

    def ft(tv):
        return fn(x, tv)

    if op.kind == HEAT:
        ut = _d1_scalar(ft, t, ht)
        return ut - op.k * _laplacian(fx, x, h)
    if op.kind == WAVE:
        utt = _d2_scalar(ft, t, ht)
        return utt - op.c1 ** 2 * _laplacian(fx, x, h)
    if op.kind == STRUCTURAL_DIFFUSION:
        gfun, gprime = structural_fn(op.structural_t, op.alpha)
        ffun, fprime = structural_fn(op.structural_x, op.beta)
        ut = _d1_scalar(ft, t, ht) / gprime(t)
        total = 0.0
        for i in range(len(x)):
            def inner(pt, _i=i):
                return _d1(fx, list(pt), _i, h) / fprime(pt[_i])
            total += _d1(inner, x, i, h) / fprime(x[i])
        return ut - op.diffusion * total
    raise DomainError(f"no FD rule for time operator {op.kind!r}")


def _d1_scalar(fn, t, h):
    return (fn(t - 2 * h) - 8.0 * fn(t - h) + 8.0 * fn(t + h) - fn(t + 2 * h)) / (12.0 * h)


def _d2_scalar(fn, t, h):
    return (-fn(t - 2 * h) + 16.0 * fn(t - h) - 30.0 * fn(t) + 16.0 * fn(t + h)
            - fn(t + 2 * h)) / (12.0 * h * h)
