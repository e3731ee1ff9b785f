"""Two-layer kernel-function network: design matrix assembly, forward
evaluation, residuals, and model serialization.

The hidden layer is the ordered list of kernel families; the output layer is
the trained linear weight vector.  Column ordering is family-major, then
source index (then force component for elasticity, member index for
T-complete families), so weight vectors are portable across runs.

Assembly and forward evaluation are pure given their inputs; rows/points may
be partitioned freely because every entry is computed independently.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from . import kernels as kn
from .errors import ConfigurationError, SingularityError
from .geometry import CollocationSet, SourceSet
from .kernels import (
    KernelFamily,
    eval_elasticity_kernel,
    elasto_disp_gradient,
    eval_tcomplete_member,
    kernel_block,
    kernel_gradient_block,
    kernel_operator_block,
    tcomplete_members,
)
from .registry import format_kernel_id, parse_kernel_id


def family_width(family, sources):
    """Number of hidden neurons a family contributes."""
    if family.kind == kn.T_COMPLETE:
        return len(tcomplete_members(family))
    if family.kind in (kn.ELASTO_DISP, kn.ELASTO_TRAC):
        return 2 * len(sources)
    if family.complex_split:
        return 2 * len(sources)  # separate real- and imaginary-part columns
    return len(sources)


@dataclass
class DesignMatrix:
    """Dense training matrix plus per-row kind tags and column layout."""

    entries: np.ndarray
    row_kinds: np.ndarray
    col_slices: tuple = field(default=())

    @property
    def shape(self):
        return self.entries.shape

    def group_rows(self, kinds):
        mask = np.isin(self.row_kinds, list(kinds))
        return np.nonzero(mask)[0]


@dataclass
class PikfnnModel:
    """Kernel families + sources + linear output weights."""

    families: list
    sources: SourceSet
    dim: int
    weights: np.ndarray = None

    def __post_init__(self):
        if not self.families:
            raise ConfigurationError("model needs at least one kernel family")
        for fam in self.families:
            if fam.operator.dim != self.dim:
                raise ConfigurationError(
                    f"family {format_kernel_id(fam)} has dim {fam.operator.dim}, "
                    f"model has {self.dim}")

    @property
    def width(self):
        return sum(family_width(f, self.sources) for f in self.families)

    def require_weights(self):
        if self.weights is None:
            raise ConfigurationError("model has no trained weights")
        if len(self.weights) != self.width:
            raise ConfigurationError(
                f"weight length {len(self.weights)} != neuron count {self.width}")


def assemble(families, sources, colloc, governing=None, check_finite=True):
    """Design matrix: rows = collocation rows, columns = hidden neurons.

    Dirichlet rows take kernel values, Neumann rows normal-dot-gradients,
    Initial rows kernel values at the row time, interior-residual rows the
    governing operator applied to the kernel (defaults to the first family's
    operator, the phi^{L0} convention).
    """
    if not families:
        raise ConfigurationError("need at least one kernel family")
    if not isinstance(colloc, CollocationSet) or len(colloc) == 0:
        raise ConfigurationError("need a non-empty collocation set")
    for fam in families:
        if fam.operator.dim != colloc.dim:
            raise ConfigurationError(
                f"kernel dim {fam.operator.dim} != collocation dim {colloc.dim}")
    if any(f.is_singular for f in families):
        geo.validate_source_separation(sources, colloc)
    if governing is None:
        governing = families[0].operator

    n = len(colloc)
    widths = [family_width(f, sources) for f in families]
    entries = np.zeros((n, sum(widths)))
    col_slices = []
    start = 0
    for fam, width in zip(families, widths):
        sl = slice(start, start + width)
        col_slices.append(sl)
        _fill_family_block(entries[:, sl], fam, sources, colloc, governing)
        start += width

    if check_finite and not np.all(np.isfinite(entries)):
        bad = np.argwhere(~np.isfinite(entries))[0]
        raise SingularityError(
            f"non-finite design-matrix entry at row {bad[0]}, column {bad[1]}")
    return DesignMatrix(entries=entries, row_kinds=colloc.kinds.copy(),
                        col_slices=tuple(col_slices))


def _fill_family_block(block, family, sources, colloc, governing):
    if family.kind in (kn.ELASTO_DISP, kn.ELASTO_TRAC):
        _fill_elastic_block(block, family, sources, colloc)
        return
    if family.kind == kn.T_COMPLETE:
        _fill_tcomplete_block(block, family, colloc)
        return
    S = sources.points
    TAU = sources.times
    m = S.shape[0]
    for kind in np.unique(colloc.kinds):
        rows = colloc.rows(kind)
        P = colloc.points[rows]
        T = colloc.times[rows] if colloc.times is not None else None
        if kind in (geo.DIRICHLET, geo.INITIAL):
            if kind == geo.INITIAL and np.any(colloc.components[rows] == 1):
                _fill_initial_rows(block, family, sources, colloc, rows)
                continue
            vals = kernel_block(family, P, S, T, TAU, real=not family.complex_split)
            _place(block, rows, m, vals, family)
        elif kind == geo.NEUMANN:
            vals = kernel_gradient_block(family, P, S, colloc.normals[rows], T, TAU)
            _place(block, rows, m, vals, family)
        elif kind == geo.INTERIOR_RESIDUAL:
            vals = kernel_operator_block(family, P, S, governing)
            _place(block, rows, m, vals, family)


def _place(block, rows, m, vals, family):
    if family.complex_split:
        block[rows, :m] = np.real(vals)
        block[rows, m:] = np.imag(vals)
    else:
        block[rows, :] = vals


def _fill_initial_rows(block, family, sources, colloc, rows):
    # initial operator I = [1, d/dt]: component 0 rows take kernel values,
    # component 1 rows the FD time derivative (second-order-in-time problems)
    S = sources.points
    TAU = sources.times
    m = S.shape[0]
    value_rows = rows[colloc.components[rows] == 0]
    vel_rows = rows[colloc.components[rows] == 1]
    if len(value_rows):
        vals = kernel_block(family, colloc.points[value_rows], S,
                            colloc.times[value_rows], TAU,
                            real=not family.complex_split)
        _place(block, value_rows, m, vals, family)
    if len(vel_rows):
        T = colloc.times[vel_rows]
        h = 1e-6 * np.maximum(1.0, np.abs(T))
        up = kernel_block(family, colloc.points[vel_rows], S, T + h, TAU)
        dn = kernel_block(family, colloc.points[vel_rows], S, T - h, TAU)
        _place(block, vel_rows, m, (up - dn) / (2.0 * h[:, None]), family)


def _fill_tcomplete_block(block, family, colloc):
    members = tcomplete_members(family)
    for j, index in enumerate(members):
        for i in range(len(colloc)):
            kind = colloc.kinds[i]
            if kind in (geo.DIRICHLET, geo.INITIAL):
                block[i, j] = eval_tcomplete_member(family, index, colloc.points[i])
            elif kind == geo.NEUMANN:
                h = 1e-6 * max(1.0, float(np.linalg.norm(colloc.points[i])))
                g = np.zeros(colloc.dim)
                for a in range(colloc.dim):
                    xp = colloc.points[i].copy()
                    xm = colloc.points[i].copy()
                    xp[a] += h
                    xm[a] -= h
                    g[a] = (eval_tcomplete_member(family, index, xp)
                            - eval_tcomplete_member(family, index, xm)) / (2 * h)
                block[i, j] = float(g @ colloc.normals[i])
            else:
                raise ConfigurationError(
                    "T-complete families support Dirichlet/Neumann/Initial rows only")


def _fill_elastic_block(block, family, sources, colloc):
    # columns: (source j, force component k); rows carry their component tag
    op = family.operator
    disp_family = family if family.kind == kn.ELASTO_DISP \
        else KernelFamily(kn.ELASTO_DISP, op)
    trac_family = family if family.kind == kn.ELASTO_TRAC \
        else KernelFamily(kn.ELASTO_TRAC, op)
    for i in range(len(colloc)):
        l = int(colloc.components[i]) or 1
        kind = colloc.kinds[i]
        for j in range(len(sources)):
            for comp in (1, 2):
                col = 2 * j + comp - 1
                if kind == geo.DIRICHLET:
                    block[i, col] = eval_elasticity_kernel(
                        disp_family, l, comp, colloc.points[i], sources.points[j])
                elif kind == geo.NEUMANN:
                    # the traction of the Kelvin displacement column is the
                    # NEGATIVE of the printed traction kernel (verified against
                    # stress differentiation); rows must carry the field's own
                    # traction or mixed displacement/traction data turn
                    # inconsistent
                    block[i, col] = -eval_elasticity_kernel(
                        trac_family, l, comp, colloc.points[i], sources.points[j],
                        normal=colloc.normals[i])
                else:
                    raise ConfigurationError(
                        "elastic rows must be Dirichlet (displacement) or "
                        "Neumann (traction)")


def forward(model, points, times=None):
    """u(x) = sum_j p_j phi_j(x, s_j) at each evaluation point."""
    model.require_weights()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    kinds = [geo.DIRICHLET] * points.shape[0]
    colloc = CollocationSet(points, kinds, np.zeros(points.shape[0]),
                            times=times)
    matrix = assemble(model.families, model.sources, colloc)
    return matrix.entries @ model.weights


def residual(model, matrix, targets):
    """Per-row residual vector: matrix @ weights - targets."""
    model.require_weights()
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (matrix.entries.shape[0],):
        raise ConfigurationError(
            f"target length {targets.shape} != row count {matrix.entries.shape[0]}")
    return matrix.entries @ model.weights - targets


# ---------------------------------------------------------------------------
# elasticity post-processing

def forward_displacement(model, points):
    """Displacement components (n, 2) for an elastic point-force model."""
    model.require_weights()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    fam = model.families[0]
    disp_family = KernelFamily(kn.ELASTO_DISP, fam.operator)
    out = np.zeros((points.shape[0], 2))
    w = model.weights
    for i, x in enumerate(points):
        for l in (1, 2):
            total = 0.0
            for j, s in enumerate(model.sources.points):
                for comp in (1, 2):
                    total += w[2 * j + comp - 1] * eval_elasticity_kernel(
                        disp_family, l, comp, x, s)
            out[i, l - 1] = total
    return out


def forward_stress(model, points):
    """Plane-strain stresses (sigma_11, sigma_22, sigma_12) at each point."""
    model.require_weights()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    op = model.families[0].operator
    nu, mu = op.nu, op.shear
    lam = 2.0 * mu * nu / (1.0 - 2.0 * nu)
    out = np.zeros((points.shape[0], 3))
    w = model.weights
    for i, x in enumerate(points):
        grad = np.zeros((2, 2))  # grad[l-1, j-1] = d u_l / d x_j
        for j_src, s in enumerate(model.sources.points):
            dx = x - s
            for l in (1, 2):
                for comp in (1, 2):
                    grad[l - 1] += w[2 * j_src + comp - 1] * \
                        elasto_disp_gradient(op, l, comp, dx)
        eps = 0.5 * (grad + grad.T)
        tr = eps[0, 0] + eps[1, 1]
        out[i, 0] = lam * tr + 2.0 * mu * eps[0, 0]
        out[i, 1] = lam * tr + 2.0 * mu * eps[1, 1]
        out[i, 2] = 2.0 * mu * eps[0, 1]
    return out


def fit_particular_weights(chain_families, sources, points, f_values,
                           governing, times=None):
    """Least-squares weights q with (L0 sum_j q_j phi^{chain})(x_i) = f(x_i).

    Boundary-only data plus uniqueness of the chain operators pins the
    particular solution: the annihilator families reproduce the source term,
    and the main family then only has to fit source-corrected boundary data.
    Returns (q, fit_residual_rms).
    """
    blocks = [kn.governing_applied_block(f, governing, points, sources.points,
                                         times, sources.times)
              for f in chain_families]
    B = np.hstack(blocks)
    f_values = np.asarray(f_values, dtype=float)
    q, *_ = np.linalg.lstsq(B, f_values, rcond=None)
    rms = float(np.sqrt(np.mean((B @ q - f_values) ** 2)))
    return q, rms


def apply_row_weights(matrix, targets, weight_by_kind):
    """Scale matrix rows and targets per row kind (Cauchy balancing)."""
    scale = np.ones(matrix.entries.shape[0])
    for kind, w in weight_by_kind.items():
        scale[matrix.row_kinds == kind] = w
    scaled = DesignMatrix(entries=matrix.entries * scale[:, None],
                          row_kinds=matrix.row_kinds, col_slices=matrix.col_slices)
    return scaled, np.asarray(targets, dtype=float) * scale


# ---------------------------------------------------------------------------
# serialization (text document; floats survive the round trip exactly)

def save_model(path, model):
    model.require_weights()
    doc = {
        "dim": model.dim,
        "kernels": [format_kernel_id(f) for f in model.families],
        "sources": {
            "points": model.sources.points.tolist(),
            "times": None if model.sources.times is None else model.sources.times.tolist(),
            "enhanced": model.sources.enhanced,
            "delay_dt": model.sources.delay_dt,
        },
        "weights": model.weights.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_model(path):
    with open(path) as fh:
        doc = json.load(fh)
    families = [parse_kernel_id(ident) for ident in doc["kernels"]]
    src = doc["sources"]
    sources = SourceSet(np.asarray(src["points"], dtype=float),
                        times=None if src["times"] is None else np.asarray(src["times"]),
                        enhanced=src.get("enhanced", False),
                        delay_dt=src.get("delay_dt", 0.0))
    return PikfnnModel(families=families, sources=sources, dim=int(doc["dim"]),
                       weights=np.asarray(doc["weights"], dtype=float))
