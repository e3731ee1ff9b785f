import math

import pytest
import sympy as sp

from pikfnn.annihilators import SourceTerm, build_annihilator_chain
from pikfnn.errors import UnsupportedSourceError
from pikfnn.operators import OperatorSpec


def apply_symbolic(op, expr, coords, t=None):
    """Apply an OperatorSpec to a sympy expression (the independent oracle).

    Float operator parameters are rationalized within 1e-12 so exact
    cancellation is visible symbolically.
    """
    def lap(e):
        return sum(sp.diff(e, c, 2) for c in coords)

    def coef(v):
        return sp.nsimplify(v, rational=True, tolerance=1e-12)

    reps = op.power_n + 1
    if op.kind == "biharmonic":
        reps = 2
    base = op.base()
    for _ in range(reps):
        if base.kind == "laplace":
            expr = lap(expr)
        elif base.kind == "helmholtz":
            expr = lap(expr) + coef(base.k ** 2) * expr
        elif base.kind == "modified-helmholtz":
            expr = lap(expr) - coef(base.k ** 2) * expr
        elif base.kind == "heat":
            expr = sp.diff(expr, t) - coef(base.k) * lap(expr)
        else:
            raise AssertionError(f"oracle has no rule for {base.kind}")
    return sp.simplify(expr)


X = sp.symbols("x1 x2 x3")
T = sp.Symbol("t")


def test_zero_source_yields_empty_chain():
    base = OperatorSpec("helmholtz", 2, k=1.0)
    assert build_annihilator_chain(SourceTerm("zero"), base) == []
    assert build_annihilator_chain(None, base) == []
    assert build_annihilator_chain(SourceTerm("polynomial", coeff=0.0, degree=2), base) == []


def test_exponential_source_example():
    # f = 2 e^{x1+x2+x3} with base (lap - 1) in 3D -> [(lap - 3)], k = sqrt(3)
    base = OperatorSpec("modified-helmholtz", 3, k=1.0)
    src = SourceTerm("exponential", coeff=2.0, direction=(1.0, 1.0, 1.0))
    chain = build_annihilator_chain(src, base)
    assert len(chain) == 1
    op = chain[0]
    assert op.kind == "modified-helmholtz"
    assert op.k == pytest.approx(math.sqrt(3.0))
    expr = 2 * sp.exp(X[0] + X[1] + X[2])
    assert apply_symbolic(op, expr, X) == 0


def test_linear_polynomial_minimal_chain():
    # f = x1 with base (lap + 1): lap(x1) = 0, a single Laplace suffices
    base = OperatorSpec("helmholtz", 2, k=1.0)
    chain = build_annihilator_chain(SourceTerm("polynomial", degree=1), base)
    assert len(chain) == 1
    assert chain[0].kind == "laplace"
    assert chain[0].power_n == 0
    assert apply_symbolic(chain[0], X[0], X[:2]) == 0


def test_cubic_polynomial_needs_power_form():
    base = OperatorSpec("helmholtz", 2, k=1.0)
    chain = build_annihilator_chain(SourceTerm("polynomial", degree=3), base)
    assert len(chain) == 1
    assert chain[0].kind == "poly-laplace"
    assert chain[0].power_n == 1  # lap^2
    expr = X[0] ** 3 + X[0] * X[1] ** 2 - 2 * X[1] ** 3
    assert apply_symbolic(chain[0], expr, X[:2]) == 0


def test_polynomial_collides_with_laplace_base():
    # base lap, f = x1: chain operator equals the base, so the power form
    # (lap^2) is returned and covers base . chain
    base = OperatorSpec("laplace", 2)
    chain = build_annihilator_chain(SourceTerm("polynomial", degree=1), base)
    assert len(chain) == 1
    assert chain[0].kind == "poly-laplace"
    assert chain[0].power_n == 1
    assert apply_symbolic(chain[0], X[0], X[:2]) == 0


def test_exponential_collides_with_base():
    base = OperatorSpec("modified-helmholtz", 2, k=math.sqrt(2.0))
    src = SourceTerm("exponential", direction=(1.0, 1.0))
    chain = build_annihilator_chain(src, base)
    assert len(chain) == 1
    assert chain[0].kind == "modified-helmholtz-power"
    assert chain[0].power_n == 1
    expr = sp.exp(X[0] + X[1])
    assert sp.simplify(apply_symbolic(chain[0], expr, X[:2])) == 0


def test_trig_eigen_source():
    # lap(sin x1 + cos x2) = -(sin x1 + cos x2): eigenvalue -1 -> (lap + 1)
    base = OperatorSpec("laplace", 2)
    chain = build_annihilator_chain(SourceTerm("trig_eigen", eigenvalue=-1.0), base)
    assert len(chain) == 1
    assert chain[0].kind == "helmholtz"
    assert chain[0].k == pytest.approx(1.0)
    expr = sp.sin(X[0]) + sp.cos(X[1])
    assert sp.simplify(apply_symbolic(chain[0], expr, X[:2])) == 0


def test_separable_time_exponential():
    # f = -0.002 (sin x1 + cos x2 + sin x3) e^{-0.003 t}; lap g = -g, b = -0.003
    # -> heat operator with kappa = b/lambda = 0.003 (the printed 0.002 fails)
    base = OperatorSpec("heat", 3, k=0.001)
    src = SourceTerm("separable_time", coeff=-0.002, rate=-0.003,
                     spatial=SourceTerm("trig_eigen", eigenvalue=-1.0))
    chain = build_annihilator_chain(src, base)
    assert len(chain) == 1
    assert chain[0].kind == "heat"
    assert chain[0].k == pytest.approx(0.003)
    expr = -sp.Rational(2, 1000) * (sp.sin(X[0]) + sp.cos(X[1]) + sp.sin(X[2])) \
        * sp.exp(-sp.Rational(3, 1000) * T)
    assert sp.simplify(apply_symbolic(chain[0], expr, X, t=T)) == 0
    # the paper's printed coefficient does not annihilate the source
    wrong = OperatorSpec("heat", 3, k=0.002)
    assert sp.simplify(apply_symbolic(wrong, expr, X, t=T)) != 0


def test_unsupported_sources():
    base = OperatorSpec("laplace", 2)
    with pytest.raises(UnsupportedSourceError):
        SourceTerm("polynomial", degree=4)
    with pytest.raises(UnsupportedSourceError):
        SourceTerm("rational")
    with pytest.raises(UnsupportedSourceError):
        build_annihilator_chain(
            SourceTerm("separable_time", rate=1.0,
                       spatial=SourceTerm("trig_eigen", eigenvalue=0.0)),
            OperatorSpec("heat", 2, k=1.0))
    with pytest.raises(UnsupportedSourceError):
        # growing-in-time source over a decaying spatial mode: kappa < 0
        build_annihilator_chain(
            SourceTerm("separable_time", rate=1.0,
                       spatial=SourceTerm("trig_eigen", eigenvalue=-1.0)),
            OperatorSpec("heat", 2, k=1.0))
