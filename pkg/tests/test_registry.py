import math

import pytest

from pikfnn.errors import UnsupportedKernelError
from pikfnn.kernels import eval_kernel
from pikfnn.registry import (
    format_kernel_id,
    list_kernel_ids,
    parse_kernel_id,
)


def test_parse_documented_examples():
    fam = parse_kernel_id("fundamental:laplace:2d")
    assert fam.kind == "fundamental"
    assert fam.operator.kind == "laplace"
    assert fam.operator.dim == 2

    fam = parse_kernel_id("fundamental-real:helmholtz:2d?k=14.1421")
    assert fam.operator.k == pytest.approx(14.1421)

    fam = parse_kernel_id("time-fundamental:heat:3d?k=0.001")
    assert fam.operator.kind == "heat"
    assert fam.operator.dim == 3
    assert fam.operator.k == pytest.approx(0.001)

    fam = parse_kernel_id("elasto-disp:2d?nu=0.3&mu=384615")
    assert fam.operator.nu == pytest.approx(0.3)
    assert fam.operator.shear == pytest.approx(384615.0)


def test_parse_velocity_and_structural():
    fam = parse_kernel_id("fundamental:convection-diffusion:2d?k=1&d=2&v=0.5,-0.25")
    assert fam.operator.velocity == (0.5, -0.25)
    fam = parse_kernel_id(
        "time-fundamental:structural-diffusion:2d?d=1&alpha=0.5&st=power&sx=exp")
    assert fam.operator.alpha == pytest.approx(0.5)
    assert fam.operator.structural_t == "power"
    assert fam.operator.structural_x == "exp"


def test_roundtrip_through_format():
    ids = [
        "fundamental:laplace:3d",
        "fundamental-real:helmholtz:2d?k=14.142135623730951",
        "fundamental:modified-helmholtz:3d?k=1.7320508075688772",
        "time-fundamental:heat:3d?k=0.001",
        "elasto-disp:2d?nu=0.3&mu=384615",
        "fundamental-real:helmholtz:2d?k=1&shift=0.5",
        "t-complete:helmholtz:2d?k=2&m=3",
        "fundamental:helmholtz:2d?k=2&split=1",
        "fundamental:helmholtz:3d?k=2&outgoing=0",
    ]
    for ident in ids:
        fam = parse_kernel_id(ident)
        again = parse_kernel_id(format_kernel_id(fam))
        assert again == fam, ident


def test_unknown_identifier_lists_valid_ones():
    with pytest.raises(UnsupportedKernelError) as err:
        parse_kernel_id("fundamental:nonsense:2d")
    msg = str(err.value)
    assert "fundamental:laplace:2d" in msg
    with pytest.raises(UnsupportedKernelError):
        parse_kernel_id("garbage")
    with pytest.raises(UnsupportedKernelError):
        parse_kernel_id("fundamental:laplace:2d?bogus=1")


def test_listed_ids_all_parse_and_evaluate():
    count = 0
    for ident in list_kernel_ids():
        fam = parse_kernel_id(ident)
        count += 1
        # every listed steady kernel evaluates at a generic point
        if not fam.operator.is_time_dependent and fam.kind not in (
                "t-complete", "elasto-disp", "elasto-trac"):
            dim = fam.operator.dim
            x = [1.1] + [0.2] * (dim - 1)
            s = [0.0] * dim
            v = eval_kernel(fam, x, s)
            if isinstance(v, complex):
                assert math.isfinite(v.real) and math.isfinite(v.imag)
            else:
                assert math.isfinite(v)
    assert count >= 30
