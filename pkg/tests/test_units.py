import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from etpa_lab.units import (
    AVOGADRO,
    UNITS,
    Dimension,
    DimensionError,
    DomainError,
    Quantity,
    cm4s_to_gm,
    gm_to_cm4s,
    magnitude,
    molar_to_number_density,
    mw_to_w,
    number_density_to_molar,
    power_to_photon_rate,
    w_to_mw,
)

magnitudes = st.floats(min_value=0, max_value=1e30, allow_nan=False, allow_infinity=False)


def test_gm_examples():
    assert gm_to_cm4s(100) == pytest.approx(1e-48, rel=1e-15)
    assert gm_to_cm4s(0) == 0
    assert gm_to_cm4s(1) == pytest.approx(1e-50, rel=1e-15)
    assert cm4s_to_gm(gm_to_cm4s(1)) == pytest.approx(1, rel=1e-15)


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_gm_rejects_bad_input(bad):
    with pytest.raises(DomainError):
        gm_to_cm4s(bad)


def test_molar_to_number_density_examples():
    # 63 uM = 63e-9 mol/cm^3
    oracle = 63e-9 * 6.02214076e23
    assert molar_to_number_density(63e-6) == pytest.approx(oracle, rel=1e-12)
    assert molar_to_number_density(63e-6) == pytest.approx(3.794e16, rel=1e-3)
    assert molar_to_number_density(0) == 0
    assert molar_to_number_density(1.0) == pytest.approx(6.02214076e20, rel=1e-15)
    with pytest.raises(DomainError):
        molar_to_number_density(-1e-6)


def test_power_to_photon_rate():
    # hand arithmetic: h*c/404 nm = 4.917e-19 J
    e_photon = 6.62607015e-34 * 299792458 / 404e-9
    assert e_photon == pytest.approx(4.917e-19, rel=1e-3)
    one_mw = power_to_photon_rate(1e-3, 404e-7)
    assert one_mw == pytest.approx(1e-3 / e_photon, rel=1e-12)
    assert one_mw == pytest.approx(2.034e15, rel=1e-3)
    assert power_to_photon_rate(0, 404e-7) == 0
    assert power_to_photon_rate(20e-3, 404e-7) == pytest.approx(20 * one_mw, rel=1e-14)
    with pytest.raises(DomainError):
        power_to_photon_rate(1e-3, 0)


def test_power_to_photon_rate_accepts_quantities():
    r = power_to_photon_rate(Quantity.of(1, "mW"), Quantity.of(404, "nm"))
    assert r == pytest.approx(2.034e15, rel=1e-3)
    with pytest.raises(DimensionError):
        power_to_photon_rate(Quantity.of(1, "mW"), Quantity.of(1, "s"))


@given(magnitudes)
def test_conversion_round_trips(x):
    assert cm4s_to_gm(gm_to_cm4s(x)) == pytest.approx(x, rel=1e-12)
    assert number_density_to_molar(molar_to_number_density(x)) == pytest.approx(x, rel=1e-12)
    assert w_to_mw(mw_to_w(x)) == pytest.approx(x, rel=1e-12)


@given(magnitudes, st.sampled_from(sorted(UNITS)))
def test_quantity_unit_round_trip(x, unit):
    assert Quantity.of(x, unit).to(unit) == pytest.approx(x, rel=1e-12)


def test_quantity_conversions():
    assert Quantity.of(61, "um").to("mm") == pytest.approx(0.061, rel=1e-12)
    assert Quantity.of(100, "GM").value == pytest.approx(1e-48, rel=1e-12)
    assert Quantity.of(63, "uM").to("mM") == pytest.approx(0.063, rel=1e-12)
    assert Quantity.of(1, "L").to("cm3") == 1000


def test_quantity_rejects_negative_and_nonfinite():
    with pytest.raises(DomainError):
        Quantity(-1.0, Dimension.LENGTH)
    with pytest.raises(DomainError):
        Quantity(math.nan, Dimension.RATE)
    with pytest.raises(TypeError):
        Quantity("1", Dimension.RATE)


def test_dimensional_safety():
    length = Quantity.of(1, "mm")
    area = Quantity(2e-4, Dimension.AREA)
    with pytest.raises(DimensionError):
        length + area
    with pytest.raises(DimensionError):
        length < area
    with pytest.raises(DimensionError):
        length * area
    with pytest.raises(DimensionError):
        length + 1.0
    with pytest.raises(DimensionError):
        length.to("cm2")
    with pytest.raises(DimensionError):
        Quantity.of(1, "furlong")
    with pytest.raises(DimensionError):
        magnitude(length, Dimension.TIME)


def test_quantity_arithmetic_same_dimension():
    a, b = Quantity.of(3, "mm"), Quantity.of(1, "mm")
    assert (a + b).to("mm") == pytest.approx(4)
    assert (a - b).to("mm") == pytest.approx(2)
    assert (2 * a).to("mm") == pytest.approx(6)
    assert a / b == pytest.approx(3)
    assert (a / 3).to("mm") == pytest.approx(1)
    assert b < a and a >= b
    with pytest.raises(DomainError):
        b - a  # physical magnitudes cannot go negative


def test_avogadro_is_exact():
    assert AVOGADRO == 6.02214076e23
