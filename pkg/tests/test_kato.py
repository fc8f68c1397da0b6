import numpy as np
import pytest

from levygreen import kato, stable

ALPHA = 1.5
A = stable.h_constant(ALPHA)


def test_zero_drift_modulus(table15):
    b = kato.constant_drift(0.0)
    for r in (1e-1, 1e-3):
        assert kato.kato_modulus(b, table15, r) == 0.0


def test_constant_drift_closed_form(table15):
    # m(r) = 2 int_0^r M = (4/A) sqrt(r) for this index
    b = kato.constant_drift(1.0)
    for r in (1e-2, 1e-4, 1e-6):
        assert kato.kato_modulus(b, table15, r) == pytest.approx(
            4.0 / A * np.sqrt(r), rel=1e-9)


def test_power_drift_modulus_closed_form(table15):
    # pole-centered window: m(r) = (2/(A (alpha-1-beta))) r^(alpha-1-beta)
    b = kato.power_drift(0.4)
    for r in (1e-2, 1e-4):
        assert kato.kato_modulus(b, table15, r) == pytest.approx(
            2.0 / (A * 0.1) * r ** 0.1, rel=1e-9)


def test_supercritical_power_is_divergent(table15):
    assert kato.kato_modulus(kato.power_drift(0.6), table15, 1e-2) == np.inf


def test_certificates(table15):
    assert kato.is_kato(kato.constant_drift(1.0), table15).passed
    assert kato.is_kato(kato.sin_drift(1.0, 5.0), table15).passed
    assert kato.is_kato(kato.power_drift(0.4), table15).passed
    cert = kato.is_kato(kato.power_drift(0.6), table15)
    assert not cert.passed
    assert np.isinf(cert.moduli[0])


def test_bounded_drifts_accepted(table15):
    for b in (kato.constant_drift(3.0), kato.sin_drift(2.0, 11.0),
              kato.custom_drift(lambda z: np.tanh(np.asarray(z)), label="tanh")):
        assert kato.is_kato(b, table15).passed


def test_modulus_monotone_in_radius(table15):
    b = kato.constant_drift(1.0)
    ms = [kato.kato_modulus(b, table15, r) for r in (1e-4, 1e-3, 1e-2, 1e-1)]
    assert all(m1 < m2 for m1, m2 in zip(ms, ms[1:]))


def test_modulus_monotone_in_drift(table15):
    small = kato.kato_modulus(kato.constant_drift(1.0), table15, 1e-2)
    large = kato.kato_modulus(kato.constant_drift(5.0), table15, 1e-2)
    assert large == pytest.approx(5.0 * small, rel=1e-12)
    # pointwise domination: |sin(5z)| <= 1
    s = kato.kato_modulus(kato.sin_drift(1.0, 5.0), table15, 1e-2)
    assert s <= small * (1 + 1e-12)


def test_radius_sequence_must_decrease(table15):
    with pytest.raises(ValueError):
        kato.is_kato(kato.constant_drift(1.0), table15, r_sequence=[1e-3, 1e-2])


def test_drift_from_config():
    b = kato.drift_from_config({"family": "sin", "amplitude": 2.0, "frequency": 3.0})
    assert b(np.pi / 6) == pytest.approx(2.0)
    c = kato.drift_from_config({"family": "constant", "value": -1.5})
    assert c(0.3) == -1.5
    p = kato.drift_from_config({"family": "power", "beta": 0.4})
    assert p.singular_points == (0.0,)
    with pytest.raises(ValueError):
        kato.drift_from_config({"family": "tensor"})


def test_certificate_serialization(table15):
    cert = kato.is_kato(kato.constant_drift(1.0), table15)
    d = cert.to_dict()
    assert d["passed"] is True
    assert len(d["radii"]) == len(d["moduli"])
