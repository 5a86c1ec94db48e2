import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vcpknot import ambient, vcp
from vcpknot.errors import ConfigError, DimensionError


def test_exp_map_is_translation():
    space = ambient.euclidean(vcp.g2())
    p, v = np.arange(7.0), np.linspace(-1, 1, 7)
    np.testing.assert_array_equal(ambient.exp_map(space, p, v), p + v)


def test_torus_reduction_and_unwrap():
    space = ambient.torus(vcp.volume_form(3), (1.0, 2.0, 3.0))
    q = ambient.exp_map(space, np.array([0.9, 1.9, 2.9]), np.array([0.2, 0.2, 0.2]))
    np.testing.assert_allclose(q, [0.1, 0.1, 0.1], atol=1e-15)
    np.testing.assert_allclose(space.unwrap(np.array([0.95, -1.9, 0.1])), [-0.05, 0.1, 0.1], atol=1e-15)
    assert space.topology == "torus"


def test_exp_map_dimension_errors():
    space = ambient.euclidean(vcp.volume_form(3))
    with pytest.raises(DimensionError):
        ambient.exp_map(space, np.zeros(4), np.zeros(4))
    with pytest.raises(DimensionError):
        ambient.exp_map(space, np.zeros(3), np.zeros(2))
    with pytest.raises(DimensionError):
        ambient.vcp_at(space, np.zeros(2))


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_twisted_field_is_a_vcp_everywhere(rate, x):
    space = ambient.twisted(vcp.g2(), rate)
    p = np.zeros(7)
    p[0] = x
    chi = ambient.vcp_at(space, p)
    assert vcp.verify_vcp_axioms(chi, trials=20, seed=1).max_violation <= 1e-12


def test_twisted_contract_and_form_match_dense_tensor():
    field = ambient.TwistedField(vcp.g2(), 0.5)
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(6, 7))
    a, b, c = rng.normal(size=(3, 6, 7))
    for k in range(6):
        chi = field.at(pts[k])
        np.testing.assert_allclose(field.contract(pts[k : k + 1], a[k : k + 1], b[k : k + 1])[0], chi.contract(a[k], b[k]), atol=1e-13)
        assert field.form(pts[k : k + 1], a[k : k + 1], b[k : k + 1], c[k : k + 1])[0] == pytest.approx(chi.form(a[k], b[k], c[k]), abs=1e-13)


def test_twisted_field_is_not_parallel():
    field = ambient.TwistedField(vcp.g2(), 0.5)
    p = np.zeros(7)
    q = p.copy()
    q[0] = 0.1
    assert np.max(np.abs(field.at(q).tensor - field.at(p).tensor)) > 1e-2
    zero = ambient.TwistedField(vcp.g2(), 0.0)
    assert np.array_equal(zero.at(q).tensor, vcp.g2().tensor)


def test_twisted_torus_rejected():
    with pytest.raises(ConfigError) as info:
        ambient.AmbientSpace(7, ambient.TwistedField(vcp.g2(), 0.5), (1.0,) * 7)
    assert info.value.field == "vcp.parallel"
    with pytest.raises(ConfigError) as info:
        ambient.from_config({"m": 7, "topology": "torus", "vcp": {"kind": "g2", "parallel": False}})
    assert info.value.field == "ambient.vcp.parallel"


def test_ambient_derivative():
    space = ambient.euclidean(vcp.volume_form(3))
    field = lambda t: np.array([t**2, np.sin(t), 1.0])
    path = lambda t: np.array([t, 0.0, 0.0])
    d = ambient.ambient_derivative(space, path, field, 0.3, 1e-4)
    np.testing.assert_allclose(d, [0.6, np.cos(0.3), 0.0], atol=1e-8)
    with pytest.raises(ValueError):
        ambient.ambient_derivative(space, path, field, 0.0, 0.0)


def test_ambient_derivative_wraps_on_torus():
    space = ambient.torus(vcp.volume_form(3), (1.0, 1.0, 1.0))
    field = lambda t: space.reduce(np.array([0.999 + t, 0.0, 0.0]))
    path = lambda t: np.zeros(3)
    d = ambient.ambient_derivative(space, path, field, 0.0, 0.01, wrap=True)
    np.testing.assert_allclose(d, [1.0, 0.0, 0.0], atol=1e-12)


@pytest.mark.parametrize(
    "cfg, field",
    [
        ({}, "ambient.m"),
        ({"m": 7}, "ambient.vcp.kind"),
        ({"m": 7, "vcp": {"kind": "bogus"}}, "ambient.vcp.kind"),
        ({"m": 8, "vcp": {"kind": "g2"}}, "ambient.vcp.kind"),
        ({"m": 3, "topology": "sphere", "vcp": {"kind": "volume"}}, "ambient.topology"),
    ],
)
def test_config_errors_name_field(cfg, field):
    with pytest.raises(ConfigError) as info:
        ambient.from_config(cfg)
    assert info.value.field == field


def test_from_config_builds_spaces():
    assert ambient.from_config({"m": 8, "vcp": {"kind": "spin7"}}).vcp.r == 3
    tw = ambient.from_config({"m": 7, "vcp": {"kind": "g2", "parallel": False, "twist_rate": 0.25}})
    assert tw.field.rate == 0.25 and not tw.field.parallel
    t = ambient.from_config({"m": 4, "topology": "torus", "periods": [1, 2, 3, 4], "vcp": {"kind": "kaehler"}})
    assert t.periods == (1.0, 2.0, 3.0, 4.0)
