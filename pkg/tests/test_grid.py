import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levylp.errors import ConfigurationError
from levylp.grid import GridSpec, SpaceTimeField, load_array, load_field, save_array, save_field


def test_parse_and_geometry():
    g = GridSpec.parse("2,4.0,32")
    assert (g.d, g.L, g.M) == (2, 4.0, 32)
    assert g.h == 0.25 and g.cell_volume == 0.0625
    assert g.points().shape == (32, 32, 2)
    assert g.axis[0] == -4.0
    assert g.nyquist == pytest.approx(np.pi / 0.25)


@pytest.mark.parametrize("args", [(1, 1.0, 48), (1, 1.0, 8), (4, 1.0, 16), (1, -1.0, 16)])
def test_invalid_grids(args):
    with pytest.raises(ConfigurationError):
        GridSpec(*args)


def test_fft_of_gaussian_matches_continuous_transform():
    g = GridSpec(1, 10.0, 256)
    x = g.points()[..., 0]
    spec = g.fft(np.exp(-(x**2))) * g.cell_volume
    xi = g.freq_axis
    np.testing.assert_allclose(spec, np.sqrt(np.pi) * np.exp(-(xi**2) / 4), atol=1e-12)


def test_field_shape_checks():
    g = GridSpec(1, 1.0, 16)
    with pytest.raises(ConfigurationError):
        SpaceTimeField(g, 1.0, np.zeros((3, 17)))
    with pytest.raises(ConfigurationError):
        SpaceTimeField(g, 1.0, np.full((3, 16), np.nan))
    f = SpaceTimeField.from_function(g, 2.0, 4, lambda t, x: t + 0 * x[..., 0])
    assert f.K == 4 and f.dt == 0.5
    np.testing.assert_allclose(f.values[:, 0], [0, 0.5, 1, 1.5, 2])


def test_binary_roundtrip(tmp_path):
    g = GridSpec(2, 1.0, 16)
    rng = np.random.default_rng(0)
    f = SpaceTimeField(g, 1.5, rng.standard_normal((3, 16, 16)))
    save_field(tmp_path / "f.bin", f, note="x")
    back = load_field(tmp_path / "f.bin")
    assert back.T == 1.5 and back.grid == g
    np.testing.assert_array_equal(back.values, f.values)
    assert (tmp_path / "f.bin").stat().st_size == 3 * 256 * 8
    z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    save_array(tmp_path / "z.bin", z, {})
    zz, meta = load_array(tmp_path / "z.bin")
    assert meta["dtype"] == "complex128"
    np.testing.assert_array_equal(zz, z)


@given(st.integers(1, 3), st.integers(4, 6), st.integers(0, 10_000))
def test_fft_roundtrip(d, logm, seed):
    g = GridSpec(d, 2.0, 2**logm)
    v = np.random.default_rng(seed).standard_normal(g.shape)
    np.testing.assert_allclose(g.ifft(g.fft(v)).real, v, atol=1e-12)
