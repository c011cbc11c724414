import numpy as np
import pytest

from optofeedback.spectrum import Frame, Spectrum, params_hash


def make():
    f = np.linspace(-1e6, 1e6, 11) * 2 * np.pi
    return Spectrum(f, 1.0 + np.arange(11) / 7, Frame.PROBE_ROTATING, {"floor": 3.0})


def test_csv_round_trip_is_exact():
    s = make()
    back = Spectrum.from_csv(s.to_csv(manifest="manifest.json"))
    assert np.array_equal(back.psd, s.psd)
    assert np.allclose(back.frequencies, s.frequencies, rtol=1e-15)
    assert back.frame == s.frame


def test_json_round_trip_and_hash():
    s = make()
    back = Spectrum.from_json(s.to_json(extra=1))
    assert back.metadata == {"floor": 3.0}
    assert np.array_equal(back.psd, s.psd)
    assert s.content_hash() == make().content_hash()


def test_validation():
    with pytest.raises(ValueError):
        Spectrum([1.0, 0.5], [1.0, 1.0])
    with pytest.raises(ValueError):
        Spectrum([0.0, 1.0], [1.0, -1.0])


def test_window_shift_scale():
    s = make()
    w = s.window(-1.3e6, 1.3e6)
    assert len(w) == 3
    assert s.shifted(5.0, Frame.LAB).frame is Frame.LAB
    assert np.allclose(s.scaled(2).psd, 2 * s.psd)


def test_params_hash_stable():
    assert params_hash({"a": 1, "b": [1, 2]}) == params_hash({"b": [1, 2], "a": 1})
