import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shalika import _kernels


@settings(max_examples=30)
@given(st.sampled_from([2, 3, 4, 9]), st.integers(1, 3), st.integers(1, 3), st.data())
def test_numba_and_numpy_axis_dft_agree(L, pre, post, data):
    R = L * data.draw(st.sampled_from([1, 2, 3]))
    s = R // L
    vals = data.draw(st.lists(st.integers(-3, 3), min_size=pre * L * post * R, max_size=pre * L * post * R))
    arr = np.array(vals, dtype=np.int64).reshape(pre, L, post, R)
    a = _kernels.axis_dft(arr, s, "numpy")
    b = _kernels.axis_dft(arr, s, "numba")
    assert np.array_equal(a, b)


def test_dft_of_delta_is_character_row():
    L = R = 3
    arr = np.zeros((1, L, 1, R), dtype=np.int64)
    arr[0, 1, 0, 0] = 1
    out = _kernels.axis_dft(arr, 1, "numpy")
    # f = delta_1, so f^(X) = zeta^X
    for X in range(L):
        assert list(out[0, X, 0]) == [1 if r == X else 0 for r in range(R)]


def test_kernel_env_validation(monkeypatch):
    monkeypatch.setenv("SHALIKA_KERNEL", "numpy")
    assert _kernels.kernel_name() == "numpy"
    monkeypatch.setenv("SHALIKA_KERNEL", "cuda")
    with pytest.raises(ValueError):
        _kernels.kernel_name()
