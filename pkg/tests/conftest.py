import numpy as np
import pytest
from hypothesis import strategies as st

finite = st.floats(min_value=-3, max_value=3, allow_nan=False, allow_infinity=False)


@st.composite
def hermitian4(draw):
    re = np.array(draw(st.lists(finite, min_size=16, max_size=16))).reshape(4, 4)
    im = np.array(draw(st.lists(finite, min_size=16, max_size=16))).reshape(4, 4)
    m = re + 1j * im
    return 0.5 * (m + m.conj().T)


@st.composite
def complex_vector(draw, dim):
    re = draw(st.lists(finite, min_size=dim, max_size=dim))
    im = draw(st.lists(finite, min_size=dim, max_size=dim))
    v = np.array(re) + 1j * np.array(im)
    if np.linalg.norm(v) < 1e-3:
        v = np.eye(dim)[0].astype(complex)
    return v / np.linalg.norm(v)


@st.composite
def unit_axis(draw):
    v = np.array(draw(st.lists(finite, min_size=3, max_size=3)))
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.0, 0.0, 1.0])
    return v / np.linalg.norm(v)


@st.composite
def density2(draw):
    m = np.array(draw(st.lists(finite, min_size=4, max_size=4))).reshape(2, 2) \
        + 1j * np.array(draw(st.lists(finite, min_size=4, max_size=4))).reshape(2, 2)
    rho = m @ m.conj().T + 1e-3 * np.eye(2)
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
