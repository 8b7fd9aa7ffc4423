import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fjdyn import oracles

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def networks(draw, n_min=2, n_max=8, mix=None):
    n = draw(st.integers(n_min, n_max))
    density = draw(st.sampled_from([0.2, 0.5, 1.0]))
    if mix is None:
        w = np.array([draw(st.floats(0.0, 1.0)) for _ in range(3)]) + 1e-3
        mix = tuple(w / w.sum())
    seed = draw(st.integers(0, 2**32 - 1))
    return oracles.random_network(n, density, mix, seed)


def vectors(n, lo=-5.0, hi=5.0):
    return st.lists(st.floats(lo, hi, allow_nan=False), min_size=n, max_size=n).map(np.array)
