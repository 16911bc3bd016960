from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

PRIMES = (2, 3, 5)


def padic_rationals(p: int, vmin: int = -3, vmax: int = 3, zero: bool = False):
    """Rationals p^v * a / b with a, b prime to p (b small)."""
    unit = st.tuples(st.integers(1, 200), st.integers(1, 20)).filter(
        lambda t: t[0] % p and t[1] % p).map(lambda t: Fraction(t[0], t[1]))
    sign = st.sampled_from((1, -1))
    nonzero = st.builds(lambda v, u, s: s * Fraction(p) ** v * u, st.integers(vmin, vmax), unit, sign)
    return st.one_of(st.just(Fraction(0)), nonzero) if zero else nonzero


@pytest.fixture(params=(2, 3))
def small_p(request):
    return request.param
