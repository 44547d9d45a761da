import os

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from modkron.cyclotomic import CycNumber, euler_phi
from modkron.qseries import QSeries

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

LEVELS = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15]


@st.composite
def cyc_integral(draw, level=None, bound=50):
    m = level if level is not None else draw(st.sampled_from(LEVELS))
    n = euler_phi(m)
    coords = draw(st.lists(st.integers(-bound, bound), min_size=n, max_size=n))
    return CycNumber(m, coords)


@st.composite
def cyc_rational(draw, level=None):
    a = draw(cyc_integral(level))
    d = draw(st.integers(1, 30))
    return CycNumber(a.level, a.coords, d)


@st.composite
def cyc_pair(draw, integral=True):
    m = draw(st.sampled_from(LEVELS))
    make = cyc_integral if integral else cyc_rational
    return draw(make(m)), draw(make(m))


@st.composite
def integral_series(draw, level=None, exp_denom=None, max_terms=8, span=12):
    m = level if level is not None else draw(st.sampled_from([1, 3, 4, 5]))
    e = exp_denom if exp_denom is not None else draw(st.sampled_from([1, 2, 3]))
    low = draw(st.integers(-3, 2))
    keys = draw(st.sets(st.integers(low, low + span - 1), max_size=max_terms))
    terms = {k: draw(cyc_integral(m, bound=9)) for k in keys}
    return QSeries(terms, low + span, low=low, exp_denom=e, coeff_level=m)
