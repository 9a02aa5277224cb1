from fractions import Fraction

from hypothesis import settings, strategies as st

from rikit.functions import StepFunction

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

fractions = st.fractions(min_value=0, max_value=8, max_denominator=12)
widths = st.fractions(min_value=Fraction(1, 16), max_value=4, max_denominator=16)


@st.composite
def step_functions(draw, L=None, max_cells=6):
    """Exact (Fraction) step functions with compact support."""
    n = draw(st.integers(1, max_cells))
    ws = draw(st.lists(widths, min_size=n, max_size=n))
    vals = draw(st.lists(fractions, min_size=n, max_size=n))
    edges = [Fraction(0)]
    for w in ws:
        edges.append(edges[-1] + w)
    if L is not None:
        scale = Fraction(L) / edges[-1]
        edges = [e * scale for e in edges]
        return StepFunction(edges, vals, L)
    return StepFunction(edges, vals)
