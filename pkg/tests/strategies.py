"""Hypothesis strategies shared across test modules."""

from hypothesis import strategies as st

from frontlab import KineticsParams

_pos = st.floats(min_value=0.3, max_value=3.0, allow_nan=False, allow_infinity=False)
_margin = st.floats(min_value=1.2, max_value=4.0, allow_nan=False, allow_infinity=False)


@st.composite
def admissible_params(draw):
    """Bistable parameter sets built so the order condition holds by construction.

    With a2 = a1*(R2/R1)*m_a and b1 = b2*(R1/R2)*m_b for margins m > 1,
    a1/a2 = (R1/R2)/m_a < R1/R2 < (R1/R2)*m_b = b1/b2.
    """
    R1, R2, a1, b2, D1, D2 = (draw(_pos) for _ in range(6))
    m_a, m_b = draw(_margin), draw(_margin)
    a2 = a1 * (R2 / R1) * m_a
    b1 = b2 * (R1 / R2) * m_b
    return KineticsParams(D1=D1, D2=D2, R1=R1, R2=R2, a1=a1, b1=b1, a2=a2, b2=b2)


@st.composite
def symmetric_params(draw):
    """Parameter sets invariant under the species exchange (u,v) -> (v,u)."""
    R, a, D = draw(_pos), draw(_pos), draw(_pos)
    b = a * draw(_margin)
    return KineticsParams(D1=D, D2=D, R1=R, R2=R, a1=a, b1=b, a2=b, b2=a)
