from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knvertex.errors import WindowError
from knvertex.fock import FockSpace, ModeOperator, monomial_weight, partitions, render_monomial

# p(0..8), the partition numbers
PARTITION_NUMBERS = [1, 1, 2, 3, 5, 7, 11, 15, 22]


@pytest.mark.parametrize("w", range(9))
def test_partition_counts(w):
    parts = partitions(w)
    assert len(parts) == PARTITION_NUMBERS[w]
    assert len(set(parts)) == len(parts)
    assert all(sum(p) == w and list(p) == sorted(p, reverse=True) for p in parts)


def test_dimensions(g0, g1):
    assert FockSpace(g0, 8).dim() == sum(PARTITION_NUMBERS)
    assert FockSpace(g1, 5).dim(5) == 7
    with pytest.raises(ValueError):
        FockSpace(g0, -1)


def test_render_and_parse(space0, space1):
    assert render_monomial((2, 1), 0) == "A[-2]A[-1]|0>"
    assert render_monomial((2, 1), 1) == "A[-3/2]A[-1/2]|0>"
    assert render_monomial((), 1) == "|0>"
    v = space1.parse_state("A[-3/2]A[-1/2]|0>")
    assert v.coeffs == {(2, 1): 1}
    assert space0.parse_state("|0>").coeffs == {(): 1}
    for bad in ("A[-1]", "A[-1] junk |0>", "B[-1]|0>"):
        with pytest.raises(ValueError):
            space0.parse_state(bad)
    with pytest.raises(ValueError):
        space0.parse_state("A[-1/2]|0>")


# examples ------------------------------------------------------------------------


def test_genus0_examples(g0):
    s = FockSpace(g0, 3)
    assert s.apply_mode(2, s.monomial((1,))).coeffs == {(): 1}
    assert not s.apply_mode(4, s.vacuum())
    assert s.mode_matrix(-2).column(()).coeffs == {(1,): 1}


def test_genus1_example(space1):
    s = space1
    g = s.genus
    v = s.apply_mode(-1, s.apply_mode(-3, s.vacuum()))
    # A_{-1/2} A_{-3/2}|0> = A_{-3/2} A_{-1/2}|0> + gamma(-1/2, -3/2)|0>
    assert v.coeffs == {(2, 1): 1, (): s.gamma(-1, -3)}
    out = s.apply_mode(3, v)
    expected = {(2,): s.gamma(3, -1), (1,): s.gamma(3, -3)}
    assert out.coeffs == {k: c for k, c in expected.items() if c}
    assert g == 1


def test_a_g_half_acts_as_zero(space0, space1):
    for s in (space0, space1):
        m = s.mode_matrix(s.genus)
        assert not m.cols
        assert not s.apply_mode(s.genus, s.monomial((1, 1)))


def test_translation_examples(g0):
    s = FockSpace(g0, 3)
    t = s.translation_matrix()
    assert not t.apply(s.vacuum())
    assert t.apply(s.monomial((1,))).coeffs == {(2,): 1}
    assert t.apply(s.monomial((1, 1))).coeffs == {(2, 1): 2}


def test_translation_kills_vacuum_genus1(space1):
    assert not space1.translation_matrix().apply(space1.vacuum())


def test_truncation_window(g0):
    s = FockSpace(g0, 2)
    v = s.apply_mode(-6, s.vacuum())
    assert not v.coeffs
    with pytest.raises(WindowError):
        v.coeff((3,))


# PBW well-definedness --------------------------------------------------------------


def _act_vec(space, tn, vec):
    out = {}
    for js, c in vec.items():
        for k, x in space.act(tn, js).items():
            out[k] = out.get(k, 0) + c * x
    return {k: v for k, v in out.items() if v}


def _bracket_defect(space, tn, tm, js):
    v = {js: 1}
    left = _act_vec(space, tn, _act_vec(space, tm, v))
    right = _act_vec(space, tm, _act_vec(space, tn, v))
    diff = dict(left)
    for k, c in right.items():
        diff[k] = diff.get(k, 0) - c
    g = space.gamma(tn, tm)
    if g:
        diff[js] = diff.get(js, 0) - g
    return {k: c for k, c in diff.items() if c}


monomials = st.integers(0, 4).flatmap(lambda w: st.sampled_from(partitions(w)))


@settings(max_examples=80, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), monomials)
def test_commutator_is_gamma_genus0(space0, n, m, js):
    assert _bracket_defect(space0, 2 * n, 2 * m, js) == {}


@settings(max_examples=80, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), monomials)
def test_commutator_is_gamma_genus1(space1, n, m, js):
    assert _bracket_defect(space1, 2 * n + 1, 2 * m + 1, js) == {}


@settings(max_examples=40, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4))
def test_truncated_matrices_respect_their_trust(space1, n, m):
    """Composed matrices agree with the exact action on every trusted column."""
    tn, tm = 2 * n + 1, 2 * m + 1
    prod = space1.mode_matrix(tn).compose(space1.mode_matrix(tm))
    for js in space1.basis():
        if monomial_weight(js) > prod.trust:
            continue
        exact = _act_vec(space1, tn, _act_vec(space1, tm, {js: 1}))
        got = prod.column(js).coeffs
        assert got == {k: c for k, c in exact.items() if monomial_weight(k) <= space1.wmax}


def test_mode_operator_algebra(space0):
    a = space0.mode_matrix(-2)
    b = space0.mode_matrix(2)
    ident = space0.identity()
    comm = a.compose(b) - b.compose(a)
    # [A_{-1}, A_1] = -1 on the columns where nothing falls off the top
    assert comm.agrees(-1 * ident, upto=space0.wmax - 1)
    assert (a - a).is_zero()
    assert ModeOperator.zero(3).compose(a).is_zero()
