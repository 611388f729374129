from __future__ import annotations

import pytest

from knvertex.coeffs import K1
from knvertex.errors import WindowError
from knvertex.series import LaurentSeries
from knvertex.structure import (
    StructureTables,
    all_tables,
    check_annihilation,
    check_delta_antisymmetry,
    check_delta_reproducing,
    delta_kernel,
    gamma_band,
    gamma_table,
    iterated_xi,
    lemma_product,
    structure_of,
    szego_split,
)
from knvertex.surface import twice_range
from knvertex.windows import a_valuation

G0_IDX = list(range(-12, 13, 2))
G1_IDX = list(range(-9, 10, 2))


@pytest.fixture(scope="module")
def tables0(g0):
    return all_tables(g0, -12, 12)


@pytest.fixture(scope="module")
def tables1(g1):
    return all_tables(g1, -9, 9)


# genus 0 closed forms --------------------------------------------------------


def test_genus0_gamma(tables0):
    for tn in G0_IDX:
        for tm in G0_IDX:
            assert tables0.gamma(tn, tm) == (tn // 2 if tn + tm == 0 else 0)


def test_genus0_xi(tables0):
    for tm in G0_IDX:
        for tn in G0_IDX:
            assert tables0.xi(tm, tn) == (-(tm // 2) if tn == tm - 2 else 0)


def test_genus0_alpha(tables0):
    for tu in G0_IDX:
        for tn in G0_IDX:
            for tm in G0_IDX:
                assert tables0.alpha(tu, tn, tm) == (1 if tm == tu + tn else 0)


# trivial rows at any genus ---------------------------------------------------


@pytest.mark.parametrize("which", ["tables0", "tables1"])
def test_constant_function_rows(request, which):
    t = request.getfixturevalue(which)
    g = t.genus
    idx = list(twice_range(t.lo, t.hi, g))
    for tm in idx:
        assert t.gamma(g, tm) == 0
        assert t.xi(g, tm) == 0
        for tn in idx:
            assert t.alpha(g, tn, tm) == (1 if tn == tm else 0)


@pytest.mark.parametrize("which", ["tables0", "tables1"])
def test_gamma_antisymmetric_and_vanishing(request, which):
    t = request.getfixturevalue(which)
    g = t.genus
    idx = list(twice_range(t.lo, t.hi, g))
    for tn in idx:
        for tm in idx:
            assert t.gamma(tn, tm) == -t.gamma(tm, tn)
            if tn >= g and tm >= g:
                assert not t.gamma(tn, tm)


@pytest.mark.parametrize("which", ["tables0", "tables1"])
def test_xi_sparsity(request, which):
    t = request.getfixturevalue(which)
    idx = list(twice_range(t.lo, t.hi, t.genus))
    for tm in idx:
        for tn in idx:
            if tm > tn + 2:
                assert not t.xi(tm, tn)


def test_window_errors(tables0):
    with pytest.raises(WindowError):
        tables0.gamma(14, 0)


# genus 1 -----------------------------------------------------------------------


def test_genus1_gamma_band(tables1):
    band = gamma_band(tables1)
    assert band and max(band) <= 2
    # the genus-0 diagonal n + m = 0 is part of it
    assert 0 in band
    assert tables1.gamma(3, -3)


def _residue_direct(f, g):
    """Coefficient of z^-1 in f * g from a plain double loop."""
    total = K1(0)
    for i, x in f.coeffs.items():
        y = g.coeffs.get(-1 - i)
        if y is not None and -1 - i < g.precision and i < f.precision:
            total = total + x * y
    return total


def test_genus1_gamma_rederived_at_double_precision(g1, tables1):
    for tn in G1_IDX:
        for tm in G1_IDX:
            need = 2 * (abs(a_valuation(1, tn)) + abs(a_valuation(1, tm)) + 2)
            am = g1.A(tm, need).series
            dan = g1.A(tn, need + 1).series.derivative()
            assert _residue_direct(am, dan) == (tables1.gamma(tn, tm) or 0), (tn, tm)


def test_genus1_xi_reconstructs_nabla_omega(g1, tables1):
    e = g1.e(10).series
    for tn in (-5, -3, -1, 1, 3):
        w = g1.omega(tn, 6).series
        lhs = e * w.derivative() + w * e.derivative()
        rhs = LaurentSeries.zero(-6, 6)
        for tm in G1_IDX:
            c = tables1.xi(tm, tn)
            if c:
                rhs = rhs + c * g1.omega(tm, 6).series
        assert lhs.truncate(4).agrees(rhs.truncate(4))
        assert lhs.truncate(4).precision == 4
    # omega^{-1/2} = dz is invariant under d/dz
    assert not any(tables1.xi(tm, -1) for tm in G1_IDX)


def test_genus1_alpha_recombination(g1, tables1):
    for tu in (-3, -1, 3):
        for tn in (-5, -1, 1, 5):
            direct = g1.A(tu, 6).series * g1.A(tn, 6).series
            combo = None
            for tm in G1_IDX:
                c = tables1.alpha(tu, tn, tm)
                if c:
                    term = c * g1.A(tm, 6).series
                    combo = term if combo is None else combo + term
            top = min(direct.precision, combo.precision)
            assert direct.truncate(top).agrees(combo.truncate(top)), (tu, tn)


def test_table_json_roundtrip(tables1):
    for kind in ("gamma", "xi", "alpha"):
        back = StructureTables.from_json(tables1.to_json(kind))
        original = {"gamma": tables1.gamma_entries, "xi": tables1.xi_entries, "alpha": tables1.alpha_entries}[kind]
        got = {"gamma": back.gamma_entries, "xi": back.xi_entries, "alpha": back.alpha_entries}[kind]
        assert {k: v or 0 for k, v in got.items()} == {k: v or 0 for k, v in original.items()}


def test_gamma_csv(g0):
    csv_text = gamma_table(g0, -2, 2).to_csv("gamma")
    lines = csv_text.splitlines()
    assert lines[0] == "twice_n,twice_m,value"
    assert "2,-2,1" in lines and "-2,2,-1" in lines and "0,0,0" in lines


# iterated xi ------------------------------------------------------------------


def test_iterated_xi_example(g0):
    s = structure_of(g0)
    assert iterated_xi(s, -2, 2, 2) == 0
    assert lemma_product(0, -2, 2) == 0


@pytest.mark.parametrize("model_name", ["g0", "g1"])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_iterated_xi_lemma(request, model_name, k):
    model = request.getfixturevalue(model_name)
    s = structure_of(model)
    g = model.genus
    for tn in twice_range(g - 10, g + 6, g):
        top = tn + 2 * k
        assert iterated_xi(s, tn, k, top, slack=1) == lemma_product(g, tn, k)
        for extra in (2, 4):
            assert iterated_xi(s, tn, k, top + extra, slack=2) == 0
    for tn in range(g - 2 * k, g, 2):
        assert iterated_xi(s, tn, k, tn + 2 * k) == 0
        if g == 0:
            for tuk in range(tn - 2 * k, tn + 2 * k + 1, 2):
                assert iterated_xi(s, tn, k, tuk) == 0


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_iterated_xi_vanishes_at_g_half_minus_one(g1, k):
    s = structure_of(g1)
    for tuk in range(-1 - 2 * k, -1 + 2 * k + 3, 2):
        assert iterated_xi(s, -1, k, tuk) == 0


def test_iterated_xi_genus1_counterexample(g1):
    # n = -3/2 lies in {g/2 - k, ..., g/2 - 1} for k >= 2, yet lower targets survive
    s = structure_of(g1)
    survivors = {k: [tuk for tuk in range(-3 - 2 * k, -3 + 2 * k, 2) if iterated_xi(s, -3, k, tuk)]
                 for k in (2, 3, 4)}
    assert all(survivors.values()), survivors
    for k in (2, 3, 4):
        assert iterated_xi(s, -3, k, -3 + 2 * k) == 0


def test_iterated_xi_rejects_k0(g0):
    with pytest.raises(ValueError):
        iterated_xi(structure_of(g0), 0, 0, 0)


# delta kernel ----------------------------------------------------------------


def test_genus0_szego_halves(g0):
    s_pq, s_qp = szego_split(g0, -10, 10)
    # 1/(z-w) dw: sum_{n<0} z^n w^(-n-1) and -sum_{n>=0} z^n w^(-n-1)
    for i in range(-5, s_pq.nx):
        for j in range(-5, s_pq.ny):
            want_pq = 1 if (i < 0 and j == -i - 1) else 0
            want_qp = -1 if (i >= 0 and j == -i - 1) else 0
            assert s_pq.coeff(i, j) == want_pq
            assert s_qp.coeff(i, j) == want_qp


def test_delta_kernel_genus1_stable_under_wider_window(g1):
    small = delta_kernel(g1, -7, 7).series
    big = delta_kernel(g1, -13, 13).series
    assert small.region()
    for i, j in small.region():
        assert small.coeff(i, j) == big.coeff(i, j)


def test_reproducing_examples(g0, g1):
    assert check_delta_reproducing(g0, 4, -10, 10)["result"] == "pass"
    assert check_delta_reproducing(g1, -3, -9, 9)["result"] == "pass"
    assert check_delta_reproducing(g1, 1, -9, 9, weight=1)["result"] == "pass"


@pytest.mark.parametrize("weight", [0, 1])
def test_reproducing_whole_window(g0, g1, weight):
    for model, lo, hi in ((g0, -12, 12), (g1, -9, 9)):
        for tk in twice_range(lo, hi, model.genus):
            assert check_delta_reproducing(model, tk, lo, hi, weight)["result"] == "pass"


def test_antisymmetry(g0, g1):
    assert check_delta_antisymmetry(g0, -10, 10)["result"] == "pass"
    assert check_delta_antisymmetry(g1, -9, 9)["result"] == "pass"


def test_exact_differential_summand(g1):
    # Res d(A_u omega^n / e-contraction) style sanity: residue of an exact differential
    for tu in (-3, 1, 3):
        f = g1.A(tu, 6).series * g1.A(-5, 6).series
        assert f.derivative().coeff(-1) == 0


def test_annihilation_examples(g0, g1):
    assert check_annihilation(g0, 2, 0, 0, 2)["result"] == "pass"
    assert check_annihilation(g0, 2, d_p=False)["result"] == "pass"
    assert check_annihilation(g1, 3, 1, 1, 4)["result"] == "pass"


def test_annihilation_sharpness(g0):
    # one factor fewer than the theorem's exponent leaves something behind
    assert check_annihilation(g0, 2, 0, 0, 1)["result"] == "fail"
    assert check_annihilation(g0, 2, 1, 1, 3)["result"] == "fail"


def test_annihilation_u_minus_three_halves(g1):
    for s in range(3):
        for m in range(s + 1):
            rep = check_annihilation(g1, -3, m, s - m)
            assert rep["result"] == "pass", rep
            assert rep["params"]["N"] == s + 2
